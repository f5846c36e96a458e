"""Result reporting: CSV emission, SNR-gain extraction, and figures.

Sweep results are written as RFC-4180-style CSV with a fixed column set so
downstream tooling can diff runs.  The summary path interpolates each outage
curve on a log-linear scale to find where it crosses a target outage level
and reports the SNR gain of the two-hop partial-forwarding protocol over
each baseline.  Figures (outage curves, decode-case probabilities) are
rendered next to the CSV when requested.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .outage import SweepRow
from .protocol import ProtocolKind

CSV_HEADER = (
    "snr_db",
    "protocol",
    "mode",
    "p_out_avg",
    "p_out_s1",
    "p_out_s2",
    "pr_a1",
    "pr_a2",
    "pr_a3",
    "std_err",
    "trials",
    "seed",
)

_CASE_PROTOCOLS = (ProtocolKind.PDF, ProtocolKind.PDF_NON_ORTHOGONAL)


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def csv_records(rows: Sequence[SweepRow], seed: int) -> list[tuple[str, ...]]:
    """Format sweep rows as CSV field tuples (header not included)."""
    records = []
    for row in rows:
        est = row.estimate
        # protocols without relay decode cases report the aggregate bucket
        cases = est.case_prob if est.case_prob is not None else (1.0, 0.0, 0.0)
        records.append(
            (
                _fmt(row.snr_db),
                row.protocol.name,
                row.mode,
                _fmt(est.p_out_avg),
                _fmt(est.p_out_stream[0]),
                _fmt(est.p_out_stream[1]),
                _fmt(cases[0]),
                _fmt(cases[1]),
                _fmt(cases[2]),
                _fmt(est.std_err),
                str(est.trials),
                str(seed),
            )
        )
    return records


def write_csv(path: str | Path, rows: Sequence[SweepRow], seed: int) -> Path:
    """Write sweep rows to ``path``; returns the path written."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        writer.writerows(csv_records(rows, seed))
    return path


def snr_at_target(
    curve: Sequence[tuple[float, float]], target: float
) -> float | None:
    """SNR (dB) where an outage curve first falls to ``target``.

    ``curve`` is a sequence of (snr_db, p_out) points; interpolation is
    linear in (snr, log10 p).  Zero estimates are floored below the curve's
    smallest positive value so a log exists; the crossing is the first
    downward one scanning left to right.  Returns None when the curve never
    reaches the target inside the swept range.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target outage must lie in (0, 1), got {target}")
    pts = sorted((float(s), float(p)) for s, p in curve)
    if not pts:
        return None
    positives = [p for _, p in pts if p > 0.0]
    floor = min(positives) / 10.0 if positives else 1e-300
    logs = [(s, math.log10(max(p, floor))) for s, p in pts]
    log_t = math.log10(target)
    for (s0, l0), (s1, l1) in zip(logs, logs[1:]):
        if l0 >= log_t >= l1:
            if l0 == l1:
                return s0
            return s0 + (s1 - s0) * (l0 - log_t) / (l0 - l1)
    if logs[0][1] <= log_t:
        return logs[0][0]
    return None


@dataclass(frozen=True)
class GainEntry:
    """SNR gain of one curve over another at a target outage level."""

    label: str
    reference_snr_db: float | None
    baseline_snr_db: float | None
    gain_db: float | None


def gain_over_baseline(
    reference: Sequence[tuple[float, float]],
    baseline: Sequence[tuple[float, float]],
    target: float,
    label: str = "",
) -> GainEntry:
    """Gain (dB) of ``reference`` over ``baseline``: baseline crossing minus
    reference crossing.  Either crossing may be absent, in which case the
    gain is None."""
    ref = snr_at_target(reference, target)
    base = snr_at_target(baseline, target)
    gain = None if ref is None or base is None else base - ref
    return GainEntry(label, ref, base, gain)


def _curves(rows: Sequence[SweepRow]):
    """Group rows into {(protocol, mode): [(snr, p_out_avg), ...]}."""
    grouped: dict[tuple[ProtocolKind, str], list[tuple[float, float]]] = {}
    for row in rows:
        grouped.setdefault((row.protocol, row.mode), []).append(
            (row.snr_db, row.estimate.p_out_avg)
        )
    for pts in grouped.values():
        pts.sort()
    return grouped


def summary_table(rows: Sequence[SweepRow], target: float) -> str:
    """Human-readable crossing/gain summary for a finished sweep."""
    grouped = _curves(rows)
    lines = [f"target outage level: {target:g}"]
    modes = sorted({mode for _, mode in grouped})
    for mode in modes:
        in_mode = {p: pts for (p, m), pts in grouped.items() if m == mode}
        lines.append(f"mode: {mode}")
        lines.append(f"  {'protocol':<22}{'snr @ target':>14}{'gain vs PDF':>14}")
        ref = in_mode.get(ProtocolKind.PDF)
        ref_cross = snr_at_target(ref, target) if ref else None
        for protocol in sorted(in_mode, key=lambda k: k.name):
            cross = snr_at_target(in_mode[protocol], target)
            cross_s = f"{cross:.2f} dB" if cross is not None else "not reached"
            if protocol is ProtocolKind.PDF or ref is None:
                gain_s = "--"
            elif ref_cross is None or cross is None:
                gain_s = "undefined"
            else:
                gain_s = f"{cross - ref_cross:+.2f} dB"
            lines.append(f"  {protocol.name:<22}{cross_s:>14}{gain_s:>14}")
    return "\n".join(lines)


_MARKERS = {
    ProtocolKind.PDF: "o",
    ProtocolKind.DF: "s",
    ProtocolKind.AF: "^",
    ProtocolKind.NO_RELAY: "x",
    ProtocolKind.PDF_NON_ORTHOGONAL: "d",
}


def render_figures(
    rows: Sequence[SweepRow],
    csv_path: str | Path,
    target: float | None = None,
) -> list[Path]:
    """Render outage-curve and case-probability figures beside the CSV.

    Returns the list of files written.  The case figure is produced only
    when a partial-forwarding protocol is present in the sweep.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    written = []
    grouped = _curves(rows)
    if not grouped:
        return written

    modes = sorted({mode for _, mode in grouped})
    styles = ["-", "--", ":", "-."]
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for (protocol, mode), pts in sorted(
        grouped.items(), key=lambda kv: (kv[0][1], kv[0][0].name)
    ):
        snrs = [s for s, _ in pts]
        pouts = [max(p, 1e-12) for _, p in pts]
        label = protocol.name if len(modes) == 1 else f"{protocol.name} ({mode})"
        ax.semilogy(
            snrs,
            pouts,
            marker=_MARKERS.get(protocol, "."),
            linestyle=styles[modes.index(mode) % len(styles)],
            label=label,
        )
    if target is not None:
        ax.axhline(target, color="grey", linestyle=":", linewidth=1.0)
    ax.set_xlabel("receive SNR (dB)")
    ax.set_ylabel("outage probability")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    curve_path = csv_path.with_suffix(".png")
    fig.savefig(curve_path, dpi=150)
    plt.close(fig)
    written.append(curve_path)

    case_rows = [r for r in rows if r.protocol in _CASE_PROTOCOLS]
    if case_rows:
        protocol, mode = case_rows[0].protocol, case_rows[0].mode
        sel = sorted(
            (r for r in case_rows if r.protocol is protocol and r.mode == mode),
            key=lambda r: r.snr_db,
        )
        snrs = [r.snr_db for r in sel]
        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        for idx, name in enumerate(
            ("relay forwards stream 1", "relay forwards stream 2", "relay silent")
        ):
            ax.plot(snrs, [r.estimate.case_prob[idx] for r in sel], marker=".", label=name)
        ax.set_xlabel("receive SNR (dB)")
        ax.set_ylabel("probability")
        ax.set_ylim(0.0, 1.0)
        ax.grid(True, alpha=0.3)
        ax.set_title(f"{protocol.name} decode cases ({mode})")
        ax.legend(fontsize=8)
        fig.tight_layout()
        case_path = csv_path.with_name(csv_path.stem + "_cases.png")
        fig.savefig(case_path, dpi=150)
        plt.close(fig)
        written.append(case_path)
    return written
