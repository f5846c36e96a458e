"""Monte Carlo outage estimation engine.

Trials are drawn in fixed-size blocks of 4096; block ``b`` of a run gets its
own counter-derived substream ``SeedSequence(seed, spawn_key=(1, b))``, so
the set of channel draws depends only on (config, seed, trials) — never on
how many workers the blocks are dealt out to or in which order they finish.
Reduction is a sum of integer counts, which makes repeated runs bit-identical
and the 1-worker and N-worker paths indistinguishable.
"""

import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import precoder as precoder_mod
from .channel import complex_gaussian, link_correlations, link_path_losses
from .protocol import ProtocolKind, SerModel, batch_gains, evaluate_protocol

BLOCK = 4096
_BLOCK_SPAWN_NS = 1  # spawn-key namespace reserved for engine blocks


@dataclass(frozen=True)
class OutageEstimate:
    """Empirical outage summary for one (config, precoder, protocol) point.

    ``case_prob``/``case_counts``/``p_out_cond`` describe the relay-behaviour
    split of the partial-forwarding protocols and are None for DF/AF/no-relay.
    ``p_out_cond[k][i]`` is the stream-i outage rate conditioned on case k;
    empty cases report 0.0 (their zero frequency removes them from the
    average anyway).
    """

    p_out_avg: float
    p_out_stream: tuple
    stream_counts: tuple
    case_prob: tuple | None
    case_counts: tuple | None
    p_out_cond: tuple | None
    trials: int
    std_err: float

    def stream_ci(self, stream, level=0.95, exact=False):
        """Confidence interval for one stream's outage probability.

        Normal approximation by default; ``exact=True`` switches to
        Clopper-Pearson, which stays honest when the hit count is tiny.
        """
        k = self.stream_counts[stream]
        n = self.trials
        p = k / n
        if not exact:
            z = {0.9: 1.6449, 0.95: 1.9600, 0.99: 2.5758}.get(level)
            if z is None:
                raise ValueError("level must be one of 0.9, 0.95, 0.99")
            half = z * np.sqrt(p * (1.0 - p) / n)
            return max(p - half, 0.0), min(p + half, 1.0)
        from scipy.stats import beta

        a = (1.0 - level) / 2.0
        lo = 0.0 if k == 0 else float(beta.ppf(a, k, n - k + 1))
        hi = 1.0 if k == n else float(beta.ppf(1.0 - a, k + 1, n - k))
        return lo, hi


def _ser_model(cfg):
    return SerModel(
        modulation=cfg.modulation, mode=cfg.ser_mode, fixed_value=cfg.ser_fixed
    )


def n0_for_snr(cfg, snr_db):
    """Noise power realizing a given receive SNR on the direct link."""
    g_sd = link_path_losses(cfg)["SD"]
    return cfg.p0 * g_sd / 10.0 ** (snr_db / 10.0)


@dataclass(eq=False)
class _EngineSpec:
    """Everything a worker needs to process one block (picklable).

    Carries ``p_s``/``p_r`` directly so it can stand in for the precoder
    pair when computing gains.
    """

    seed: int
    shapes: tuple  # per-link (n_rx, n_tx)
    colors: tuple  # per-link (sqrt(pl) * Lr_half, Lt_half)
    p_s: np.ndarray
    p_r: np.ndarray
    n1: int
    n0: float
    d_thresh: float
    ser: SerModel
    protocol: ProtocolKind


def _engine_spec(cfg, pp, protocol, n0, seed):
    corr = link_correlations(cfg)
    pl = link_path_losses(cfg)
    colors = []
    shapes = []
    for link in ("SD", "SR", "RD"):
        lr_half, lt_half = corr[link].sqrt_factors()
        colors.append((np.sqrt(pl[link]) * lr_half, lt_half))
        shapes.append((corr[link].n_rx, corr[link].n_tx))
    return _EngineSpec(
        seed=seed,
        shapes=tuple(shapes),
        colors=tuple(colors),
        p_s=pp.p_s,
        p_r=pp.p_r,
        n1=cfg.n1,
        n0=n0,
        d_thresh=cfg.d_thresh,
        ser=_ser_model(cfg),
        protocol=protocol,
    )


def _run_block(args):
    """Counts for one block: int64 [c_a1, c_a2, c_a3, o_11, o_12, ..., o_32]."""
    spec, block, rows = args
    rng = np.random.default_rng(
        np.random.SeedSequence(spec.seed, spawn_key=(_BLOCK_SPAWN_NS, block))
    )
    h = []
    for (n_rx, n_tx), (color_r, color_t) in zip(spec.shapes, spec.colors):
        g = complex_gaussian(rng, (rows, n_rx, n_tx))
        h.append(color_r @ g @ color_t.T)
    h_sd, h_sr, h_rd = h

    gains = batch_gains(h_sd, h_sr, h_rd, spec, spec.n1)
    codes, out1, out2 = evaluate_protocol(
        spec.protocol, gains, spec.n0, spec.d_thresh, spec.ser
    )
    counts = np.zeros(9, dtype=np.int64)
    if codes is None:
        counts[0] = rows
        counts[3] = np.count_nonzero(out1)
        counts[4] = np.count_nonzero(out2)
    else:
        for k in range(3):
            mask = codes == k
            counts[k] = np.count_nonzero(mask)
            counts[3 + 2 * k] = np.count_nonzero(out1 & mask)
            counts[4 + 2 * k] = np.count_nonzero(out2 & mask)
    return counts


def estimate_outage(cfg, pp, protocol, trials=None, seed=None, workers=None, snr_db=None, n0=None):
    """Estimate per-stream / per-case / average outage by simulation.

    The operating point defaults to the first SNR of the configured sweep;
    pass ``snr_db`` or a raw ``n0`` to override. Results are bit-identical
    for fixed (config, seed, trials) regardless of ``workers``.
    """
    trials = cfg.trials if trials is None else int(trials)
    seed = cfg.seed if seed is None else int(seed)
    workers = cfg.workers if workers is None else int(workers)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if isinstance(protocol, str):
        protocol = ProtocolKind[protocol.upper()]
    if n0 is None:
        n0 = n0_for_snr(cfg, cfg.snr_db[0] if snr_db is None else snr_db)
    if n0 <= 0:
        raise ValueError("noise power must be positive")

    spec = _engine_spec(cfg, pp, protocol, n0, seed)
    return _estimate_with_spec(spec, protocol, trials, workers)


def _estimate_with_spec(spec, protocol, trials, workers):
    tasks = []
    start = 0
    block = 0
    while start < trials:
        rows = min(BLOCK, trials - start)
        tasks.append((spec, block, rows))
        start += rows
        block += 1

    if workers > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=workers) as pool:
            partial = pool.map(_run_block, tasks)
    else:
        partial = [_run_block(t) for t in tasks]
    counts = np.sum(partial, axis=0)
    return _summarize(counts, trials, protocol)


def _summarize(counts, trials, protocol):
    case_counts = counts[:3]
    outs = counts[3:].reshape(3, 2)
    stream_counts = outs.sum(axis=0)
    p_stream = stream_counts / trials
    p_avg = float(stream_counts.sum() / (2.0 * trials))
    std_err = float(np.sqrt(p_avg * (1.0 - p_avg) / trials))
    per_case = protocol in (ProtocolKind.PDF, ProtocolKind.PDF_NON_ORTHOGONAL)
    if per_case:
        case_prob = tuple(float(c) / trials for c in case_counts)
        cond = tuple(
            tuple(float(outs[k, i]) / case_counts[k] if case_counts[k] else 0.0 for i in range(2))
            for k in range(3)
        )
    else:
        case_prob = None
        cond = None
    return OutageEstimate(
        p_out_avg=p_avg,
        p_out_stream=(float(p_stream[0]), float(p_stream[1])),
        stream_counts=(int(stream_counts[0]), int(stream_counts[1])),
        case_prob=case_prob,
        case_counts=tuple(int(c) for c in case_counts) if per_case else None,
        p_out_cond=cond,
        trials=int(trials),
        std_err=std_err,
    )


@dataclass(eq=False)
class SweepRow:
    """One (SNR, protocol, mode) result."""

    snr_db: float
    protocol: ProtocolKind
    mode: str
    estimate: OutageEstimate
    n0: float
    split: precoder_mod.PowerSplit
    stream_split: precoder_mod.StreamSplit


def _pair_for_mode(cfg, n0, mode, protocol, trials, seed, workers):
    p0 = cfg.p0
    if mode == "nonadaptive":
        return precoder_mod.nonadaptive_pair(cfg, seed)
    if mode == "per_node":
        split = precoder_mod.PowerSplit(cfg.alpha_s, cfg.alpha_r).check_budget(p0)
        return precoder_mod.statistical_pair(cfg, n0, split, protocol)
    if mode == "disjoint":
        split = precoder_mod.PowerSplit(p0 / 2.0, p0 / 2.0)
        return precoder_mod.statistical_pair(cfg, n0, split, protocol)
    if mode == "proposed":
        if protocol is ProtocolKind.NO_RELAY:
            split = precoder_mod.PowerSplit(p0, 0.0)
        else:
            def evaluator(alpha_s, alpha_r):
                pair = precoder_mod.statistical_pair(
                    cfg, n0, precoder_mod.PowerSplit(alpha_s, alpha_r), protocol
                )
                est = estimate_outage(
                    cfg, pair, protocol, trials=trials, seed=seed, workers=workers, n0=n0
                )
                return est.p_out_avg

            split = precoder_mod.master_power_split(p0, evaluator)
        return precoder_mod.statistical_pair(cfg, n0, split, protocol)
    raise ValueError(f"unknown precoder mode {mode!r}")


def sweep_snr(cfg, snr_points_db=None, protocols=None, mode=None, trials=None, seed=None, workers=None):
    """Outage-vs-SNR sweep for the requested protocols under one mode.

    Every estimate at a given SNR shares the same substreams (common random
    numbers), so protocol and mode comparisons are paired; where the mode
    calls for a power-split search it is re-run at each SNR point with the
    same pairing.
    """
    snr_points = cfg.snr_db if snr_points_db is None else tuple(snr_points_db)
    protocols = cfg.protocols if protocols is None else tuple(protocols)
    mode = cfg.mode if mode is None else mode
    trials = cfg.trials if trials is None else int(trials)
    seed = cfg.seed if seed is None else int(seed)
    workers = cfg.workers if workers is None else int(workers)

    rows = []
    for snr_db in snr_points:
        n0 = n0_for_snr(cfg, snr_db)
        for protocol in protocols:
            if isinstance(protocol, str):
                protocol = ProtocolKind[protocol.upper()]
            pair = _pair_for_mode(cfg, n0, mode, protocol, trials, seed, workers)
            est = estimate_outage(
                cfg, pair, protocol, trials=trials, seed=seed, workers=workers, n0=n0
            )
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    protocol=protocol,
                    mode=mode,
                    estimate=est,
                    n0=n0,
                    split=pair.split,
                    stream_split=pair.stream_split,
                )
            )
    return rows
