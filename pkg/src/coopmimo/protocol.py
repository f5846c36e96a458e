"""Per-realization protocol logic.

Everything downstream of the channel draw is scalar arithmetic on five
effective stream gains: the squared norms of the precoded column blocks on
each link.  Decoding success is an outage test — a stream is decodable iff
its post-SIC SINR clears the threshold ``d = 2^(L/T) - 1`` — so no symbol
waveforms are ever generated.  Residual interference after cancelling an
incorrectly decoded stream is modeled with the standard 4*eps bound, eps
being the symbol error rate of the stream that was cancelled.

All formulas are written as numpy ufunc expressions so they accept either
scalars (the public per-realization API) or equal-length arrays (the Monte
Carlo engine's batched path).
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

SER_CLAMP = 1e-12
_TINY = 1e-300  # division guard for zero denominators


class ProtocolKind(enum.Enum):
    PDF = "PDF"
    DF = "DF"
    AF = "AF"
    NO_RELAY = "NO_RELAY"
    PDF_NON_ORTHOGONAL = "PDF_NON_ORTHOGONAL"


class PdfCase(enum.Enum):
    """Relay behaviour in the cooperative phase.

    A1: relay decoded stream 1 and forwards it.
    A2: relay failed stream 1 but decoded stream 2 and forwards that.
    A3: relay decoded neither stream and stays silent.
    """

    A1 = "A1"
    A2 = "A2"
    A3 = "A3"


_CASE_BY_CODE = (PdfCase.A1, PdfCase.A2, PdfCase.A3)


@dataclass(frozen=True)
class StreamGains:
    """Squared norms of the precoded sub-channels for one realization.

    l_sr1/l_sr2: source->relay gains of the two stream blocks
    l_rd: relay->destination gain of the forwarded stream
    l_sd1/l_sd2: direct source->destination gains of the two stream blocks
    """

    l_sr1: float
    l_sr2: float
    l_rd: float
    l_sd1: float
    l_sd2: float


@dataclass(frozen=True)
class SerModel:
    """Symbol-error-rate model used for the 4*eps interference bounds.

    mode "from_sinr" evaluates the modulation's SER curve at the
    instantaneous SINR of the stream being cancelled; mode "fixed" uses a
    constant (analysis aid).
    """

    modulation: str = "qpsk"
    mode: str = "from_sinr"
    fixed_value: float | None = None

    def __post_init__(self):
        if self.modulation not in ("qpsk", "16qam"):
            raise ValueError(f"unknown modulation {self.modulation!r}")
        if self.mode not in ("from_sinr", "fixed"):
            raise ValueError(f"unknown SER mode {self.mode!r}")
        if self.mode == "fixed":
            if self.fixed_value is None or not 0.0 < self.fixed_value < 1.0:
                raise ValueError("fixed SER mode needs a value in (0, 1)")

    def ser(self, gamma):
        if self.mode == "fixed":
            return np.full(np.shape(gamma), self.fixed_value)
        return ser_from_sinr(gamma, self.modulation)


def ser_from_sinr(gamma, modulation="qpsk"):
    """Symbol error rate of a Gray-coded constellation at SINR ``gamma``.

    QPSK: 2Q - Q^2 with Q = Q(sqrt(gamma)); 16-QAM: 1 - (1 - 3/2 Q(sqrt(g/5)))^2.
    Clamped into [1e-12, 1 - 1e-12] so the 4*eps terms never vanish or
    saturate exactly.
    """
    gamma = np.asarray(gamma, dtype=float)
    if modulation == "qpsk":
        e = erfc(np.sqrt(gamma / 2.0))  # = 2 Q(sqrt(gamma))
        ser = e - 0.25 * e * e
    elif modulation == "16qam":
        p = 0.75 * erfc(np.sqrt(gamma / 10.0))  # per-dimension PAM error
        ser = 1.0 - (1.0 - p) ** 2
    else:
        raise ValueError(f"unknown modulation {modulation!r}")
    return np.clip(ser, SER_CLAMP, 1.0 - SER_CLAMP)


def _sinr(num, den):
    return num / np.maximum(den, _TINY)


def mi_stream1_sr(g, n0):
    """Listening-phase mutual information of stream 1 at the relay (bits)."""
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    return np.log2(1.0 + _sinr(g.l_sr1, g.l_sr2 + n0))


def mi_stream2_sr(g, n0, eps_r, stream1_correct):
    """Listening-phase mutual information of stream 2 at the relay (bits).

    After a correct stream-1 decision the interference is fully cancelled;
    after an incorrect one a residual 4*eps_r*l_sr1 power remains.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    clean = np.log2(1.0 + _sinr(g.l_sr2, n0))
    residual = np.log2(1.0 + _sinr(g.l_sr2, 4.0 * eps_r * g.l_sr1 + n0))
    return np.where(stream1_correct, clean, residual)


def effective_gains(ch, pp, n1):
    """Five squared Frobenius norms of the precoded sub-channels."""
    p1 = pp.p_s[:, :n1]
    p2 = pp.p_s[:, n1:]
    if ch.h_sr.shape[1] != pp.p_s.shape[0] or ch.h_rd.shape[1] != pp.p_r.shape[0]:
        raise ValueError("channel/precoder dimensions do not match")

    def sq(m):
        return float(np.sum(np.abs(m) ** 2))

    return StreamGains(
        l_sr1=sq(ch.h_sr @ p1),
        l_sr2=sq(ch.h_sr @ p2),
        l_rd=sq(ch.h_rd @ pp.p_r),
        l_sd1=sq(ch.h_sd @ p1),
        l_sd2=sq(ch.h_sd @ p2),
    )


def batch_gains(h_sd, h_sr, h_rd, pp, n1):
    """StreamGains with array fields for stacked channel draws (B, rx, tx)."""
    p1 = pp.p_s[:, :n1]
    p2 = pp.p_s[:, n1:]

    def sq(h, p):
        prod = h @ p  # (B, rx, cols)
        return np.sum(prod.real**2 + prod.imag**2, axis=(1, 2))

    return StreamGains(
        l_sr1=sq(h_sr, p1),
        l_sr2=sq(h_sr, p2),
        l_rd=sq(h_rd, pp.p_r),
        l_sd1=sq(h_sd, p1),
        l_sd2=sq(h_sd, p2),
    )


# ---------------------------------------------------------------------------
# case classification and per-protocol outage indicators
# ---------------------------------------------------------------------------


def _classify(g, n0, d, ser):
    """Vectorized case split; returns (codes 0/1/2, eps_r array)."""
    gamma1 = _sinr(g.l_sr1, g.l_sr2 + n0)
    decodes_s1 = gamma1 >= d
    eps_r = ser.ser(gamma1)
    gamma2_residual = _sinr(g.l_sr2, 4.0 * eps_r * g.l_sr1 + n0)
    decodes_s2_after_miss = gamma2_residual >= d
    codes = np.where(decodes_s1, 0, np.where(decodes_s2_after_miss, 1, 2))
    return codes, eps_r


def classify_pdf_case(g, n0, d_thresh, ser, rng=None):
    """Which stream (if any) the relay forwards for one realization.

    Deterministic given the gains and the SER model: decoding success is the
    outage test itself, never a coin flip.  ``rng`` is accepted for signature
    stability and ignored.  Returns the case and the eps_r value used in the
    stream-2 retry test.
    """
    codes, eps_r = _classify(g, float(n0), float(d_thresh), ser)
    return _CASE_BY_CODE[int(codes)], float(eps_r)


def _combining_sinr(l_direct, l_relay, interference, n0):
    # coherent combining of the listening and cooperative phase copies:
    # amplitude gains add, noise is collected over both phases
    num = (np.sqrt(l_direct) + np.sqrt(l_relay)) ** 2
    return _sinr(num, interference + 2.0 * n0)


def _case1_indicators(g, n0, d, ser, repeat_interference=False):
    # relay forwards stream 1; optional extra term models the source
    # repeating its transmission in the cooperative phase
    interf = 2.0 * g.l_sd2 if repeat_interference else g.l_sd2
    gamma_coop = _combining_sinr(g.l_sd1, g.l_rd, interf, n0)
    out1 = gamma_coop < d
    eps = ser.ser(gamma_coop)
    out2_after_miss = _sinr(g.l_sd2, 4.0 * eps * g.l_sd1 + n0) < d
    out2_clean = _sinr(g.l_sd2, n0) < d
    return out1, np.where(out1, out2_after_miss, out2_clean)


def _case2_indicators(g, n0, d, ser, repeat_interference=False):
    # mirror image: relay forwards stream 2, destination decodes it first
    interf = 2.0 * g.l_sd1 if repeat_interference else g.l_sd1
    gamma_coop = _combining_sinr(g.l_sd2, g.l_rd, interf, n0)
    out2 = gamma_coop < d
    eps = ser.ser(gamma_coop)
    out1_after_miss = _sinr(g.l_sd1, 4.0 * eps * g.l_sd2 + n0) < d
    out1_clean = _sinr(g.l_sd1, n0) < d
    return np.where(out2, out1_after_miss, out1_clean), out2


def _case3_indicators(g, n0, d, ser):
    # silent relay: plain two-stream SIC on the direct link
    gamma1 = _sinr(g.l_sd1, g.l_sd2 + n0)
    out1 = gamma1 < d
    eps = ser.ser(gamma1)
    out2_after_miss = _sinr(g.l_sd2, 4.0 * eps * g.l_sd1 + n0) < d
    out2_clean = _sinr(g.l_sd2, n0) < d
    return out1, np.where(out1, out2_after_miss, out2_clean)


def _select_by_case(codes, branches):
    out1 = np.where(codes == 0, branches[0][0], np.where(codes == 1, branches[1][0], branches[2][0]))
    out2 = np.where(codes == 0, branches[0][1], np.where(codes == 1, branches[1][1], branches[2][1]))
    return out1, out2


def _pdf_eval(g, n0, d, ser, repeat_interference=False):
    codes, _ = _classify(g, n0, d, ser)
    branches = (
        _case1_indicators(g, n0, d, ser, repeat_interference),
        _case2_indicators(g, n0, d, ser, repeat_interference),
        _case3_indicators(g, n0, d, ser),
    )
    out1, out2 = _select_by_case(codes, branches)
    return codes, out1, out2


def pdf_outage_indicators(case, g, n0, d_thresh, ser):
    """Per-stream outage flags for one realization in the given case."""
    n0 = float(n0)
    d = float(d_thresh)
    if case is PdfCase.A1:
        out1, out2 = _case1_indicators(g, n0, d, ser)
    elif case is PdfCase.A2:
        out1, out2 = _case2_indicators(g, n0, d, ser)
    else:
        out1, out2 = _case3_indicators(g, n0, d, ser)
    return bool(out1), bool(out2)


def no_relay_outage_indicators(g, n0, d_thresh, ser):
    """Direct-link-only outage flags (identical to the silent-relay case)."""
    out1, out2 = _case3_indicators(g, float(n0), float(d_thresh), ser)
    return bool(out1), bool(out2)


def pdf_nonorthogonal_outage_indicators(g, n0, d_thresh, ser):
    """PDF variant where the source also transmits in the cooperative phase.

    The repeated transmission doubles the cross-stream interference seen by
    the combined cooperative stream; everything else matches the orthogonal
    protocol.
    """
    n0 = float(n0)
    d = float(d_thresh)
    codes, _ = _classify(g, n0, d, ser)
    case = _CASE_BY_CODE[int(codes)]
    if case is PdfCase.A1:
        out1, out2 = _case1_indicators(g, n0, d, ser, repeat_interference=True)
    elif case is PdfCase.A2:
        out1, out2 = _case2_indicators(g, n0, d, ser, repeat_interference=True)
    else:
        out1, out2 = _case3_indicators(g, n0, d, ser)
    return bool(out1), bool(out2)


def _df_eval(g, n0, d, ser):
    gamma1 = _sinr(g.l_sr1, g.l_sr2 + n0)
    # the relay forwards only when its sequential SIC clears both streams
    forwards = (gamma1 >= d) & (_sinr(g.l_sr2, n0) >= d)

    combined1 = _combining_sinr(g.l_sd1, g.l_rd, g.l_sd2, n0)
    out1_fwd = combined1 < d
    eps = ser.ser(combined1)
    s1_power = (np.sqrt(g.l_sd1) + np.sqrt(g.l_rd)) ** 2
    num2 = (np.sqrt(g.l_sd2) + np.sqrt(g.l_rd)) ** 2
    out2_clean = _sinr(num2, 2.0 * n0) < d
    out2_after_miss = _sinr(num2, 4.0 * eps * s1_power + 2.0 * n0) < d
    out2_fwd = np.where(out1_fwd, out2_after_miss, out2_clean)

    out1_silent, out2_silent = _case3_indicators(g, n0, d, ser)
    out1 = np.where(forwards, out1_fwd, out1_silent)
    out2 = np.where(forwards, out2_fwd, out2_silent)
    return forwards, out1, out2


def df_outage_indicators(g, n0, d_thresh, ser):
    """Outage flags under all-or-nothing decode-and-forward relaying."""
    _, out1, out2 = _df_eval(g, float(n0), float(d_thresh), ser)
    return bool(out1), bool(out2)


def _af_cascade(gamma_a, gamma_b):
    # end-to-end SINR of a noisy two-hop amplify chain; <= min of the hops
    return gamma_a * gamma_b / (gamma_a + gamma_b + 1.0)


def _af_eval(g, n0, d):
    gamma_rd = g.l_rd / n0
    direct1 = _sinr(g.l_sd1, g.l_sd2 + n0)
    relayed1 = _af_cascade(_sinr(g.l_sr1, g.l_sr2 + n0), gamma_rd)
    out1 = (direct1 + relayed1) < d

    # stream 2 with stream 1 cancelled (clean) or fully present (missed);
    # the amplifying relay never decodes, so a missed stream 1 keeps its
    # whole power in both the direct and the relayed leg
    direct2_clean = _sinr(g.l_sd2, n0)
    relayed2_clean = _af_cascade(_sinr(g.l_sr2, n0), gamma_rd)
    direct2_miss = _sinr(g.l_sd2, g.l_sd1 + n0)
    relayed2_miss = _af_cascade(_sinr(g.l_sr2, g.l_sr1 + n0), gamma_rd)
    total2 = np.where(out1, direct2_miss + relayed2_miss, direct2_clean + relayed2_clean)
    return out1, total2 < d


def af_outage_indicators(g, n0, d_thresh):
    """Outage flags under amplify-and-forward relaying."""
    out1, out2 = _af_eval(g, float(n0), float(d_thresh))
    return bool(out1), bool(out2)


def evaluate_protocol(protocol, g, n0, d, ser):
    """Batched dispatch: (case codes or None, out1, out2) as arrays."""
    if protocol is ProtocolKind.PDF:
        return _pdf_eval(g, n0, d, ser)
    if protocol is ProtocolKind.PDF_NON_ORTHOGONAL:
        return _pdf_eval(g, n0, d, ser, repeat_interference=True)
    if protocol is ProtocolKind.DF:
        _, out1, out2 = _df_eval(g, n0, d, ser)
        return None, out1, out2
    if protocol is ProtocolKind.AF:
        out1, out2 = _af_eval(g, n0, d)
        return None, out1, out2
    if protocol is ProtocolKind.NO_RELAY:
        out1, out2 = _case3_indicators(g, n0, d, ser)
        return None, out1, out2
    raise ValueError(f"unknown protocol {protocol!r}")
