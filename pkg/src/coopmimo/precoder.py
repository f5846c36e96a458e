"""Precoders built from channel statistics, and the power-allocation searches.

Transmitters only know the per-link correlation matrices, so the precoders
are built from those alone: each node whitens ("equalizes") its link's
transmit-side correlation spectrum, which minimizes the condition number of
the effective correlation and thereby the tail of the worst eigen-direction.
On top of the closed forms sit two scalar searches: the per-stream power
split rho (minimizing an upper bound on the probability that the relay
decodes neither stream) and the master source/relay power split
(minimizing simulated outage directly).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .mathcore import floored_spectrum, hermitian_eig
from .protocol import ProtocolKind, ser_from_sinr

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PowerSplit:
    """Source/relay transmit power budgets (linear units)."""

    alpha_s: float
    alpha_r: float

    def __post_init__(self):
        if self.alpha_s < 0 or self.alpha_r < 0:
            raise ValueError("power budgets must be nonnegative")

    def check_budget(self, p0):
        if self.alpha_s + self.alpha_r > p0 + 1e-9:
            raise ValueError(
                f"alpha_s + alpha_r = {self.alpha_s + self.alpha_r} exceeds budget {p0}"
            )
        return self


@dataclass(frozen=True)
class StreamSplit:
    """Fraction of the source budget given to each stream block."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not (0.0 <= self.rho1 <= 1.0 and 0.0 <= self.rho2 <= 1.0):
            raise ValueError("stream fractions must lie in [0, 1]")
        if abs(self.rho1 + self.rho2 - 1.0) > 1e-12:
            raise ValueError("stream fractions must sum to 1")


EVEN_SPLIT = StreamSplit(0.5, 0.5)


@dataclass(eq=False)
class PrecoderPair:
    """Source and relay precoder matrices plus their power bookkeeping."""

    p_s: np.ndarray
    p_r: np.ndarray
    split: PowerSplit
    stream_split: StreamSplit

    def __post_init__(self):
        self.p_s = np.asarray(self.p_s, dtype=np.complex128)
        self.p_r = np.asarray(self.p_r, dtype=np.complex128)
        if np.sum(np.abs(self.p_s) ** 2) > self.split.alpha_s + 1e-9:
            raise ValueError("source precoder exceeds its power budget")
        if np.sum(np.abs(self.p_r) ** 2) > self.split.alpha_r + 1e-9:
            raise ValueError("relay precoder exceeds its power budget")


def relay_precoder(lambda_rd_t, alpha_r):
    """Correlation-equalizing relay precoder.

    P = sqrt(alpha_r / Tr(S^-1)) * conj(U) * S^(-1/2), with U S U^H the
    eigendecomposition of the RD transmit correlation.  Uses the full budget
    exactly and makes P^T Xi conj(P) a scaled identity (condition number 1).
    Eigenvalues below 1e-12 of the largest are floored before inversion.
    """
    if alpha_r < 0:
        raise ValueError("alpha_r must be nonnegative")
    u, sigma = hermitian_eig(lambda_rd_t)
    sigma = floored_spectrum(sigma)
    inv_sqrt = 1.0 / np.sqrt(sigma)
    scale = np.sqrt(alpha_r / np.sum(1.0 / sigma))
    return scale * (u.conj() * inv_sqrt)


def source_precoder(lambda_sr_t, alpha_s, split, n1):
    """Block-diagonal equalizing source precoder.

    The transmit correlation spectrum is split into the n1 strongest
    directions (stream 1) and the rest (stream 2); each block gets an
    inverse-square-root equalizer carrying its share of the budget
    (rho1 * alpha_s and rho2 * alpha_s).
    """
    if alpha_s < 0:
        raise ValueError("alpha_s must be nonnegative")
    u, sigma = hermitian_eig(lambda_sr_t)
    n = sigma.size
    if not 1 <= n1 <= n - 1:
        raise ValueError(f"n1 must be in [1, {n - 1}], got {n1}")
    sigma = floored_spectrum(sigma)
    inv_sqrt = 1.0 / np.sqrt(sigma)
    block_trace_inv = np.array(
        [np.sum(1.0 / sigma[:n1]), np.sum(1.0 / sigma[n1:])]
    )
    scale = np.concatenate(
        [
            np.full(n1, np.sqrt(split.rho1 / block_trace_inv[0])),
            np.full(n - n1, np.sqrt(split.rho2 / block_trace_inv[1])),
        ]
    )
    return np.sqrt(alpha_s) * (u.conj() * (scale * inv_sqrt))


# ---------------------------------------------------------------------------
# per-stream power split
# ---------------------------------------------------------------------------


def _log_bracket(lo_over_d, hi_over_d):
    # log( exp(-lo) - exp(-hi) ) for 0 <= lo < hi, computed stably;
    # -inf when the interval is empty
    gap = hi_over_d - lo_over_d
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(gap > 0.0, np.log(-np.expm1(-np.maximum(gap, 1e-300))), -np.inf)
    return -lo_over_d + tail


def _log_exp_piece(alpha, a, b):
    # log of int_a^b exp(-alpha k) dk for alpha > 0, 0 <= a < b (b may be inf)
    width = b - a
    if width <= 0.0:
        return -np.inf
    return -alpha * a + math.log(-math.expm1(-alpha * width)) - math.log(alpha)


def rho_objective_log(rho1, delta_tilde_1, delta_tilde_2, eps_r, d_thresh, n0, w1, w2):
    """Log of the silent-relay bound, integrated over the stream-2 gain.

    The bound is an exponential density in the stream-2 gain k times a
    window probability for the stream-1 gain whose edges are affine in k,
    so the k-integral is a sum of exponential integrals and evaluates in
    closed form.  The window's lower edge clamps to zero below k = n0*D,
    which keeps the bound strictly positive for any interior split; the
    value is reported up to split-independent constants.  Returns -inf
    where the bound vanishes (degenerate parameters).
    """
    rho1 = float(rho1)
    if not 0.0 < rho1 < 1.0:
        return np.inf
    rho2 = 1.0 - rho1
    mu = rho2 * delta_tilde_2
    d1 = rho1 * delta_tilde_1
    k0 = n0 * d_thresh
    slope_lo = 1.0 / (4.0 * eps_r * d_thresh * d1)
    slope_hi = d_thresh / d1
    off_hi = d_thresh / d1
    if slope_lo > slope_hi:
        k_dead = (off_hi + k0 * slope_lo) / (slope_lo - slope_hi)
    else:
        k_dead = math.inf
    inv_mu = 1.0 / mu
    # window fully open (lower edge at zero), k in [0, k0]
    log_a1 = _log_exp_piece(inv_mu, 0.0, k0)
    # sliding lower edge, k in [k0, k_dead]; the k0 offsets cancel into -k0/mu
    log_a2 = (
        -k0 * inv_mu + _log_exp_piece(inv_mu + slope_lo, 0.0, k_dead - k0)
    )
    # subtracted upper-edge term over the whole live range [0, k_dead]
    log_b = -off_hi + _log_exp_piece(inv_mu + slope_hi, 0.0, k_dead)
    log_pos = np.logaddexp(log_a1, log_a2)
    if not np.isfinite(log_pos):
        return -np.inf
    ratio = math.exp(log_b - log_pos) if log_b - log_pos < 0.0 else 1.0
    if ratio >= 1.0:
        return -np.inf
    log_integral = log_pos + math.log1p(-ratio)
    return -(w1 - 1) * math.log(rho1) - w2 * math.log(rho2) + log_integral


def rho_objective_log_at_k(rho1, k, delta_tilde_1, delta_tilde_2, eps_r, d_thresh, n0, w1, w2):
    """Log of the bound's integrand at a single fixed k (comparison mode)."""
    rho1 = float(rho1)
    if not 0.0 < rho1 < 1.0:
        return np.inf
    rho2 = 1.0 - rho1
    lo = max(k / (4.0 * eps_r * d_thresh) - n0 / (4.0 * eps_r), 0.0)
    hi = k * d_thresh + d_thresh
    d1 = rho1 * delta_tilde_1
    return (
        -(w1 - 1) * np.log(rho1)
        - w2 * np.log(rho2)
        - k / (rho2 * delta_tilde_2)
        + float(_log_bracket(np.float64(lo / d1), np.float64(hi / d1)))
    )


RHO_GRID = np.linspace(0.0, 1.0, 1003)[1:-1]  # 1001 uniform interior points


def optimize_rho(
    delta_tilde_1,
    delta_tilde_2,
    eps_r,
    d_thresh,
    n0,
    w1,
    w2,
    method="integrated",
):
    """Minimize the silent-relay bound over the stream power fraction.

    Evaluates the (log-domain) objective on a 1001-point uniform grid and
    refines around the best point with golden-section search, returning the
    better of the two — so the result is never worse than the grid minimum.
    """
    for name, val in (
        ("delta_tilde_1", delta_tilde_1),
        ("delta_tilde_2", delta_tilde_2),
        ("d_thresh", d_thresh),
        ("n0", n0),
    ):
        if val <= 0:
            raise ValueError(f"{name} must be positive")
    if not 0.0 < eps_r <= 0.5:
        raise ValueError("eps_r must lie in (0, 0.5]")
    if w1 < 1 or w2 < 1:
        raise ValueError("stream dimensions must be positive integers")

    if method == "integrated":
        def f(r):
            return rho_objective_log(r, delta_tilde_1, delta_tilde_2, eps_r, d_thresh, n0, w1, w2)
    elif method == "per_k":
        k_fix = 0.5 * delta_tilde_2  # even-split mean of the bounding density
        def f(r):
            return rho_objective_log_at_k(
                r, k_fix, delta_tilde_1, delta_tilde_2, eps_r, d_thresh, n0, w1, w2
            )
    else:
        raise ValueError(f"unknown rho method {method!r}")

    grid_vals = np.array([f(r) for r in RHO_GRID])
    finite = np.isfinite(grid_vals)
    if not finite.any():
        raise ValueError("stream-split objective is degenerate over the whole domain")
    i = int(np.argmin(np.where(finite, grid_vals, np.inf)))
    lo = RHO_GRID[max(i - 1, 0)]
    hi = RHO_GRID[min(i + 1, RHO_GRID.size - 1)]
    r_star, v_star = _golden_section(f, lo, hi, tol=1e-10)
    if grid_vals[i] < v_star:
        r_star, v_star = RHO_GRID[i], grid_vals[i]
    if not np.isfinite(v_star):
        raise ValueError("stream-split objective is degenerate at the optimum")
    return StreamSplit(float(r_star), float(1.0 - r_star))


def _golden_section(f, lo, hi, tol):
    """Golden-section minimization; returns (argmin, min) of the probes."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_v = (c, fc) if fc <= fd else (d, fd)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        if fc < best_v:
            best_x, best_v = c, fc
        if fd < best_v:
            best_x, best_v = d, fd
    return best_x, best_v


# ---------------------------------------------------------------------------
# master power split
# ---------------------------------------------------------------------------


def master_power_split(p0, outage_evaluator, grid_points=11, width_frac=1e-3):
    """Split the total budget between source and relay by direct search.

    ``outage_evaluator(alpha_s, alpha_r)`` must be deterministic for a fixed
    seed (common random numbers), otherwise the search chases noise.  The
    budget constraint is kept active (alpha_s = p0 - alpha_r): outage never
    increases with either node's power, so the optimum sits on the boundary.
    Evaluates a coarse validation grid on alpha_r, golden-sections between
    the neighbors of the grid minimum, and returns the best point seen.
    """
    if p0 <= 0:
        raise ValueError("p0 must be positive")
    seen = {}

    def f(alpha_r):
        alpha_r = min(max(float(alpha_r), 0.0), p0)
        if alpha_r not in seen:
            seen[alpha_r] = float(outage_evaluator(p0 - alpha_r, alpha_r))
        return seen[alpha_r]

    grid = np.linspace(0.0, p0, grid_points)
    vals = [f(a) for a in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]
    _golden_section(f, lo, hi, tol=width_frac * p0)
    best_alpha_r = min(seen, key=seen.get)
    return PowerSplit(p0 - best_alpha_r, best_alpha_r)


# ---------------------------------------------------------------------------
# design orchestration for the sweep modes
# ---------------------------------------------------------------------------


def haar_unitary(n, rng):
    """Haar-distributed random unitary via QR with phase fixing."""
    g = channel.complex_gaussian(rng, (n, n))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def nonadaptive_pair(cfg, seed):
    """Random unitary precoders with the budget split evenly between nodes."""
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(channel.AUX_SPAWN_KEY,))
    )
    u_s = haar_unitary(cfg.n_s, rng)
    u_r = haar_unitary(cfg.n_r, rng)
    half = cfg.p0 / 2.0
    rho1 = cfg.n1 / cfg.n_s  # unitary columns carry equal power
    return PrecoderPair(
        p_s=np.sqrt(half / cfg.n_s) * u_s,
        p_r=np.sqrt(half / cfg.n_r) * u_r,
        split=PowerSplit(half, half),
        stream_split=StreamSplit(rho1, 1.0 - rho1),
    )


def expected_stream_gain(pl, lambda_r, sigma_t_block, rho_i, alpha_s, n_i):
    """Mean precoded-block gain E||H P_i||^2 under the equalizing design."""
    trace_inv = np.sum(1.0 / sigma_t_block)
    return pl * np.trace(lambda_r).real * n_i * rho_i * alpha_s / trace_inv


def design_eps_r(cfg, n0, alpha_s):
    """Design-time relay SER estimate at the even-split expected SINR."""
    corr = channel.link_correlations(cfg)["SR"]
    pl = channel.link_path_losses(cfg)["SR"]
    _, sigma = hermitian_eig(corr.lambda_t)
    sigma = floored_spectrum(sigma)
    g1 = expected_stream_gain(pl, corr.lambda_r, sigma[: cfg.n1], 0.5, alpha_s, cfg.n1)
    g2 = expected_stream_gain(pl, corr.lambda_r, sigma[cfg.n1 :], 0.5, alpha_s, cfg.n2)
    gamma = g1 / (g2 + n0)
    return float(np.clip(ser_from_sinr(gamma, cfg.modulation), 1e-12, 0.5))


# protocols whose relay decodes a single stream; only these use the
# asymmetric split (the bound being minimized is specific to that behaviour)
_PARTIAL_FORWARD = (ProtocolKind.PDF, ProtocolKind.PDF_NON_ORTHOGONAL)


def stream_split_for(cfg, n0, alpha_s, protocol):
    """Per-stream power fractions used by the statistical design."""
    if protocol not in _PARTIAL_FORWARD or alpha_s <= 0:
        return EVEN_SPLIT
    corr = channel.link_correlations(cfg)["SR"]
    pl = channel.link_path_losses(cfg)["SR"]
    _, sigma_t = hermitian_eig(corr.lambda_t)
    sigma_t = floored_spectrum(sigma_t)
    _, sigma_r = hermitian_eig(corr.lambda_r)
    sig_max_r = pl * sigma_r[0]
    delta1 = sig_max_r * alpha_s / np.sum(1.0 / sigma_t[: cfg.n1])
    delta2 = sig_max_r * alpha_s / np.sum(1.0 / sigma_t[cfg.n1 :])
    try:
        return optimize_rho(
            delta1,
            delta2,
            design_eps_r(cfg, n0, alpha_s),
            cfg.d_thresh,
            n0,
            cfg.n_r * cfg.n1,
            cfg.n_r * cfg.n2,
            method=cfg.rho_method,
        )
    except ValueError:
        return EVEN_SPLIT  # degenerate bound (e.g. extreme SNR); even split


def statistical_pair(cfg, n0, split, protocol):
    """Equalizing precoders for both nodes under a given power split.

    Relay protocols aim the source design at the source->relay correlation;
    without a relay the direct link is the only design target.
    """
    corr = channel.link_correlations(cfg)
    source_link = "SD" if protocol is ProtocolKind.NO_RELAY else "SR"
    stream_split = stream_split_for(cfg, n0, split.alpha_s, protocol)
    p_s = source_precoder(corr[source_link].lambda_t, split.alpha_s, stream_split, cfg.n1)
    p_r = relay_precoder(corr["RD"].lambda_t, split.alpha_r)
    return PrecoderPair(p_s=p_s, p_r=p_r, split=split, stream_split=stream_split)
