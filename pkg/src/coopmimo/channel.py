"""Correlated Rayleigh channel sampling for the three links of the system.

Each link (source-destination, source-relay, relay-destination) is a separable
correlated Rayleigh MIMO channel: H = sqrt(pl) * Lr^{1/2} G (Lt^{1/2})^T with
G i.i.d. unit-variance complex Gaussian, Lt/Lr the transmit/receive antenna
correlation matrices and pl the linear path-loss gain.  Under this model
cov(vec H) = pl * (Lt kron Lr), which the tests check empirically.
"""

from dataclasses import dataclass

import numpy as np

from .mathcore import check_hermitian, hermitian_eig, psd_sqrt

# distinct spawn-key namespace so auxiliary draws (e.g. random unitary
# precoders) can never collide with a Monte Carlo block substream
AUX_SPAWN_KEY = 999_999_937


@dataclass(eq=False)
class LinkCorrelation:
    """Transmit/receive antenna correlation matrices for one link."""

    lambda_t: np.ndarray
    lambda_r: np.ndarray

    def __post_init__(self):
        self.lambda_t = _check_correlation(self.lambda_t, "lambda_t")
        self.lambda_r = _check_correlation(self.lambda_r, "lambda_r")

    @property
    def n_tx(self):
        return self.lambda_t.shape[0]

    @property
    def n_rx(self):
        return self.lambda_r.shape[0]

    def sqrt_factors(self):
        """(Lr^{1/2}, Lt^{1/2}) principal square roots, for sampling."""
        return psd_sqrt(self.lambda_r), psd_sqrt(self.lambda_t)


def _check_correlation(m, name):
    m = check_hermitian(m)
    if not np.allclose(np.diagonal(m).real, 1.0, atol=1e-9):
        raise ValueError(f"{name} must have unit diagonal")
    _, sigma = hermitian_eig(m)
    if sigma[-1] < -1e-9 * max(sigma[0], 1.0):
        raise ValueError(f"{name} is not positive semidefinite")
    return m


@dataclass(frozen=True)
class Topology:
    """Node geometry in km."""

    d_sr_km: float
    d_rd_km: float
    d_sd_km: float

    def __post_init__(self):
        for field in ("d_sr_km", "d_rd_km", "d_sd_km"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field} must be positive")


@dataclass(eq=False)
class ChannelRealization:
    """One draw of the three link matrices (path loss included)."""

    h_sd: np.ndarray
    h_sr: np.ndarray
    h_rd: np.ndarray


def exp_correlation(n, rho):
    """Exponential correlation matrix, entry (i, j) = rho^|i-j|.

    Single-knob model for a uniform linear array; always PSD for
    0 <= rho < 1.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    idx = np.arange(int(n))
    return np.asarray(rho, dtype=float) ** np.abs(idx[:, None] - idx[None, :])


def path_loss_db(d_km, link):
    """Distance-dependent path loss in dB for one link kind.

    The relay sits in a favourable position, so the SR link uses a smaller
    loss exponent (2.6) than the SD/RD links (3.0).
    """
    if d_km <= 0:
        raise ValueError("distance must be positive")
    if link == "SR":
        return -52.4 - 26.0 * np.log10(d_km)
    if link in ("SD", "RD"):
        return -52.4 - 30.0 * np.log10(d_km)
    raise ValueError(f"unknown link kind {link!r} (expected SR, SD or RD)")


def path_loss_linear(d_km, link):
    return 10.0 ** (path_loss_db(d_km, link) / 10.0)


def complex_gaussian(rng, shape):
    """i.i.d. CN(0, 1) array: real/imag parts N(0, 1/2) each."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return np.sqrt(0.5) * (re + 1j * im)


def sample_channel(corr, path_loss_lin, rng):
    """Draw one correlated channel matrix sqrt(pl) * Lr^{1/2} G (Lt^{1/2})^T."""
    if path_loss_lin <= 0:
        raise ValueError("path loss must be positive (linear gain)")
    lr_half, lt_half = corr.sqrt_factors()
    g = complex_gaussian(rng, (corr.n_rx, corr.n_tx))
    return np.sqrt(path_loss_lin) * (lr_half @ g @ lt_half.T)


def link_correlations(cfg):
    """Per-link LinkCorrelation set from a config."""
    return {
        "SD": LinkCorrelation(
            exp_correlation(cfg.n_s, cfg.rho_sd), exp_correlation(cfg.n_d, cfg.rho_sd)
        ),
        "SR": LinkCorrelation(
            exp_correlation(cfg.n_s, cfg.rho_sr), exp_correlation(cfg.n_r, cfg.rho_sr)
        ),
        "RD": LinkCorrelation(
            exp_correlation(cfg.n_r, cfg.rho_rd), exp_correlation(cfg.n_d, cfg.rho_rd)
        ),
    }


def link_path_losses(cfg):
    """Per-link linear path-loss gains from the topology."""
    return {
        "SD": path_loss_linear(cfg.d_sd_km, "SD"),
        "SR": path_loss_linear(cfg.d_sr_km, "SR"),
        "RD": path_loss_linear(cfg.d_rd_km, "RD"),
    }


def sample_realization(cfg, rng):
    """Draw one independent realization of all three links.

    One realization stands for one transmit interval; links are drawn in the
    fixed order SD, SR, RD so a given generator state always reproduces the
    same matrices.
    """
    corr = link_correlations(cfg)
    pl = link_path_losses(cfg)
    return ChannelRealization(
        h_sd=sample_channel(corr["SD"], pl["SD"], rng),
        h_sr=sample_channel(corr["SR"], pl["SR"], rng),
        h_rd=sample_channel(corr["RD"], pl["RD"], rng),
    )


def realization_rng(seed, index):
    """Independent substream for a single realization index.

    Uses a spawn-key derivation so that streams for different indices never
    overlap and do not depend on drawing order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
