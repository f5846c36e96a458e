"""Channel model: correlation structure, path loss, reproducible sampling."""

import numpy as np
import pytest

from coopmimo.channel import (
    ChannelRealization,
    LinkCorrelation,
    Topology,
    complex_gaussian,
    exp_correlation,
    link_correlations,
    link_path_losses,
    path_loss_db,
    path_loss_linear,
    realization_rng,
    sample_channel,
    sample_realization,
)
from coopmimo.mathcore import hermitian_eig


def test_exp_correlation_structure():
    m = exp_correlation(4, 0.5)
    assert m[0, 0] == 1.0
    assert m[0, 3] == pytest.approx(0.125)
    np.testing.assert_array_equal(m, m.T)
    np.testing.assert_array_equal(exp_correlation(3, 0.0), np.eye(3))


def test_exp_correlation_spectrum_pinned():
    # the 4-antenna, 0.5-coefficient spectrum feeds every precoder default.
    # 1 and 3/8 are exact roots (checked by hand with rational arithmetic);
    # the other two are 21/16 +- sqrt((21/16)^2 - 9/8)
    _, sigma = hermitian_eig(exp_correlation(4, 0.5))
    np.testing.assert_allclose(sigma, [2.0855823, 1.0, 0.5394177, 0.375], rtol=1e-6)
    assert sigma.sum() == pytest.approx(4.0)


def test_exp_correlation_rejects_bad_rho():
    with pytest.raises(ValueError):
        exp_correlation(4, 1.0)
    with pytest.raises(ValueError):
        exp_correlation(4, -0.1)


def test_path_loss_pinned_values():
    # SD/RD share the steeper distance exponent; SR sees the milder one
    assert path_loss_db(0.5, "SD") == pytest.approx(-43.369, abs=1e-3)
    assert path_loss_linear(0.5, "SD") == pytest.approx(4.6035e-5, rel=1e-3)
    assert path_loss_linear(0.3, "RD") == pytest.approx(2.1313e-4, rel=1e-3)
    assert path_loss_linear(0.4, "SR") == pytest.approx(6.2360e-5, rel=1e-3)


def test_path_loss_rejects_bad_input():
    with pytest.raises(ValueError):
        path_loss_db(0.0, "SD")
    with pytest.raises(ValueError):
        path_loss_db(1.0, "XX")


def test_complex_gaussian_unit_variance(rng):
    z = complex_gaussian(rng, (100_000,))
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, rel=0.02)
    assert np.abs(np.mean(z)) < 0.02


def test_sample_channel_shape_and_determinism():
    corr = LinkCorrelation(exp_correlation(4, 0.5), exp_correlation(2, 0.5))
    h1 = sample_channel(corr, 1e-4, np.random.default_rng(5))
    h2 = sample_channel(corr, 1e-4, np.random.default_rng(5))
    assert h1.shape == (2, 4)
    np.testing.assert_array_equal(h1, h2)
    with pytest.raises(ValueError):
        sample_channel(corr, 0.0, np.random.default_rng(5))


def test_sample_channel_second_moment(rng):
    # uncorrelated antennas: each entry is CN(0, pl)
    corr = LinkCorrelation(np.eye(3), np.eye(2))
    pl = 0.25
    draws = np.stack([sample_channel(corr, pl, rng) for _ in range(20_000)])
    np.testing.assert_allclose(np.mean(np.abs(draws) ** 2, axis=0), pl, rtol=0.05)


def test_realization_rng_substreams():
    a1 = realization_rng(3, 5).standard_normal(4)
    a2 = realization_rng(3, 5).standard_normal(4)
    b = realization_rng(3, 6).standard_normal(4)
    np.testing.assert_array_equal(a1, a2)
    assert not np.array_equal(a1, b)


def test_sample_realization_shapes_and_replay(cfg):
    ch = sample_realization(cfg, realization_rng(9, 0))
    assert ch.h_sd.shape == (cfg.n_d, cfg.n_s)
    assert ch.h_sr.shape == (cfg.n_r, cfg.n_s)
    assert ch.h_rd.shape == (cfg.n_d, cfg.n_r)
    again = sample_realization(cfg, realization_rng(9, 0))
    np.testing.assert_array_equal(ch.h_sd, again.h_sd)
    np.testing.assert_array_equal(ch.h_rd, again.h_rd)


def test_link_maps_cover_all_links(cfg):
    corr = link_correlations(cfg)
    pl = link_path_losses(cfg)
    assert set(corr) == set(pl) == {"SD", "SR", "RD"}
    assert corr["SR"].n_tx == cfg.n_s
    assert corr["SR"].n_rx == cfg.n_r
    assert pl["SR"] > pl["SD"]  # shorter hop with milder exponent


def test_link_correlation_validation():
    with pytest.raises(ValueError, match="diagonal"):
        LinkCorrelation(2.0 * np.eye(2), np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        Topology(d_sr_km=0.0, d_rd_km=0.3, d_sd_km=0.5)


def test_vec_covariance_is_kronecker(rng):
    # cov(vec H) = pl * (Lt kron Lr); quick 3x2 check, the acceptance suite
    # repeats this at the default sizes with a tight sample budget
    lt, lr = exp_correlation(3, 0.6), exp_correlation(2, 0.4)
    corr = LinkCorrelation(lt, lr)
    pl = 0.5
    n = 40_000
    vecs = np.empty((n, 6), dtype=complex)
    for i in range(n):
        h = sample_channel(corr, pl, rng)
        vecs[i] = h.T.ravel()  # stack columns
    emp = vecs.T @ vecs.conj() / n
    target = pl * np.kron(lt, lr)
    rel = np.linalg.norm(emp - target) / np.linalg.norm(target)
    assert rel < 0.1
