import numpy as np
import pytest

import mmfm


def test_sym_eig_orders_and_reconstructs():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((5, 5))
    a = m @ m.T
    values, vectors = mmfm.sym_eig(a)
    assert np.all(np.diff(values) <= 1e-12)
    np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, a, atol=1e-9)


def test_thin_qr_and_ls_solve():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((6, 3))
    q, r = mmfm.thin_qr(a)
    np.testing.assert_allclose(q @ r, a, atol=1e-10)
    assert np.all(np.diag(r) > 0)

    z0 = rng.standard_normal((3, 2))
    z = mmfm.ls_solve(q, q @ z0)
    np.testing.assert_allclose(z, z0, atol=1e-10)


def test_varimax_keeps_orthogonal_rotation():
    rng = np.random.default_rng(2)
    loadings = rng.standard_normal((8, 2))
    rotated, rotation = mmfm.varimax(loadings)
    np.testing.assert_allclose(rotation.T @ rotation, np.eye(2), atol=1e-10)
    np.testing.assert_allclose(rotated, loadings @ rotation, atol=1e-12)


def test_estimate_rank_ratio_rule():
    ladder = np.array([100.0, 90.0, 0.001, 0.0008, 0.0007])
    assert mmfm.estimate_rank(ladder, 15) == 2


def test_parameter_count_reference_values():
    counts = mmfm.parameter_count(2, 2, 1, 1, 20, 8)
    assert counts["factors"] == 5
    assert counts["loading_params"] == 84
    assert counts["vectorized_loading_params"] == 800


def test_simulate_is_deterministic_and_well_shaped():
    panel, truth = mmfm.simulate(rows=10, cols=8, time_len=50, seed=7)
    again, _ = mmfm.simulate(rows=10, cols=8, time_len=50, seed=7)
    assert len(panel) == 3
    assert panel[0].shape == (50, 10, 8)
    for a, b in zip(panel, again):
        np.testing.assert_array_equal(a, b)
    assert truth["q1"][0].shape == (10, 3)


def test_fit_recovers_strong_loading_spaces():
    panel, truth = mmfm.simulate(rows=20, cols=20, time_len=800, seed=11)
    fit = mmfm.fit(panel, k1=3, k2=2, local_ranks=[(2, 2)])
    assert fit["k1"] == 3
    d = mmfm.subspace_distance(fit["q1"][0], truth["q1"][0])
    assert d < 0.1
    # The fitted pieces close the decomposition identity.
    x_hat = fit["psi"][0] + fit["phi"][0] + fit["residual"][0]
    np.testing.assert_allclose(x_hat, panel[0], atol=1e-10)


def test_w_statistic_and_subspace_distance():
    panel, _ = mmfm.simulate(rows=6, cols=5, time_len=40, seed=3)
    w1 = mmfm.compute_w1(panel, 0)
    assert w1.shape == (6, 6)
    np.testing.assert_allclose(w1, w1.T, atol=1e-12)
    values = np.linalg.eigvalsh(w1)
    assert values.min() > -1e-10 * np.abs(values).max()

    q = np.linalg.qr(np.random.default_rng(4).standard_normal((6, 2)))[0]
    assert mmfm.subspace_distance(q, q) < 1e-12


def test_rss_tss_perfect_fit():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((10, 3, 2))
    assert mmfm.rss_tss(x, x) == pytest.approx(1.0)
