import numpy as np
import pytest

from risimg import crlb as crlb_mod
from risimg.channel import pairwise_distances
from risimg.forward import SceneFactors, build_sensing_matrix
from risimg.recovery import RankError
from risimg.risconfig import PRIS, draw_schedule
from risimg.scene import build_scene, default_config

from conftest import small_config


@pytest.fixture
def scene():
    return build_scene(small_config())


def test_crlb_voxel_from_column_norm(scene):
    sched = draw_schedule(4, scene, PRIS, seed=3)
    mat = build_sensing_matrix(scene, sched)
    gamma = 2.5e13
    n = 5
    norm2 = np.sum(np.abs(mat.entries[:, n]) ** 2)
    assert crlb_mod.crlb_voxel(mat.entries, n, gamma) == pytest.approx(1.0 / (gamma * norm2), rel=1e-12)


def test_crlb_voxel_blind():
    entries = np.zeros((4, 3), dtype=complex)
    entries[:, 0] = 1.0
    assert crlb_mod.crlb_voxel(entries, 1, 1.0) == np.inf


def test_crlb_on_support_orthogonal_columns():
    # orthogonal columns: the joint bound reduces to the single-voxel bounds
    entries = np.zeros((6, 4), dtype=complex)
    entries[0, 0] = 2.0
    entries[1, 1] = 0.5
    entries[2, 2] = 1.0 + 1.0j
    gamma = 10.0
    bounds, avg = crlb_mod.crlb_on_support(entries[:, :3], [0, 1, 2], gamma)
    np.testing.assert_allclose(bounds, [1 / (gamma * 4.0), 1 / (gamma * 0.25), 1 / (gamma * 2.0)], rtol=1e-12)
    assert avg == pytest.approx(np.mean(bounds))


def test_crlb_on_support_rank_deficient():
    entries = np.ones((5, 2), dtype=complex)
    with pytest.raises(RankError):
        crlb_mod.crlb_on_support(entries, [0, 1], 1.0)


def test_eta_constant():
    scene = build_scene(default_config())
    # 64 pi^3 scaled by gain, gamma, aperture constant, and symbol count
    eta = crlb_mod._eta(scene, 1.0, 1.0, 1)
    assert eta * scene.g**2 == pytest.approx(1984.4017075391882, rel=1e-12)


def test_expected_crlb_factors_against_loops(scene):
    gamma, gain, K = 2.5e13, 1.0, 4
    n = 7
    value, (eta, kappa, mu) = crlb_mod.expected_crlb(scene, n, gain, gamma, K)
    voxel = scene.roi.voxel_center(n)
    # independent slow-path evaluation of both geometric factors
    kappa_ref = 1.0 / sum(1.0 / np.linalg.norm(voxel - p) ** 2 for p in scene.rx.positions)
    mu_inv = 0.0
    for panel in scene.ris:
        for elem in panel.element_positions:
            d_sv2 = np.linalg.norm(elem - voxel) ** 2
            for p in scene.tx.positions:
                mu_inv += 1.0 / (np.linalg.norm(p - elem) ** 2 * d_sv2)
    assert kappa == pytest.approx(kappa_ref, rel=1e-10)
    assert mu == pytest.approx(1.0 / mu_inv, rel=1e-10)
    assert value == pytest.approx(eta * kappa * mu, rel=1e-12)


def test_approx_factors_center_collapse(scene):
    gamma, gain, K = 2.5e13, 1.0, 4
    n = 3
    approx = crlb_mod.approx_expected_crlb(scene, n, gain, gamma, K)
    voxel = scene.roi.voxel_center(n)
    eta = crlb_mod._eta(scene, gain, gamma, K)
    kappa = np.linalg.norm(voxel - scene.rx.center) ** 2 / scene.n_rx
    mu_inv = sum(
        panel.n_elements
        * scene.n_tx
        / (np.linalg.norm(scene.tx.center - panel.center) ** 2 * np.linalg.norm(voxel - panel.center) ** 2)
        for panel in scene.ris
    )
    assert approx == pytest.approx(eta * kappa / mu_inv, rel=1e-10)


def test_active_gain_scales_bound(scene):
    gamma, K = 2.5e13, 4
    passive = crlb_mod.expected_crlb_map(scene, 1.0, gamma, K).values
    active = crlb_mod.expected_crlb_map(scene, 1e4, gamma, K).values
    np.testing.assert_allclose(active / passive, 1e-4, rtol=1e-12)


def test_monte_carlo_mean_matches_expectation():
    cfg = small_config(counts=(2, 2, 1), ris_side=8, n_symbols=64)
    scene = build_scene(cfg)
    gamma = 2.5e13
    factors = SceneFactors(scene)
    vals = []
    for s in range(300):
        sched = draw_schedule(64, scene, PRIS, seed=s)
        mat = build_sensing_matrix(scene, sched, factors=factors)
        vals.append(1.0 / (gamma * np.sum(np.abs(mat.entries) ** 2, axis=0)))
    vals = np.array(vals)
    closed = crlb_mod.expected_crlb_map(scene, 1.0, gamma, 64).values
    se = vals.std(axis=0, ddof=1) / np.sqrt(len(vals))
    assert np.all(np.abs(vals.mean(axis=0) - closed) < 4.0 * se)


def test_per_voxel_exact_map(scene):
    sched = draw_schedule(4, scene, PRIS, seed=1)
    mat = build_sensing_matrix(scene, sched)
    gamma = 1e12
    amap = crlb_mod.per_voxel_exact_map(mat, gamma, 1.0, 4)
    norms2 = np.sum(np.abs(mat.entries) ** 2, axis=0)
    np.testing.assert_allclose(amap.values, 1.0 / (gamma * norms2), rtol=1e-12)
    assert crlb_mod.mean_over_voxels(amap) == pytest.approx(np.mean(amap.values))


def test_placement_sweep_dispatch():
    cfg = small_config()
    rows = crlb_mod.placement_sweep(cfg, "d", 1.0, 1e12, 4, d_values=[20.0, 30.0], heights=[100.0])
    assert len(rows) == 2
    assert rows[0][0] == 20.0 and rows[0][1] == 100.0
    with pytest.raises(ValueError):
        crlb_mod.placement_sweep(cfg, "panel", 1.0, 1e12, 4)
