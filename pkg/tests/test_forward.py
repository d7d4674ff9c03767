import numpy as np
import pytest

from risimg.forward import (
    MatrixSizeError,
    NoiseModel,
    SceneFactors,
    SensingMatrix,
    SparseImage,
    aris_noise_sample,
    build_sensing_matrix,
    draw_sparse_image,
    load_matrix,
    naive_path_gain,
    row_vector,
    save_matrix,
    synthesize_measurements,
)
from risimg.risconfig import ARIS, PRIS, draw_schedule
from risimg.scene import build_scene

from conftest import small_config


@pytest.fixture
def scene():
    return build_scene(small_config())


@pytest.fixture
def schedule(scene):
    return draw_schedule(4, scene, PRIS, seed=8)


def test_matrix_shape_and_row_order(scene, schedule):
    mat = build_sensing_matrix(scene, schedule)
    L = scene.n_tx * schedule.n_symbols * scene.n_ris * scene.n_rx
    assert mat.shape == (L, scene.n_voxels)
    # row <-> (i, k, t, j) is a bijection with j fastest
    assert mat.row_index(0, 0, 0, 1) == 1
    assert mat.row_index(0, 0, 1, 0) == scene.n_rx
    assert mat.row_index(0, 1, 0, 0) == scene.n_ris * scene.n_rx
    for row in range(L):
        assert mat.row_index(*mat.index_tuple(row)) == row
    with pytest.raises(IndexError):
        mat.row_index(scene.n_tx, 0, 0, 0)
    with pytest.raises(IndexError):
        mat.index_tuple(L)


def test_factored_matches_row_assembler(scene, schedule):
    mat = build_sensing_matrix(scene, schedule)
    rng = np.random.default_rng(0)
    for _ in range(20):
        i = int(rng.integers(scene.n_tx))
        k = int(rng.integers(schedule.n_symbols))
        t = int(rng.integers(scene.n_ris))
        j = int(rng.integers(scene.n_rx))
        row = row_vector(scene, schedule, i, k, t, j)
        np.testing.assert_allclose(mat.entries[mat.row_index(i, k, t, j)], row, rtol=1e-12)


def test_factored_matches_triple_product_oracle(scene, schedule):
    mat = build_sensing_matrix(scene, schedule)
    image = draw_sparse_image(scene.n_voxels, 3, seed=5)
    x = image.dense()
    rng = np.random.default_rng(1)
    for _ in range(10):
        i = int(rng.integers(scene.n_tx))
        k = int(rng.integers(schedule.n_symbols))
        t = int(rng.integers(scene.n_ris))
        j = int(rng.integers(scene.n_rx))
        oracle = naive_path_gain(scene, schedule, image, i, k, t, j)
        assert (mat.entries @ x)[mat.row_index(i, k, t, j)] == pytest.approx(oracle, rel=1e-10)


def test_cached_factors_reproduce_direct_build(scene, schedule):
    direct = build_sensing_matrix(scene, schedule)
    cached = build_sensing_matrix(scene, schedule, factors=SceneFactors(scene))
    np.testing.assert_array_equal(direct.entries, cached.entries)


def test_matrix_size_budget(scene, schedule):
    with pytest.raises(MatrixSizeError):
        build_sensing_matrix(scene, schedule, max_entries=10)


def test_sparse_image_validation():
    img = SparseImage(n_voxels=8, support=np.array([1, 5]), values=np.array([0.1, 0.2]))
    d = img.dense()
    assert d.shape == (8,)
    assert d[1] == 0.1 and d[5] == 0.2 and d.sum() == pytest.approx(0.3)
    assert img.sparsity == 2
    with pytest.raises(ValueError):
        SparseImage(n_voxels=8, support=np.array([1, 1]), values=np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        SparseImage(n_voxels=8, support=np.array([1, 8]), values=np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        SparseImage(n_voxels=8, support=np.array([1]), values=np.array([0.1, 0.2]))


def test_draw_sparse_image_statistics():
    imgs = [draw_sparse_image(1000, 10, seed=s) for s in range(200)]
    vals = np.concatenate([im.values for im in imgs])
    assert np.mean(vals) == pytest.approx(0.1, abs=0.01)
    assert np.std(vals) == pytest.approx(0.1, rel=0.1)
    for im in imgs:
        assert len(np.unique(im.support)) == 10
        assert np.all(np.diff(im.support) > 0)


def test_noise_model_effective_variance():
    nm = NoiseModel(sigma2_rx=1e-14, sigma2_ris=1e-14, p_tx=1.0, n_tx=4)
    assert nm.sigma2_eff == pytest.approx(4e-14, rel=1e-12)
    assert nm.gamma == pytest.approx(2.5e13, rel=1e-12)
    with pytest.raises(ValueError):
        NoiseModel(sigma2_rx=0.0, sigma2_ris=1e-14, p_tx=1.0, n_tx=4)


def test_noise_model_from_config(scene):
    cfg = small_config()
    nm = NoiseModel.from_config(cfg, scene)
    assert nm.sigma2_rx == pytest.approx(1e-14)
    assert nm.p_tx == pytest.approx(1.0)
    assert nm.n_tx == scene.n_tx


def test_synthesis_deterministic_and_noise_level(scene, schedule):
    mat = build_sensing_matrix(scene, schedule)
    image = draw_sparse_image(scene.n_voxels, 2, seed=3)
    nm = NoiseModel.from_config(small_config(), scene)
    a = synthesize_measurements(mat, image, nm, seed=9)
    b = synthesize_measurements(mat, image, nm, seed=9)
    np.testing.assert_array_equal(a.y, b.y)
    clean = mat.entries @ image.dense()
    resid = np.concatenate(
        [synthesize_measurements(mat, image, nm, seed=s).y - clean for s in range(40)]
    )
    var = np.mean(np.abs(resid) ** 2)
    expected = nm.sigma2_rx * nm.n_tx / nm.p_tx
    assert var == pytest.approx(expected, rel=0.1)


def test_active_synthesis_adds_amplifier_noise(scene):
    gain = 1e4
    pris = draw_schedule(4, scene, PRIS, seed=8)
    aris = draw_schedule(4, scene, ARIS, gain=gain, seed=8)
    mat = build_sensing_matrix(scene, aris)
    image = draw_sparse_image(scene.n_voxels, 2, seed=3)
    nm = NoiseModel.from_config(small_config(), scene)
    with pytest.raises(ValueError):
        synthesize_measurements(mat, image, nm, seed=1, schedule=aris)  # missing scene
    ms = synthesize_measurements(mat, image, nm, seed=1, scene=scene, schedule=aris)
    assert ms.mode == ARIS
    # the amplifier term is shared across transmit antennas: subtracting the
    # passive-path noise leaves identical residuals for every i at fixed (k, t, j)
    fac = SceneFactors(scene)
    ms_fac = synthesize_measurements(mat, image, nm, seed=1, scene=scene, schedule=aris, factors=fac)
    np.testing.assert_allclose(ms.y, ms_fac.y, rtol=1e-12)


def test_aris_noise_sample_scaling(scene):
    gain = 100.0
    sched = draw_schedule(3, scene, ARIS, gain=gain, seed=4)
    image = draw_sparse_image(scene.n_voxels, 3, seed=6)
    empty = SparseImage(n_voxels=scene.n_voxels, support=np.array([], dtype=int), values=np.array([]))
    assert aris_noise_sample(scene, sched, empty, 0, 0, 0, seed=1) == 0.0
    samples = [abs(aris_noise_sample(scene, sched, image, 0, 0, 0, seed=s)) ** 2 for s in range(300)]
    quadrupled = [
        abs(aris_noise_sample(scene, sched, image, 0, 0, 0, seed=s, sigma2_ris=4e-14)) ** 2
        for s in range(300)
    ]
    assert np.mean(quadrupled) / np.mean(samples) == pytest.approx(4.0, rel=1e-9)
    pris = draw_schedule(3, scene, PRIS, seed=4)
    from risimg.risconfig import ScheduleError

    with pytest.raises(ScheduleError):
        aris_noise_sample(scene, pris, image, 0, 0, 0, seed=1)


def test_matrix_save_load_roundtrip(tmp_path, scene, schedule):
    mat = build_sensing_matrix(scene, schedule)
    prefix = tmp_path / "mat"
    save_matrix(mat, prefix)
    loaded = load_matrix(prefix)
    np.testing.assert_array_equal(mat.entries, loaded.entries)
    assert loaded.n_tx == mat.n_tx
    assert loaded.n_symbols == mat.n_symbols
    assert loaded.scene_fingerprint == mat.scene_fingerprint
