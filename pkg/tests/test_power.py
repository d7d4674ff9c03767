import numpy as np
import pytest

from risimg.power import (
    PowerError,
    aris_active_power,
    dbm_to_watts,
    match_pris_tx_power,
    total_power,
    watts_to_dbm,
)
from risimg.risconfig import ARIS, PRIS, draw_schedule
from risimg.scene import build_scene, default_config

from conftest import small_config


def test_dbm_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert dbm_to_watts(-10.0) == pytest.approx(1e-4, rel=1e-12)
    assert dbm_to_watts(-5.0) == pytest.approx(0.00031622776601683794, rel=1e-12)
    assert dbm_to_watts(-110.0) == pytest.approx(1e-14, rel=1e-12)
    for dbm in (-110.0, -5.0, 0.0, 30.0):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-9)
    with pytest.raises(PowerError):
        watts_to_dbm(0.0)


def test_passive_total_power_default_scene():
    scene = build_scene(default_config())
    report = total_power(PRIS, 1.0, scene)
    # 10000 elements at 0.1 mW circuit power on top of 1 W transmit
    assert report.total == pytest.approx(2.0, rel=1e-12)
    assert report.dc_bias == 0.0
    assert report.per_panel_active == ()


def test_active_total_power_components():
    scene = build_scene(small_config())
    sched = draw_schedule(4, scene, ARIS, gain=1e4, seed=2)
    report = total_power(ARIS, 1.0, scene, sched)
    m_total = sum(p.n_elements for p in scene.ris)
    assert report.circuit == pytest.approx(m_total * 1e-4)
    assert report.dc_bias == pytest.approx(m_total * dbm_to_watts(-5.0))
    assert report.total == pytest.approx(
        report.p_tx + sum(report.per_panel_active) + report.circuit + report.dc_bias
    )
    assert report.total > total_power(PRIS, 1.0, scene).total
    with pytest.raises(PowerError):
        total_power(ARIS, 1.0, scene)  # schedule required
    with pytest.raises(PowerError):
        total_power("hybrid", 1.0, scene)
    with pytest.raises(PowerError):
        total_power(PRIS, -1.0, scene)


def test_aris_active_power_against_loop():
    scene = build_scene(small_config())
    gain = 100.0
    sched = draw_schedule(3, scene, ARIS, gain=gain, seed=5)
    p_tx = 2.0
    sigma2_ris = 1e-14
    out = aris_active_power(scene, sched, p_tx, sigma2_ris=sigma2_ris)
    s = np.full(scene.n_tx, 1.0 / np.sqrt(scene.n_tx))
    for t, panel in enumerate(scene.ris):
        acc = 0.0
        for k in range(3):
            forwarded = np.zeros(panel.n_elements, dtype=complex)
            for m in range(panel.n_elements):
                h_m = 0.0
                for i, p in enumerate(scene.tx.positions):
                    d = np.linalg.norm(p - panel.element_position(m))
                    h_m += s[i] * np.exp(-2j * np.pi * d / scene.wavelength) / (np.sqrt(4 * np.pi) * d)
                forwarded[m] = scene.g * np.sqrt(p_tx) * sched.coefficients[t][k, m] * h_m
            acc += np.sum(np.abs(forwarded) ** 2)
        signal = acc / 3
        noise = np.mean(np.sum(np.abs(sched.coefficients[t]) ** 2, axis=1)) * sigma2_ris
        assert out[t] == pytest.approx(signal + noise, rel=1e-10)


def test_aris_active_power_affine_in_p_tx():
    scene = build_scene(small_config())
    sched = draw_schedule(4, scene, ARIS, gain=1e4, seed=1)
    p1 = aris_active_power(scene, sched, 1.0)
    p2 = aris_active_power(scene, sched, 2.0)
    p3 = aris_active_power(scene, sched, 3.0)
    np.testing.assert_allclose(p3 - p2, p2 - p1, rtol=1e-9)


def test_transmit_vector_must_be_unit_norm():
    scene = build_scene(small_config())
    sched = draw_schedule(2, scene, ARIS, gain=4.0, seed=0)
    with pytest.raises(PowerError):
        aris_active_power(scene, sched, 1.0, s=np.ones(scene.n_tx))


def test_match_pris_tx_power_balances_totals():
    scene = build_scene(small_config())
    sched = draw_schedule(4, scene, ARIS, gain=1e4, seed=7)
    p_tx_pris = match_pris_tx_power(1.0, scene, sched)
    aris_total = total_power(ARIS, 1.0, scene, sched).total
    pris_total = total_power(PRIS, p_tx_pris, scene).total
    assert pris_total == pytest.approx(aris_total, rel=1e-12)
    assert p_tx_pris > 1.0  # the active ledger spends more than P_TX alone
