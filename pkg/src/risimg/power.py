"""Total-power accounting for passive and active panel configurations, and the
transmit-power matching used for like-for-like comparisons."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import link_vector
from .risconfig import ARIS, PRIS, PhaseSchedule


class PowerError(ValueError):
    """Raised for contract violations in the power ledger."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise PowerError(f"cannot express {watts} W in dBm")
    return float(10.0 * np.log10(watts / 1e-3))


@dataclass(frozen=True)
class PowerReport:
    mode: str
    p_tx: float  # W
    per_panel_active: tuple  # P_M_t per panel, W (empty for passive)
    circuit: float  # sum over panels of M_t * P_c, W
    dc_bias: float  # sum over panels of M_t * P_DC, W (0 for passive)
    total: float  # W

    def csv_row(self) -> str:
        return (
            f"{self.mode},{float(self.p_tx)!r},{float(sum(self.per_panel_active))!r},"
            f"{float(self.circuit + self.dc_bias)!r},{float(self.total)!r}"
        )


def aris_active_power(
    scene, schedule: PhaseSchedule, p_tx: float, s=None, sigma2_ris: float = 1e-14, factors=None
) -> np.ndarray:
    """Per-panel amplifier output power: forwarded signal power (averaged over the
    drawn symbols) plus the amplified thermal-noise term.

    `s` is the transmit vector; defaults to equal allocation (1/sqrt(N_TX)) * ones.
    """
    n_tx = scene.n_tx
    if s is None:
        s = np.full(n_tx, 1.0 / np.sqrt(n_tx))
    s = np.asarray(s)
    if abs(np.linalg.norm(s) - 1.0) > 1e-9:
        raise PowerError(f"transmit vector must have unit norm, got {np.linalg.norm(s):.6g}")
    lam = scene.wavelength
    out = np.zeros(scene.n_ris)
    for t, panel in enumerate(scene.ris):
        if factors is not None:
            h = factors.u_tx[t]
        else:
            elems = panel.element_positions
            h = np.stack([link_vector(p, elems, lam) for p in scene.tx.positions])  # (N_TX, M_t)
        c = s @ h  # (M_t,)
        omega = schedule.coefficients[t]  # (K, M_t)
        signal = scene.g**2 * p_tx * np.mean(np.sum(np.abs(c[None, :] * omega) ** 2, axis=1))
        noise = float(np.mean(np.sum(np.abs(omega) ** 2, axis=1))) * sigma2_ris
        out[t] = signal + noise
    return out


def total_power(
    mode: str,
    p_tx: float,
    scene,
    schedule: PhaseSchedule = None,
    p_c: float = 1e-4,
    p_dc: float = 10.0 ** (-5 / 10.0) * 1e-3,
    sigma2_ris: float = 1e-14,
    factors=None,
) -> PowerReport:
    """System power total: transmit power plus per-element circuit terms; active
    mode adds DC bias and amplifier output power."""
    if p_tx < 0 or p_c < 0 or p_dc < 0:
        raise PowerError("powers must be >= 0")
    m_total = sum(panel.n_elements for panel in scene.ris)
    circuit = m_total * p_c
    if mode == PRIS:
        return PowerReport(mode=mode, p_tx=p_tx, per_panel_active=(), circuit=circuit, dc_bias=0.0, total=p_tx + circuit)
    if mode != ARIS:
        raise PowerError(f"unknown mode {mode!r}")
    if schedule is None:
        raise PowerError("active-mode total power requires a schedule")
    per_panel = aris_active_power(scene, schedule, p_tx, sigma2_ris=sigma2_ris, factors=factors)
    dc = m_total * p_dc
    total = p_tx + float(np.sum(per_panel)) + circuit + dc
    return PowerReport(
        mode=mode, p_tx=p_tx, per_panel_active=tuple(per_panel), circuit=circuit, dc_bias=dc, total=total
    )


def match_pris_tx_power(
    p_tx_aris: float,
    scene,
    schedule: PhaseSchedule,
    p_c: float = 1e-4,
    p_dc: float = 10.0 ** (-5 / 10.0) * 1e-3,
    sigma2_ris: float = 1e-14,
    factors=None,
) -> float:
    """Passive-system transmit power that matches the active system's total power."""
    aris = total_power(ARIS, p_tx_aris, scene, schedule, p_c=p_c, p_dc=p_dc, sigma2_ris=sigma2_ris, factors=factors)
    m_total = sum(panel.n_elements for panel in scene.ris)
    p_tx_pris = aris.total - m_total * p_c
    if p_tx_pris <= 0:
        raise PowerError(f"matched passive transmit power is non-positive ({p_tx_pris} W)")
    return p_tx_pris
