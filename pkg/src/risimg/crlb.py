"""Estimation-variance lower bounds per voxel, their closed-form expectations over
random phase schedules, and the placement sweeps built on the approximate form.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .channel import pairwise_distances
from .recovery import MAX_CONDITION, RankError


@dataclass(frozen=True)
class CrlbMap:
    """Per-voxel bound values over an ROI grid."""

    values: np.ndarray  # (N,) variances, > 0 (inf marks blind voxels)
    variant: str  # "per-voxel-exact" | "expected" | "approximate"
    gamma: float
    gain: float
    n_symbols: int

    def __post_init__(self):
        if np.any(self.values <= 0):
            raise ValueError("bound values must be positive")


def crlb_on_support(matrix: np.ndarray, support, gamma: float):
    """Diagonal of (gamma A_u^H A_u)^{-1} plus its average over the support.

    Returns (bounds, average)."""
    support = np.asarray(support, dtype=int)
    a_sub = matrix[:, support]
    gram = a_sub.conj().T @ a_sub
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > MAX_CONDITION**2:
        raise RankError(f"support Gram matrix is rank deficient (condition {cond:.3g})")
    inv = np.linalg.inv(gamma * gram)
    bounds = np.diag(inv).real
    return bounds, float(np.mean(bounds))


def crlb_voxel(matrix: np.ndarray, n: int, gamma: float) -> float:
    """Single-voxel bound 1 / (gamma ||p_n||^2); inf flags a blind voxel."""
    norm2 = float(np.vdot(matrix[:, n], matrix[:, n]).real)
    if norm2 == 0.0:
        return np.inf
    return 1.0 / (gamma * norm2)


def _eta(scene, gain: float, gamma: float, n_symbols: int) -> float:
    return 64.0 * np.pi**3 / (gain * gamma * scene.g**2 * n_symbols)


def _exact_factors(scene, voxel_idx=None):
    """Per-voxel (kappa, mu) using exact per-element distances."""
    voxels = scene.roi.voxel_centers if voxel_idx is None else scene.roi.voxel_centers[np.atleast_1d(voxel_idx)]
    d_vr2 = pairwise_distances(voxels, scene.rx.positions) ** 2  # (N, N_RX)
    kappa = 1.0 / np.sum(1.0 / d_vr2, axis=1)
    mu_sum = np.zeros(len(voxels))
    for panel in scene.ris:
        elems = panel.element_positions
        d_ts2 = pairwise_distances(scene.tx.positions, elems) ** 2  # (N_TX, M_t)
        inv_ts = np.sum(1.0 / d_ts2, axis=0)  # (M_t,)
        d_sv2 = pairwise_distances(elems, voxels) ** 2  # (M_t, N)
        mu_sum += inv_ts @ (1.0 / d_sv2)
    return kappa, 1.0 / mu_sum


def _approx_factors(scene, voxel_idx=None):
    """Per-voxel (kappa~, mu~) collapsing arrays and panels to their centers."""
    voxels = scene.roi.voxel_centers if voxel_idx is None else scene.roi.voxel_centers[np.atleast_1d(voxel_idx)]
    d_vr2 = np.sum((voxels - scene.rx.center[None, :]) ** 2, axis=1)
    kappa = d_vr2 / scene.n_rx
    mu_sum = np.zeros(len(voxels))
    for panel in scene.ris:
        d_ts2 = float(np.sum((scene.tx.center - panel.center) ** 2))
        d_sv2 = np.sum((voxels - panel.center[None, :]) ** 2, axis=1)
        mu_sum += panel.n_elements * scene.n_tx / (d_ts2 * d_sv2)
    return kappa, 1.0 / mu_sum


def expected_crlb(scene, n: int, gain: float, gamma: float, n_symbols: int):
    """Closed-form expectation of the single-voxel bound over random phases.

    Returns (value, (eta, kappa, mu)) with exact per-element distances."""
    eta = _eta(scene, gain, gamma, n_symbols)
    kappa, mu = _exact_factors(scene, n)
    return float(eta * kappa[0] * mu[0]), (eta, float(kappa[0]), float(mu[0]))


def approx_expected_crlb(scene, n: int, gain: float, gamma: float, n_symbols: int) -> float:
    """Center-collapsed approximation of the expected single-voxel bound."""
    eta = _eta(scene, gain, gamma, n_symbols)
    kappa, mu = _approx_factors(scene, n)
    return float(eta * kappa[0] * mu[0])


def expected_crlb_map(scene, gain: float, gamma: float, n_symbols: int, approximate: bool = False) -> CrlbMap:
    """Expected bound for every voxel of the scene."""
    eta = _eta(scene, gain, gamma, n_symbols)
    kappa, mu = (_approx_factors if approximate else _exact_factors)(scene)
    return CrlbMap(
        values=eta * kappa * mu,
        variant="approximate" if approximate else "expected",
        gamma=gamma,
        gain=gain,
        n_symbols=n_symbols,
    )


def per_voxel_exact_map(matrix, gamma: float, gain: float, n_symbols: int) -> CrlbMap:
    """Single-voxel bounds from the realized sensing matrix columns."""
    norms2 = np.sum(np.abs(matrix.entries) ** 2, axis=0)
    values = np.where(norms2 > 0, 1.0 / (gamma * np.maximum(norms2, np.finfo(float).tiny)), np.inf)
    return CrlbMap(values=values, variant="per-voxel-exact", gamma=gamma, gain=gain, n_symbols=n_symbols)


def mean_over_voxels(crlb_map: CrlbMap) -> float:
    if len(crlb_map.values) == 0:
        raise ValueError("empty bound map")
    return float(np.mean(crlb_map.values))


def _mean_approx(scene, gain, gamma, n_symbols) -> float:
    return mean_over_voxels(expected_crlb_map(scene, gain, gamma, n_symbols, approximate=True))


def rx_position_sweep(config: dict, gain: float, gamma: float, n_symbols: int, step: float = 5.0, half_extent: float = 60.0, height: float = 30.0):
    """Mean approximate bound versus RX position over a horizontal grid.

    Returns rows of (x, y, mean_crlb)."""
    from .scene import build_scene

    grid = np.arange(-half_extent, half_extent + step / 2, step)
    rows = []
    for x in grid:
        for y in grid:
            cfg = copy.deepcopy(config)
            cfg["rx"]["center"] = [float(x), float(y), float(height)]
            scn = build_scene(cfg)
            rows.append((float(x), float(y), _mean_approx(scn, gain, gamma, n_symbols)))
    return rows


def tx_position_sweep(config: dict, gain: float, gamma: float, n_symbols: int, step: float = 5.0, half_extent: float = 60.0, height: float = 30.0):
    """Mean approximate bound versus TX position over a horizontal grid."""
    from .scene import build_scene

    grid = np.arange(-half_extent, half_extent + step / 2, step)
    rows = []
    for x in grid:
        for y in grid:
            cfg = copy.deepcopy(config)
            cfg["tx"]["center"] = [float(x), float(y), float(height)]
            scn = build_scene(cfg)
            rows.append((float(x), float(y), _mean_approx(scn, gain, gamma, n_symbols)))
    return rows


def ris_spacing_sweep(config: dict, gain: float, gamma: float, n_symbols: int, d_values, heights, panel_height: float = 25.0):
    """Mean approximate bound versus the half-spacing d of the symmetric four-panel
    layout, for each ROI height. Returns rows of (d, height, mean_crlb)."""
    from .scene import build_scene

    rows = []
    for height in heights:
        for d in d_values:
            cfg = copy.deepcopy(config)
            cfg["roi"]["center"][2] = float(height)
            for pcfg, (sx, sy) in zip(cfg["ris"], [(1, 1), (-1, 1), (1, -1), (-1, -1)]):
                pcfg["center"] = [sx * float(d), sy * float(d), panel_height]
            scn = build_scene(cfg)
            rows.append((float(d), float(height), _mean_approx(scn, gain, gamma, n_symbols)))
    return rows


def placement_sweep(config: dict, parameter: str, gain: float, gamma: float, n_symbols: int, **kwargs):
    """Dispatch to the RX, TX, or panel-spacing sweep by name."""
    if parameter == "rx":
        return rx_position_sweep(config, gain, gamma, n_symbols, **kwargs)
    if parameter == "tx":
        return tx_position_sweep(config, gain, gamma, n_symbols, **kwargs)
    if parameter == "d":
        kwargs.setdefault("d_values", np.arange(5.0, 61.0, 5.0))
        kwargs.setdefault("heights", [100.0, 200.0, 300.0])
        return ris_spacing_sweep(config, gain, gamma, n_symbols, **kwargs)
    raise ValueError(f"unknown sweep parameter {parameter!r}")
