"""Scenario geometry: antenna arrays, RIS panels, and the voxelized region of interest.

All positions are in meters in a right-handed x/y/z frame with z pointing up.
Voxel indexing is row-major over (z, y, x), i.e. x varies fastest.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised when a scenario configuration value is invalid."""


def _vec3(v, key: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{key}: expected 3 finite components, got {v!r}")
    return arr


@dataclass(frozen=True)
class AntennaArray:
    """A small antenna array described by its center and per-element offsets."""

    center: np.ndarray
    offsets: np.ndarray  # (n_elements, 3)
    role: str  # "tx" or "rx"

    def __post_init__(self):
        if self.offsets.ndim != 2 or self.offsets.shape[1] != 3 or len(self.offsets) < 1:
            raise ConfigError(f"{self.role}: offsets must be a non-empty (n, 3) array")
        if len(np.unique(self.offsets, axis=0)) != len(self.offsets):
            raise ConfigError(f"{self.role}: duplicate element offsets")

    @property
    def n_elements(self) -> int:
        return len(self.offsets)

    @property
    def positions(self) -> np.ndarray:
        return self.center[None, :] + self.offsets


@dataclass(frozen=True)
class RisPanel:
    """A rectangular RIS lattice lying in the horizontal plane, centered at `center`."""

    center: np.ndarray
    rows: int
    cols: int
    spacing: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("ris: rows and cols must be >= 1")
        if self.spacing <= 0:
            raise ConfigError("ris: spacing must be > 0")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    def element_position(self, m: int) -> np.ndarray:
        if not 0 <= m < self.n_elements:
            raise IndexError(f"RIS element index {m} out of range [0, {self.n_elements})")
        r, c = divmod(m, self.cols)
        return self.center + np.array(
            [
                (c - (self.cols - 1) / 2.0) * self.spacing,
                (r - (self.rows - 1) / 2.0) * self.spacing,
                0.0,
            ]
        )

    @property
    def element_positions(self) -> np.ndarray:
        cc = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.spacing
        rr = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.spacing
        gx, gy = np.meshgrid(cc, rr)  # row index slow, col index fast
        out = np.zeros((self.n_elements, 3))
        out[:, 0] = self.center[0] + gx.ravel()
        out[:, 1] = self.center[1] + gy.ravel()
        out[:, 2] = self.center[2]
        return out


@dataclass(frozen=True)
class RoiGrid:
    """Voxel grid of the imaged volume.

    Index n maps to (iz, iy, ix) with n = (iz * N_y + iy) * N_x + ix; the inverse
    map is `voxel_center`.
    """

    center: np.ndarray
    extent: np.ndarray  # (3,) total lengths
    counts: tuple  # (N_x, N_y, N_z)

    def __post_init__(self):
        if any(c < 1 for c in self.counts):
            raise ConfigError("roi.counts: all counts must be >= 1")
        if np.any(self.extent <= 0):
            raise ConfigError("roi.extent: all extents must be > 0")

    @property
    def n_voxels(self) -> int:
        nx, ny, nz = self.counts
        return nx * ny * nz

    @property
    def height(self) -> float:
        return float(self.center[2])

    def _axis_centers(self, axis: int) -> np.ndarray:
        n = self.counts[axis]
        cell = self.extent[axis] / n
        return self.center[axis] - self.extent[axis] / 2.0 + (np.arange(n) + 0.5) * cell

    def voxel_center(self, n: int) -> np.ndarray:
        if not 0 <= n < self.n_voxels:
            raise IndexError(f"voxel index {n} out of range [0, {self.n_voxels})")
        nx, ny, _ = self.counts
        iz, rem = divmod(n, ny * nx)
        iy, ix = divmod(rem, nx)
        return np.array(
            [
                self._axis_centers(0)[ix],
                self._axis_centers(1)[iy],
                self._axis_centers(2)[iz],
            ]
        )

    @property
    def voxel_centers(self) -> np.ndarray:
        xs = self._axis_centers(0)
        ys = self._axis_centers(1)
        zs = self._axis_centers(2)
        gz, gy, gx = np.meshgrid(zs, ys, xs, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


@dataclass(frozen=True)
class Scene:
    """Immutable container for the full scenario geometry and RF constants."""

    tx: AntennaArray
    rx: AntennaArray
    ris: tuple
    roi: RoiGrid
    frequency_hz: float

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ConfigError("frequency_hz must be > 0")
        for t, panel in enumerate(self.ris):
            if panel.center[2] >= self.roi.center[2] - self.roi.extent[2] / 2.0:
                raise ConfigError(f"ris[{t}]: panel must lie below the ROI")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def g(self) -> float:
        """Aperture constant of the cascaded path model, wavelength / sqrt(4 pi)."""
        return self.wavelength / np.sqrt(4.0 * np.pi)

    @property
    def n_tx(self) -> int:
        return self.tx.n_elements

    @property
    def n_rx(self) -> int:
        return self.rx.n_elements

    @property
    def n_ris(self) -> int:
        return len(self.ris)

    @property
    def n_voxels(self) -> int:
        return self.roi.n_voxels


def _linear_offsets(n: int, spacing: float) -> np.ndarray:
    """Half-wavelength-style linear layout along x, centered on the array origin."""
    out = np.zeros((n, 3))
    out[:, 0] = (np.arange(n) - (n - 1) / 2.0) * spacing
    return out


def default_config(height: float = 100.0, d: float = 30.0) -> dict:
    """Baseline scenario: 4.9 GHz, four 50x50 half-wavelength panels at [+-d, +-d, 25],
    a 120 m x 120 m x 3 m ROI of 40x40x1 voxels at altitude `height`, and 4-antenna
    TX/RX at [0, -60, 30] and [0, 60, 30].
    """
    lam = SPEED_OF_LIGHT / 4.9e9
    return {
        "frequency_hz": 4.9e9,
        "roi": {
            "center": [0.0, 0.0, float(height)],
            "extent": [120.0, 120.0, 3.0],
            "counts": [40, 40, 1],
        },
        "tx": {"center": [0.0, -60.0, 30.0], "n_antennas": 4},
        "rx": {"center": [0.0, 60.0, 30.0], "n_antennas": 4},
        "ris": [
            {"center": [d, d, 25.0], "rows": 50, "cols": 50, "spacing": lam / 2.0},
            {"center": [-d, d, 25.0], "rows": 50, "cols": 50, "spacing": lam / 2.0},
            {"center": [d, -d, 25.0], "rows": 50, "cols": 50, "spacing": lam / 2.0},
            {"center": [-d, -d, 25.0], "rows": 50, "cols": 50, "spacing": lam / 2.0},
        ],
        "sim": {"n_symbols": 50, "sparsity": 10},
        "noise": {"sigma2_rx_dbm": -110.0, "sigma2_ris_dbm": -110.0},
        "power": {"p_tx_dbm": 30.0, "p_c_dbm": -10.0, "p_dc_dbm": -5.0},
        "ris_mode": {"mode": "pris", "amplification_db": 40.0, "seed": 0},
    }


def build_scene(config: dict) -> Scene:
    """Materialize a Scene from a configuration mapping.

    Raises ConfigError naming the offending key on invalid counts or spacings.
    """
    try:
        f = float(config["frequency_hz"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"frequency_hz: missing or invalid ({exc})") from None
    if f <= 0:
        raise ConfigError("frequency_hz: must be > 0")
    lam = SPEED_OF_LIGHT / f

    roi_cfg = config["roi"]
    counts = tuple(int(c) for c in roi_cfg["counts"])
    if any(c < 1 for c in counts):
        raise ConfigError(f"roi.counts: counts must be >= 1, got {counts}")
    roi = RoiGrid(
        center=_vec3(roi_cfg["center"], "roi.center"),
        extent=_vec3(roi_cfg["extent"], "roi.extent"),
        counts=counts,
    )

    arrays = {}
    for role in ("tx", "rx"):
        acfg = config[role]
        n_ant = int(acfg.get("n_antennas", 1))
        if n_ant < 1:
            raise ConfigError(f"{role}.n_antennas: must be >= 1, got {n_ant}")
        spacing = float(acfg.get("element_spacing", lam / 2.0))
        if spacing <= 0:
            raise ConfigError(f"{role}.element_spacing: must be > 0")
        arrays[role] = AntennaArray(
            center=_vec3(acfg["center"], f"{role}.center"),
            offsets=_linear_offsets(n_ant, spacing),
            role=role,
        )

    panels = []
    for t, pcfg in enumerate(config["ris"]):
        rows, cols = int(pcfg["rows"]), int(pcfg["cols"])
        spacing = float(pcfg.get("spacing", lam / 2.0))
        if rows < 1 or cols < 1:
            raise ConfigError(f"ris[{t}].rows/cols: must be >= 1, got {rows}x{cols}")
        if spacing <= 0:
            raise ConfigError(f"ris[{t}].spacing: must be > 0, got {spacing}")
        panels.append(
            RisPanel(center=_vec3(pcfg["center"], f"ris[{t}].center"), rows=rows, cols=cols, spacing=spacing)
        )

    return Scene(tx=arrays["tx"], rx=arrays["rx"], ris=tuple(panels), roi=roi, frequency_hz=f)


def load_config(path) -> dict:
    """Read a TOML config file, filling unspecified keys from the defaults."""
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        user = tomllib.load(fh)
    cfg = copy.deepcopy(default_config())
    _merge(cfg, user)
    return cfg


def _merge(base: dict, override: dict) -> None:
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _merge(base[key], val)
        else:
            base[key] = val
