"""Forward model: sensing matrix assembly, measurement synthesis, and noise paths.

A measurement is indexed by (i, k, t, j): transmit antenna i, symbol k, panel t,
receive antenna j. Rows of the sensing matrix follow the lexicographic order of
those indices (i slowest, j fastest), so row = ((i*K + k)*T + t)*N_RX + j.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .channel import fs_response, link_vector, pairwise_distances
from .risconfig import ARIS, PRIS, PhaseSchedule, ScheduleError

FOUR_PI = 4.0 * np.pi


class MatrixSizeError(MemoryError):
    """Raised when the requested sensing matrix would exceed the entry budget."""


@dataclass(frozen=True)
class SparseImage:
    """Sparse scattering-coefficient vector: support indices plus their values."""

    n_voxels: int
    support: np.ndarray  # sorted unique indices, shape (S,)
    values: np.ndarray  # shape (S,), real or complex

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=int)
        if sup.ndim != 1 or len(np.unique(sup)) != len(sup):
            raise ValueError("support indices must be unique")
        if np.any(sup < 0) or np.any(sup >= self.n_voxels):
            raise ValueError("support index out of range")
        if len(self.values) != len(sup):
            raise ValueError("support/values length mismatch")

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.n_voxels, dtype=np.result_type(self.values, float))
        out[self.support] = self.values
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.support, dtype="<i8").tobytes())
        h.update(np.asarray(self.values).astype("<c16").tobytes())
        return h.hexdigest()[:16]


def draw_sparse_image(n_voxels: int, sparsity: int, seed, mean: float = 0.1, std: float = 0.1) -> SparseImage:
    """Ground truth draw: uniform support without replacement, Gaussian coefficients.

    Negative draws are kept as-is. `seed` may be an int or a Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    support = np.sort(rng.choice(n_voxels, size=sparsity, replace=False))
    values = rng.normal(mean, std, size=sparsity)
    return SparseImage(n_voxels=n_voxels, support=support, values=values)


@dataclass(frozen=True)
class NoiseModel:
    """Noise conventions shared by synthesis and the bound evaluators.

    The receiver-domain noise variance sigma2_rx maps to the CSI domain through
    the per-antenna transmit power: sigma2_eff = (sigma2_rx + aris_path_power)
    * n_tx / p_tx, and gamma = 1 / sigma2_eff.
    """

    sigma2_rx: float  # Watts
    sigma2_ris: float  # Watts
    p_tx: float  # Watts
    n_tx: int
    aris_path_power: float = 0.0  # mean amplifier-noise power reaching the RX, Watts

    def __post_init__(self):
        if self.sigma2_rx <= 0 or self.p_tx <= 0 or self.n_tx < 1:
            raise ValueError("sigma2_rx and p_tx must be > 0, n_tx >= 1")

    @property
    def sigma2_eff(self) -> float:
        return (self.sigma2_rx + self.aris_path_power) * self.n_tx / self.p_tx

    @property
    def gamma(self) -> float:
        return 1.0 / self.sigma2_eff

    @classmethod
    def from_config(cls, config: dict, scene, p_tx_watts: float | None = None) -> "NoiseModel":
        from .power import dbm_to_watts

        noise = config["noise"]
        if p_tx_watts is None:
            p_tx_watts = dbm_to_watts(config["power"]["p_tx_dbm"])
        return cls(
            sigma2_rx=dbm_to_watts(noise["sigma2_rx_dbm"]),
            sigma2_ris=dbm_to_watts(noise["sigma2_ris_dbm"]),
            p_tx=p_tx_watts,
            n_tx=scene.n_tx,
        )


@dataclass(frozen=True)
class SensingMatrix:
    """Stacked L x N sensing matrix with the (i, k, t, j) <-> row index map."""

    entries: np.ndarray  # (L, N) complex128
    n_tx: int
    n_symbols: int
    n_panels: int
    n_rx: int
    scene_fingerprint: str = ""
    schedule_fingerprint: str = ""

    @property
    def shape(self):
        return self.entries.shape

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_voxels(self) -> int:
        return self.entries.shape[1]

    def row_index(self, i: int, k: int, t: int, j: int) -> int:
        if not (0 <= i < self.n_tx and 0 <= k < self.n_symbols and 0 <= t < self.n_panels and 0 <= j < self.n_rx):
            raise IndexError(f"measurement index ({i}, {k}, {t}, {j}) out of range")
        return ((i * self.n_symbols + k) * self.n_panels + t) * self.n_rx + j

    def index_tuple(self, row: int) -> tuple:
        if not 0 <= row < self.n_rows:
            raise IndexError(f"row {row} out of range [0, {self.n_rows})")
        row, j = divmod(row, self.n_rx)
        row, t = divmod(row, self.n_panels)
        i, k = divmod(row, self.n_symbols)
        return i, k, t, j


@dataclass(frozen=True)
class MeasurementSet:
    """Synthesized CSI measurements plus the metadata needed to reproduce them."""

    y: np.ndarray
    seed: int
    mode: str
    sigma2_eff: float
    image_fingerprint: str


def _scene_fingerprint(scene) -> str:
    h = hashlib.sha256()
    for arr in (scene.tx.positions, scene.rx.positions, scene.roi.voxel_centers):
        h.update(np.ascontiguousarray(arr).tobytes())
    for panel in scene.ris:
        h.update(np.ascontiguousarray(panel.element_positions).tobytes())
    h.update(np.float64(scene.frequency_hz).tobytes())
    return h.hexdigest()[:16]


def _schedule_fingerprint(schedule: PhaseSchedule) -> str:
    h = hashlib.sha256()
    h.update(schedule.mode.encode())
    h.update(np.float64(schedule.gain).tobytes())
    for omega in schedule.coefficients:
        h.update(np.ascontiguousarray(omega).tobytes())
    return h.hexdigest()[:16]


def row_vector(scene, schedule: PhaseSchedule, i: int, k: int, t: int, j: int) -> np.ndarray:
    """Single row of the sensing matrix, assembled directly from its entry formula."""
    lam = scene.wavelength
    panel = scene.ris[t]
    elems = panel.element_positions
    voxels = scene.roi.voxel_centers
    h_tx = link_vector(scene.tx.positions[i], elems, lam)  # (M_t,)
    omega = schedule.coefficients[t][k]
    d_sv = pairwise_distances(elems, voxels)  # (M_t, N)
    g_sv = fs_response(d_sv, lam)
    h_vr = link_vector(scene.rx.positions[j], voxels, lam)  # (N,) reciprocal distances
    return scene.g * h_vr * ((omega * h_tx) @ g_sv)


class SceneFactors:
    """Schedule-independent response factors of a scene, precomputed once.

    Holds the TX->element, element->voxel, and voxel->RX free-space responses so
    repeated matrix builds (one per schedule draw) only pay for the phase GEMMs.
    """

    def __init__(self, scene):
        lam = scene.wavelength
        voxels = scene.roi.voxel_centers
        self.v_rx = np.stack([link_vector(p, voxels, lam) for p in scene.rx.positions], axis=1)  # (N, N_RX)
        self.u_tx = []  # per panel (N_TX, M_t)
        self.g_sv = []  # per panel (M_t, N)
        for panel in scene.ris:
            elems = panel.element_positions
            self.u_tx.append(np.stack([link_vector(p, elems, lam) for p in scene.tx.positions]))
            self.g_sv.append(fs_response(pairwise_distances(elems, voxels), lam))


def build_sensing_matrix(
    scene, schedule: PhaseSchedule, max_entries: int = 300_000_000, factors: SceneFactors = None
) -> SensingMatrix:
    """Assemble the full L x N matrix via the factored two-stage product.

    For each panel, the phase-weighted TX->RIS factors multiply a precomputed
    RIS->voxel response matrix in a single complex GEMM, then each row is scaled
    by the voxel->RX responses. Raises MatrixSizeError beyond `max_entries`.
    Pass `factors` to reuse the geometry work across schedule draws.
    """
    n_tx, n_rx = scene.n_tx, scene.n_rx
    n_sym = schedule.n_symbols
    n_panels = scene.n_ris
    if n_panels != schedule.n_panels:
        raise ValueError("schedule panel count does not match scene")
    n_vox = scene.n_voxels
    n_rows = n_sym * n_panels * n_tx * n_rx
    if n_rows * n_vox > max_entries:
        raise MatrixSizeError(
            f"sensing matrix would hold {n_rows * n_vox} entries ({n_rows} x {n_vox}), "
            f"budget {max_entries}"
        )

    if factors is None:
        factors = SceneFactors(scene)

    out = np.empty((n_tx, n_sym, n_panels, n_rx, n_vox), dtype=np.complex128)
    for t in range(n_panels):
        omega = schedule.coefficients[t]  # (K, M_t)
        weighted = (factors.u_tx[t][:, None, :] * omega[None, :, :]).reshape(n_tx * n_sym, -1)
        core = weighted @ factors.g_sv[t]  # (N_TX * K, N)
        core = core.reshape(n_tx, n_sym, n_vox)
        for j in range(n_rx):
            out[:, :, t, j, :] = scene.g * core * factors.v_rx[None, None, :, j]

    return SensingMatrix(
        entries=out.reshape(n_rows, n_vox),
        n_tx=n_tx,
        n_symbols=n_sym,
        n_panels=n_panels,
        n_rx=n_rx,
        scene_fingerprint=_scene_fingerprint(scene),
        schedule_fingerprint=_schedule_fingerprint(schedule),
    )


def naive_path_gain(scene, schedule: PhaseSchedule, image: SparseImage, i: int, k: int, t: int, j: int) -> complex:
    """Brute-force cascaded-path oracle: explicit triple matrix product.

    Never touches the factored builder; intended for small scenes only.
    """
    lam = scene.wavelength
    panel = scene.ris[t]
    elems = panel.element_positions
    voxels = scene.roi.voxel_centers
    h_tx = link_vector(scene.tx.positions[i], elems, lam)
    phi = np.diag(schedule.coefficients[t][k])
    h_sv = fs_response(pairwise_distances(elems, voxels), lam)
    h_vr = link_vector(scene.rx.positions[j], voxels, lam)
    x = image.dense()
    return complex(scene.g * h_tx @ phi @ h_sv @ np.diag(x) @ h_vr)


def _amplifier_path_matrix(scene, t: int, image: SparseImage, j: int, factors: "SceneFactors" = None) -> np.ndarray:
    """Per-element response of the RIS->ROI->RX leg, restricted to the image support."""
    sup = np.asarray(image.support)
    if factors is not None:
        h_sv = factors.g_sv[t][:, sup]
        h_vr = factors.v_rx[sup, j]
    else:
        lam = scene.wavelength
        elems = scene.ris[t].element_positions
        sup_voxels = scene.roi.voxel_centers[sup]
        h_sv = fs_response(pairwise_distances(elems, sup_voxels), lam)  # (M_t, S)
        h_vr = link_vector(scene.rx.positions[j], sup_voxels, lam)  # (S,)
    return h_sv @ (np.asarray(image.values) * h_vr)  # (M_t,)


def aris_noise_sample(
    scene, schedule: PhaseSchedule, image: SparseImage, k: int, t: int, j: int, seed, sigma2_ris: float = 1e-14
) -> complex:
    """One realization of the amplified thermal noise received via the imaging path."""
    if schedule.mode != ARIS:
        raise ScheduleError("amplifier noise is only defined for active panels")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m_t = scene.ris[t].n_elements
    z = np.sqrt(sigma2_ris / 2.0) * (rng.standard_normal(m_t) + 1j * rng.standard_normal(m_t))
    if image.sparsity == 0:
        return 0.0 + 0.0j
    b = _amplifier_path_matrix(scene, t, image, j)
    return complex((z * schedule.coefficients[t][k]) @ b)


def synthesize_measurements(
    matrix: SensingMatrix,
    image: SparseImage,
    noise: NoiseModel,
    seed: int,
    scene=None,
    schedule: PhaseSchedule = None,
    factors: SceneFactors = None,
) -> MeasurementSet:
    """y = A x + n with circularly-symmetric Gaussian CSI noise.

    For active schedules the amplifier-noise term is synthesized explicitly per
    (k, t, j) through the imaging path (shared across transmit antennas) and
    scaled into the CSI domain; `scene` and `schedule` are then required.
    """
    x = image.dense()
    if len(x) != matrix.n_voxels:
        raise ValueError(f"image has {len(x)} voxels, matrix expects {matrix.n_voxels}")
    rng = np.random.default_rng(seed)
    y = matrix.entries @ x
    mode = PRIS if schedule is None else schedule.mode

    sigma2 = noise.sigma2_rx * noise.n_tx / noise.p_tx
    if sigma2 > 0:
        n = np.sqrt(sigma2 / 2.0) * (rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y)))
        y = y + n

    if mode == ARIS:
        if scene is None or schedule is None:
            raise ValueError("active-mode synthesis requires scene and schedule")
        scale = np.sqrt(noise.n_tx / noise.p_tx)
        n_sym, n_panels, n_rx = matrix.n_symbols, matrix.n_panels, matrix.n_rx
        for t in range(n_panels):
            m_t = scene.ris[t].n_elements
            b = np.stack(
                [_amplifier_path_matrix(scene, t, image, j, factors) for j in range(n_rx)], axis=1
            )  # (M_t, N_RX)
            z = np.sqrt(noise.sigma2_ris / 2.0) * (
                rng.standard_normal((n_sym, m_t)) + 1j * rng.standard_normal((n_sym, m_t))
            )
            z_ari = (z * schedule.coefficients[t]) @ b  # (K, N_RX)
            for i in range(matrix.n_tx):
                base = (i * n_sym + np.arange(n_sym)) * n_panels + t
                for j in range(n_rx):
                    y[base * n_rx + j] += scale * z_ari[:, j]

    return MeasurementSet(
        y=y, seed=int(seed), mode=mode, sigma2_eff=noise.sigma2_eff, image_fingerprint=image.fingerprint()
    )


def noise_power_report(
    config: dict, heights, trials: int = 500, seed: int = 0, sparsity: int = 10
) -> list:
    """Monte-Carlo comparison of the amplified thermal noise against receiver noise.

    Returns one dict per height with both received powers in dBm. The receiver
    noise power is estimated from draws as well, so both columns carry sampling
    error.
    """
    from .power import dbm_to_watts, watts_to_dbm
    from .scene import build_scene
    import copy

    sigma2_rx = dbm_to_watts(config["noise"]["sigma2_rx_dbm"])
    sigma2_ris = dbm_to_watts(config["noise"]["sigma2_ris_dbm"])
    gain = 10.0 ** (config["ris_mode"]["amplification_db"] / 10.0)
    n_sym = config["sim"]["n_symbols"]
    rows = []
    master = np.random.SeedSequence(seed)
    for height, sub in zip(heights, master.spawn(len(heights))):
        rng = np.random.default_rng(sub)
        cfg = copy.deepcopy(config)
        cfg["roi"]["center"][2] = float(height)
        scn = build_scene(cfg)
        from .risconfig import draw_schedule

        schedule = draw_schedule(n_sym, scn, ARIS, gain=gain, seed=int(rng.integers(2**63)))
        p_ari = []
        p_v = []
        for _ in range(trials):
            image = draw_sparse_image(scn.n_voxels, sparsity, rng)
            t = int(rng.integers(scn.n_ris))
            j = int(rng.integers(scn.n_rx))
            k = int(rng.integers(n_sym))
            sample = aris_noise_sample(scn, schedule, image, k, t, j, rng, sigma2_ris=sigma2_ris)
            p_ari.append(abs(sample) ** 2)
            v = np.sqrt(sigma2_rx / 2.0) * (rng.standard_normal(16) + 1j * rng.standard_normal(16))
            p_v.append(np.mean(np.abs(v) ** 2))
        rows.append(
            {
                "height_m": float(height),
                "z_ari_dbm": watts_to_dbm(float(np.mean(p_ari))),
                "v_dbm": watts_to_dbm(float(np.mean(p_v))),
            }
        )
    return rows


def save_matrix(matrix: SensingMatrix, path_prefix: str) -> None:
    """Write entries as little-endian complex doubles plus a JSON sidecar."""
    matrix.entries.astype("<c16").tofile(str(path_prefix) + ".bin")
    meta = {
        "rows": matrix.n_rows,
        "cols": matrix.n_voxels,
        "dtype": "<c16",
        "order": "row-major",
        "n_tx": matrix.n_tx,
        "n_symbols": matrix.n_symbols,
        "n_panels": matrix.n_panels,
        "n_rx": matrix.n_rx,
        "scene_fingerprint": matrix.scene_fingerprint,
        "schedule_fingerprint": matrix.schedule_fingerprint,
    }
    with open(str(path_prefix) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def load_matrix(path_prefix: str) -> SensingMatrix:
    with open(str(path_prefix) + ".json") as fh:
        meta = json.load(fh)
    entries = np.fromfile(str(path_prefix) + ".bin", dtype="<c16").reshape(meta["rows"], meta["cols"])
    return SensingMatrix(
        entries=entries,
        n_tx=meta["n_tx"],
        n_symbols=meta["n_symbols"],
        n_panels=meta["n_panels"],
        n_rx=meta["n_rx"],
        scene_fingerprint=meta["scene_fingerprint"],
        schedule_fingerprint=meta["schedule_fingerprint"],
    )


def measurements_to_csv(ms: MeasurementSet, matrix: SensingMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write("row_index,i,k,t,j,re,im\n")
        for row in range(matrix.n_rows):
            i, k, t, j = matrix.index_tuple(row)
            fh.write(f"{row},{i},{k},{t},{j},{ms.y[row].real!r},{ms.y[row].imag!r}\n")
