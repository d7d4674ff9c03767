"""RIS-aided low-altitude imaging: forward model, sparse recovery, estimation
bounds, power accounting, and reproducible experiment sweeps."""

from .scene import Scene, build_scene, default_config, load_config
from .channel import fs_response, link_vector
from .risconfig import ARIS, PRIS, PhaseSchedule, draw_schedule, validate_schedule
from .forward import (
    NoiseModel,
    SensingMatrix,
    SparseImage,
    build_sensing_matrix,
    draw_sparse_image,
    naive_path_gain,
    row_vector,
    synthesize_measurements,
)
from .recovery import RecoveryResult, default_eps, omp_recover, sp_recover
from .crlb import approx_expected_crlb, crlb_on_support, crlb_voxel, expected_crlb
from .power import dbm_to_watts, match_pris_tx_power, total_power, watts_to_dbm
from .metrics import detection_rate, mse, psnr_per_watt

__version__ = "0.1.0"
