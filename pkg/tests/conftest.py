import numpy as np
import pytest

from risimg.scene import default_config


def small_config(height=100.0, counts=(4, 4, 1), ris_side=3, n_ant=2, n_symbols=4):
    """Reduced scenario for fast unit tests: small panels, few antennas."""
    cfg = default_config(height=height)
    cfg["roi"]["counts"] = list(counts)
    cfg["tx"]["n_antennas"] = n_ant
    cfg["rx"]["n_antennas"] = n_ant
    cfg["ris"] = [dict(p, rows=ris_side, cols=ris_side) for p in cfg["ris"]]
    cfg["sim"]["n_symbols"] = n_symbols
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
