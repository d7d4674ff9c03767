"""Free-space propagation primitives shared by the forward model and bound evaluators."""

from __future__ import annotations

import numpy as np


class PropagationError(ValueError):
    """Raised for degenerate link geometry (coincident endpoints)."""


def fs_response(d, wavelength: float):
    """Free-space response e^{-j 2 pi d / lambda} / (sqrt(4 pi) d).

    `d` may be a scalar or an array of positive distances in meters.
    """
    d = np.asarray(d, dtype=float)
    if wavelength <= 0:
        raise PropagationError(f"wavelength must be > 0, got {wavelength}")
    if np.any(d <= 0):
        bad = int(np.argmax(d <= 0)) if d.ndim else None
        raise PropagationError(f"non-positive distance (index {bad}): coincident points")
    out = np.exp(-2j * np.pi * d / wavelength) / (np.sqrt(4.0 * np.pi) * d)
    return complex(out) if out.ndim == 0 else out


def link_vector(origin: np.ndarray, targets: np.ndarray, wavelength: float) -> np.ndarray:
    """Element-wise free-space responses from `origin` to each row of `targets`."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    d = np.linalg.norm(targets - np.asarray(origin, dtype=float)[None, :], axis=1)
    if np.any(d == 0):
        bad = int(np.argmax(d == 0))
        raise PropagationError(f"target {bad} coincides with origin")
    return fs_response(d, wavelength)


def pairwise_distances(points_a: np.ndarray, points_b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of shape (len(a), len(b))."""
    a = np.atleast_2d(points_a)
    b = np.atleast_2d(points_b)
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
