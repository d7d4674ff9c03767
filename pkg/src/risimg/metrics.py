"""Scalar evaluation metrics: reconstruction error, detection rate, and the
fidelity-per-power figure of merit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PSNR_INF = float("inf")  # sentinel for a zero-error reconstruction


@dataclass(frozen=True)
class MetricSet:
    mse: float
    dr: float
    psnr_db: float
    psnr_per_watt: float
    p_sum: float
    max_abs: float

    @property
    def mse_db(self) -> float:
        return float(10.0 * np.log10(self.mse)) if self.mse > 0 else -PSNR_INF


def mse(x_true: np.ndarray, x_est: np.ndarray) -> float:
    """||x - x_hat||^2 / N on the real-part view of the estimate."""
    x_true = np.asarray(x_true)
    x_est = np.asarray(x_est)
    if x_true.shape != x_est.shape:
        raise ValueError(f"length mismatch: {x_true.shape} vs {x_est.shape}")
    diff = np.real(x_true) - np.real(x_est)
    return float(np.sum(diff**2) / len(x_true))


def detection_rate(u_true, u_est) -> float:
    """Fraction of true support indices present in the estimated support."""
    u_true = set(int(i) for i in np.asarray(u_true).ravel())
    if not u_true:
        raise ValueError("true support is empty")
    u_est = set(int(i) for i in np.asarray(u_est).ravel())
    return len(u_true & u_est) / len(u_true)


def psnr(max_abs: float, mse_value: float) -> float:
    """10 log10(MAX^2 / MSE) in dB; inf sentinel when MSE is zero."""
    if max_abs <= 0:
        raise ValueError(f"max_abs must be > 0, got {max_abs}")
    if mse_value < 0:
        raise ValueError(f"mse must be >= 0, got {mse_value}")
    if mse_value == 0:
        return PSNR_INF
    return float(10.0 * np.log10(max_abs**2 / mse_value))


def psnr_per_watt(mse_value: float, max_abs: float, p_sum: float) -> float:
    """PSNR in dB divided by total consumed power in Watts."""
    if p_sum <= 0:
        raise ValueError(f"p_sum must be > 0, got {p_sum}")
    return psnr(max_abs, mse_value) / p_sum


def evaluate(x_true, x_est, u_true, u_est, p_sum: float) -> MetricSet:
    m = mse(x_true, x_est)
    max_abs = float(np.max(np.abs(np.asarray(x_true))))
    return MetricSet(
        mse=m,
        dr=detection_rate(u_true, u_est),
        psnr_db=psnr(max_abs, m),
        psnr_per_watt=psnr_per_watt(m, max_abs, p_sum),
        p_sum=p_sum,
        max_abs=max_abs,
    )
