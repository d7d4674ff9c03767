"""Greedy sparse recovery: subspace pursuit, orthogonal matching pursuit, and the
least-squares building blocks they share.

All solvers are deterministic: top-S selections break ties toward the lowest
index, and no internal randomness is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .forward import SparseImage

MAX_CONDITION = 1e12


class RankError(np.linalg.LinAlgError):
    """Raised when a support submatrix is numerically rank deficient."""


@dataclass
class RecoveryResult:
    estimate: SparseImage  # complex coefficient values on the final support
    support_history: list  # support (sorted ndarray) per iteration, index 0 = init
    residual_history: list  # residual energy ||y_res||^2 per iteration
    iterations: int
    reason: str  # "residual-below-eps" | "support-stable" | "max-iter"
    degraded: bool = False

    @property
    def support(self) -> np.ndarray:
        return self.estimate.support

    def real_image(self) -> np.ndarray:
        """Dense real-part view of the estimate, the reported image."""
        return self.estimate.dense().real


def select_top_s(matrix: np.ndarray, r: np.ndarray, s: int) -> np.ndarray:
    """Indices of the s largest |matrix^H r|, sorted ascending, ties to lowest index."""
    if s > matrix.shape[1]:
        raise ValueError(f"cannot select {s} columns from {matrix.shape[1]}")
    scores = np.abs(np.conj(r) @ matrix)  # |matrix^H r| without copying the matrix
    order = np.argsort(-scores, kind="stable")  # stable sort keeps ties in index order
    return np.sort(order[:s])


def ls_on_support(y: np.ndarray, a_sub: np.ndarray) -> np.ndarray:
    """Least-squares coefficients on a column subset via an orthogonal factorization."""
    coef, _, rank, sv = np.linalg.lstsq(a_sub, y, rcond=None)
    if rank < a_sub.shape[1] or (sv[-1] > 0 and sv[0] / sv[-1] > MAX_CONDITION):
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        raise RankError(
            f"support submatrix is rank deficient (rank {rank} of {a_sub.shape[1]}, "
            f"condition {cond:.3g})"
        )
    return coef


def residual(y: np.ndarray, matrix: np.ndarray, support) -> np.ndarray:
    """y minus its least-squares projection onto the selected columns."""
    a_sub = matrix[:, np.asarray(support, dtype=int)]
    return y - a_sub @ ls_on_support(y, a_sub)


def _result(y, matrix, support, history, res_hist, iterations, reason, degraded=False):
    support = np.sort(np.asarray(support, dtype=int))
    coef = ls_on_support(y, matrix[:, support])
    est = SparseImage(n_voxels=matrix.shape[1], support=support, values=coef)
    return RecoveryResult(
        estimate=est,
        support_history=history,
        residual_history=res_hist,
        iterations=iterations,
        reason=reason,
        degraded=degraded,
    )


def sp_recover(y: np.ndarray, matrix: np.ndarray, sparsity: int, eps: float = 0.0, max_iter: int = 50) -> RecoveryResult:
    """Subspace pursuit.

    Each iteration augments the support with the top-S matched-filter indices of
    the current residual, re-solves least squares on the (at most 2S) candidate
    columns, and keeps the S columns with the largest coefficient magnitudes.
    Stops when the residual energy drops below `eps`, the support stabilizes, or
    the residual stops improving (the previous support is then returned).
    """
    if sparsity < 1 or max_iter < 1 or eps < 0:
        raise ValueError("require sparsity >= 1, max_iter >= 1, eps >= 0")

    support = select_top_s(matrix, y, sparsity)
    history = [support]
    try:
        res = residual(y, matrix, support)
    except RankError:
        coef = np.zeros(sparsity, dtype=complex)
        est = SparseImage(n_voxels=matrix.shape[1], support=support, values=coef)
        return RecoveryResult(est, history, [float(np.vdot(y, y).real)], 0, "support-stable", degraded=True)
    res_hist = [float(np.vdot(res, res).real)]

    for it in range(1, max_iter + 1):
        if res_hist[-1] < eps:
            return _result(y, matrix, support, history, res_hist, it - 1, "residual-below-eps")
        extra = select_top_s(matrix, res, sparsity)
        candidates = np.union1d(support, extra)
        try:
            coef = ls_on_support(y, matrix[:, candidates])
            keep = np.argsort(-np.abs(coef), kind="stable")[:sparsity]
            new_support = np.sort(candidates[keep])
            new_res = residual(y, matrix, new_support)
        except RankError:
            return _result(y, matrix, support, history, res_hist, it - 1, "support-stable", degraded=True)
        new_energy = float(np.vdot(new_res, new_res).real)
        if np.array_equal(new_support, support):
            history.append(new_support)
            res_hist.append(new_energy)
            return _result(y, matrix, support, history, res_hist, it, "support-stable")
        if new_energy > res_hist[-1]:
            # residual got worse: keep the previous support
            return _result(y, matrix, support, history, res_hist, it, "support-stable")
        support, res = new_support, new_res
        history.append(support)
        res_hist.append(new_energy)

    reason = "residual-below-eps" if res_hist[-1] < eps else "max-iter"
    return _result(y, matrix, support, history, res_hist, max_iter, reason)


def omp_recover(y: np.ndarray, matrix: np.ndarray, sparsity: int, eps: float = 0.0, max_iter: int = 50) -> RecoveryResult:
    """Orthogonal matching pursuit: one matched-filter index per iteration with a
    full least-squares re-solve, until S indices are chosen or the residual energy
    falls below `eps`."""
    if sparsity < 1 or max_iter < 1 or eps < 0:
        raise ValueError("require sparsity >= 1, max_iter >= 1, eps >= 0")

    support = np.empty(0, dtype=int)
    res = y.copy()
    history = []
    res_hist = []
    reason = "max-iter"
    for it in range(1, max_iter + 1):
        scores = np.abs(np.conj(res) @ matrix)
        scores[support] = -1.0
        pick = int(np.argmax(scores))
        support = np.sort(np.append(support, pick))
        try:
            res = residual(y, matrix, support)
        except RankError:
            support = support[support != pick]
            if len(support) == 0:
                raise
            return _result(y, matrix, support, history, res_hist, it, "support-stable", degraded=True)
        history.append(support)
        res_hist.append(float(np.vdot(res, res).real))
        if res_hist[-1] < eps:
            reason = "residual-below-eps"
            break
        if len(support) == sparsity:
            reason = "support-stable"
            break
    return _result(y, matrix, support, history, res_hist, len(history), reason)


def default_eps(n_measurements: int, sigma2_eff: float, headroom: float = 1.1) -> float:
    """Residual-energy threshold: expected noise energy plus 10% headroom."""
    return headroom * n_measurements * sigma2_eff


def result_to_csv(result: RecoveryResult, truth: SparseImage, path) -> None:
    x_true = truth.dense()
    x_est = result.estimate.dense()
    true_set = set(int(i) for i in truth.support)
    est_set = set(int(i) for i in result.support)
    with open(path, "w") as fh:
        fh.write("voxel_index,true_value,estimated_re,estimated_im,in_true_support,in_estimated_support\n")
        for n in range(truth.n_voxels):
            fh.write(
                f"{n},{float(np.real(x_true[n]))!r},{x_est[n].real!r},{x_est[n].imag!r},"
                f"{int(n in true_set)},{int(n in est_set)}\n"
            )
