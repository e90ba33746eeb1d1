"""Dense rank-1 decomposition primitives for matrices and 3-way tensors.

Only the leading factor of each mode is ever needed downstream, so the
decompositions here run power iteration on the Gram matrix of the relevant
unfolding instead of a full SVD.  All vectors come back sign-normalized so
that repeated runs on the same data are bitwise comparable and eigenvector
distances are well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000

# Mode names for a Space x Feature x Time tensor, in axis order.
MODE_AXES = {"space": 0, "feature": 1, "time": 2}

# Squaring the Gram matrix a few times widens the spectral gap so that
# near-tied leading singular values still settle within max_iter.  The
# eigenvectors are unchanged; eigenvalues are re-derived from the original
# Gram via the Rayleigh quotient.
_SQUARINGS = 4


class NonConvergence(RuntimeError):
    """Power iteration produced non-finite values (pathological input)."""


class SingularTriplet(NamedTuple):
    sigma: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True, eq=False)
class EigenSummary:
    """Principal eigenvalue plus principal per-mode eigenvectors.

    ``time_vector`` is ``None`` for matrix summaries.  ``degenerate`` marks
    results where power iteration hit the iteration cap before the leading
    value settled (near-tied spectrum); the estimate is still returned since
    callers only compare magnitudes.
    """

    eigenvalue: float
    space_vector: np.ndarray
    feature_vector: np.ndarray
    time_vector: np.ndarray | None = None
    degenerate: bool = False


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _as_tensor3(t) -> np.ndarray:
    a = np.asarray(t, dtype=float)
    if a.ndim != 3 or min(a.shape) < 1:
        raise ValueError(f"expected a 3-d tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("tensor entries must be finite")
    return a


def _basis(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[0] = 1.0
    return e


def sign_normalize(vec: np.ndarray) -> np.ndarray:
    """Fix the sign of a vector: entry sum >= 0, ties broken so the
    largest-magnitude entry is positive.  Idempotent."""
    s = float(vec.sum())
    if s < 0.0:
        return -vec
    if s == 0.0:
        k = int(np.argmax(np.abs(vec)))
        if vec[k] < 0.0:
            return -vec
    return vec


def _leading_eigpair(gram: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, bool]:
    """Leading eigenpair of a symmetric PSD matrix by power iteration.

    Returns (eigenvalue, unit eigenvector, converged).  Convergence is
    measured on the relative change of sqrt(Rayleigh quotient), i.e. the
    singular value callers derive from this eigenvalue, with a secondary
    check on the iterate itself so the vector is at least as settled.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    n = gram.shape[0]
    scale = float(np.abs(gram).max())
    if scale == 0.0:
        return 0.0, _basis(n), True
    if not np.isfinite(scale):
        raise NonConvergence("Gram matrix contains non-finite entries")

    g = gram / scale
    for _ in range(_SQUARINGS):
        squared = g @ g
        peak = float(np.abs(squared).max())
        if peak == 0.0 or not np.isfinite(peak):
            break
        g = squared / peak

    x = np.full(n, 1.0 / math.sqrt(n))
    if float(np.linalg.norm(g @ x)) == 0.0:
        # Uniform start sits in the nullspace; restart from the strongest column.
        k = int(np.argmax(np.linalg.norm(g, axis=0)))
        x = g[:, k] / float(np.linalg.norm(g[:, k]))

    sigma_prev = -1.0
    converged = False
    for _ in range(max_iter):
        y = g @ x
        norm_y = float(np.linalg.norm(y))
        if not np.isfinite(norm_y):
            raise NonConvergence("power iteration diverged")
        if norm_y == 0.0:
            break
        step = float(np.linalg.norm(y / norm_y - x))
        x = y / norm_y
        rayleigh = float(x @ (gram @ x))
        sigma = math.sqrt(max(rayleigh, 0.0))
        # The Rayleigh quotient settles quadratically faster than the vector,
        # so require the iterate itself to be still as well.
        if sigma_prev >= 0.0 and abs(sigma - sigma_prev) <= tol * max(sigma, 1e-300) and step <= tol:
            converged = True
            sigma_prev = sigma
            break
        sigma_prev = sigma

    eigval = max(float(x @ (gram @ x)), 0.0)
    return eigval, x, converged


def leading_singular_triplet(
    m, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> SingularTriplet:
    """Largest singular value and sign-normalized singular vectors of ``m``.

    The Gram matrix of the smaller mode is power-iterated; the other
    vector is recovered by one multiplication.  A zero matrix yields
    sigma = 0 with canonical basis vectors so that an empty day of data
    cannot crash a caller.
    """
    a = _as_matrix(m)
    rows, cols = a.shape
    if not np.any(a):
        return SingularTriplet(0.0, _basis(rows), _basis(cols))
    if rows <= cols:
        eigval, u, _ = _leading_eigpair(a @ a.T, tol, max_iter)
        sigma = math.sqrt(eigval)
        other = a.T @ u
        norm_other = float(np.linalg.norm(other))
        v = other / norm_other if norm_other > 0.0 else _basis(cols)
    else:
        eigval, v, _ = _leading_eigpair(a.T @ a, tol, max_iter)
        sigma = math.sqrt(eigval)
        other = a @ v
        norm_other = float(np.linalg.norm(other))
        u = other / norm_other if norm_other > 0.0 else _basis(rows)
    return SingularTriplet(sigma, sign_normalize(u), sign_normalize(v))


def _mode_axis(mode) -> int:
    if isinstance(mode, str):
        try:
            return MODE_AXES[mode]
        except KeyError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(MODE_AXES)}") from None
    axis = int(mode)
    if axis not in (0, 1, 2):
        raise ValueError(f"mode axis must be 0, 1 or 2, got {axis}")
    return axis


def mode_unfold(t, mode) -> np.ndarray:
    """Matricize a 3-way tensor along one mode.

    Row i of the result collects every entry whose index along ``mode`` is
    i; columns are ordered with the first remaining mode varying fastest.
    """
    a = _as_tensor3(t)
    axis = _mode_axis(mode)
    moved = np.moveaxis(a, axis, 0)
    return moved.transpose(0, 2, 1).reshape(moved.shape[0], -1)


def mode_fold(m, mode, shape) -> np.ndarray:
    """Inverse of :func:`mode_unfold` for a tensor of the given shape."""
    a = _as_matrix(m)
    axis = _mode_axis(mode)
    remaining = [shape[i] for i in range(3) if i != axis]
    moved = a.reshape(shape[axis], remaining[1], remaining[0]).transpose(0, 2, 1)
    return np.moveaxis(moved, 0, axis)


def hosvd_rank1(t, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> EigenSummary:
    """Rank-1 higher-order SVD of a Space x Feature x Time tensor.

    Each mode's vector is the sign-normalized leading left singular vector
    of that mode's unfolding; the eigenvalue is the absolute value of the
    1x1x1 core obtained by contracting the tensor with all three vectors.
    """
    a = _as_tensor3(t)
    if not np.any(a):
        return EigenSummary(0.0, _basis(a.shape[0]), _basis(a.shape[1]), _basis(a.shape[2]))
    vectors: list[np.ndarray] = []
    degenerate = False
    for axis in range(3):
        unfolding = mode_unfold(a, axis)
        _, vec, converged = _leading_eigpair(unfolding @ unfolding.T, tol, max_iter)
        vectors.append(sign_normalize(vec))
        degenerate = degenerate or not converged
    core = float(np.einsum("ijk,i,j,k->", a, *vectors))
    return EigenSummary(abs(core), vectors[0], vectors[1], vectors[2], degenerate)


def matrix_summary(m, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> EigenSummary:
    """EigenSummary of a Space x Feature matrix (leading singular triplet)."""
    sigma, u, v = leading_singular_triplet(m, tol, max_iter)
    return EigenSummary(sigma, u, v, None)
