"""Dense linear algebra and Gaussian sampling shared by the filters.

Matrices are 2-D float64 ndarrays (row-major), vectors are 1-D float64
ndarrays. Everything here targets the small state dimensions (1-4) used by
the assimilation routines, not BLAS-level performance.

Random numbers come from ``numpy.random.Generator`` streams (PCG64 bit
generator, standard normals via numpy's ziggurat sampler). A stream built
with :func:`rng_stream` and a fixed seed reproduces every draw bit-for-bit.
"""

from __future__ import annotations

import numpy as np

# Pivot magnitudes below this are treated as exact zeros during elimination.
SINGULAR_PIVOT_TOL = 1e-12


class SingularMatrixError(ValueError):
    """Matrix is singular (or numerically indistinguishable from singular)."""


class NotPositiveDefiniteError(ValueError):
    """Matrix is not symmetric positive definite."""


def rng_stream(seed) -> np.random.Generator:
    """Deterministic random stream: identical seed, identical draw sequence.

    ``seed`` may be an int or a sequence of ints (handy for deriving
    independent substreams, e.g. ``rng_stream([seed, lane])``).
    """
    return np.random.default_rng(seed)


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    return a


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with an explicit inner-dimension check."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def transpose(a: np.ndarray) -> np.ndarray:
    """Transpose of a 2-D matrix."""
    return _as_matrix(a).T.copy()


def trace(a: np.ndarray) -> float:
    """Sum of the diagonal of a square matrix."""
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace needs a square matrix, got {a.shape}")
    return float(np.trace(a))


def invert(a: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix by Gauss-Jordan elimination.

    Uses partial pivoting; raises :class:`SingularMatrixError` when the best
    available pivot magnitude drops below ``SINGULAR_PIVOT_TOL``.
    """
    a = _as_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError(f"cannot invert non-square matrix of shape {a.shape}")
    aug = np.hstack([a, np.eye(n)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot_row, col]) < SINGULAR_PIVOT_TOL:
            raise SingularMatrixError(f"singular matrix (pivot {aug[pivot_row, col]:.3e} in column {col})")
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        aug[col] /= aug[col, col]
        factors = aug[:, col].copy()
        factors[col] = 0.0
        aug -= np.outer(factors, aug[col])
    return aug[:, n:]


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == a for symmetric positive definite a.

    Raises :class:`NotPositiveDefiniteError` as soon as a diagonal pivot is
    not strictly positive.
    """
    a = _as_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError(f"cholesky needs a square matrix, got {a.shape}")
    lower = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(f"non-positive pivot {pivot:.3e} at diagonal {j}")
        lower[j, j] = np.sqrt(pivot)
        lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def sample_mvn(mean: np.ndarray, cov: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw from N(mean, cov) as mean + L @ xi, L the Cholesky factor.

    An exactly-zero covariance returns ``mean`` unchanged without consuming
    any draws from ``rng``, so noise-free runs are rng-independent.
    """
    mean = np.asarray(mean, dtype=float)
    cov = _as_matrix(cov, "cov")
    if mean.ndim != 1 or cov.shape != (mean.shape[0], mean.shape[0]):
        raise ValueError(f"shape mismatch: mean {mean.shape} vs cov {cov.shape}")
    if not cov.any():
        return mean.copy()
    lower = cholesky(cov)
    return mean + lower @ rng.standard_normal(mean.shape[0])
