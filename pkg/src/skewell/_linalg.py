"""Small dense linear-algebra helpers shared by the density modules."""

import numpy as np
from scipy import linalg

from .exceptions import DomainError, FactorizationError


def chol_upper(mat, sym_tol=1e-12):
    """Upper-triangular ``L`` with ``L' L = mat``; raises on non-SPD input."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[0] != mat.shape[1]:
        raise FactorizationError(f"matrix must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise FactorizationError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(mat))))
    if np.max(np.abs(mat - mat.T)) > sym_tol * scale:
        raise FactorizationError("matrix is not symmetric")
    try:
        return linalg.cholesky(mat, lower=False)
    except linalg.LinAlgError as err:
        raise FactorizationError("matrix is not positive definite") from err


def whiten(diff, chol):
    """Rows ``w`` with ``w' w = diff' Omega^{-1} diff`` for ``Omega = L' L``."""
    diff = np.asarray(diff, dtype=float)
    flat = diff.reshape(-1, chol.shape[0])
    w = linalg.solve_triangular(chol, flat.T, trans="T", lower=False).T
    return w.reshape(diff.shape)


def quad_form(diff, chol):
    w = whiten(diff, chol)
    return np.sum(w * w, axis=-1)


def is_correlation(mat, tol=1e-10):
    mat = np.asarray(mat, dtype=float)
    return mat.ndim == 2 and np.allclose(np.diag(mat), 1.0, atol=tol, rtol=0)


def as_vector(x, name, dim=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DomainError(f"{name} must be a vector")
    if dim is not None and x.size != dim:
        raise DomainError(f"{name} must have length {dim}, got {x.size}")
    return x


def as_matrix(x, name, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and dim == 1:
        x = x.reshape(1, 1)
    if x.shape != (dim, dim):
        raise DomainError(f"{name} must be {dim}x{dim}, got shape {x.shape}")
    return x
