"""Definite factorizations and eigen-splitting of symmetric matrices."""
import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from ..utils.errors import ContractError, DimensionError, NotDefiniteError

logger = logging.getLogger(__name__)


def _symmetric(H) -> np.ndarray:
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"need a square matrix, got shape {H.shape}")
    if np.max(np.abs(H - H.T), initial=0.0) > 1e-12:
        raise ContractError("matrix is not symmetric")
    return H


def cholesky_definite(H) -> Tuple[np.ndarray, int]:
    """Upper-triangular L with LᵀL = sign·H.

    Tries H, then -H.

    Returns:
        (L, sign) with sign +1 for positive definite H, -1 for negative definite
    """
    H = _symmetric(H)
    for sign in (1, -1):
        try:
            L = linalg.cholesky(sign * H, lower=False)
        except linalg.LinAlgError:
            continue
        if np.all(np.diag(L) > 0):
            return L, sign
    raise NotDefiniteError("matrix is neither positive nor negative definite")


def jacobi_eigh(H, tol: float = 1e-12, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition by cyclic Jacobi rotations.

    Args:
        H: Symmetric matrix
        tol: Stop once the off-diagonal Frobenius norm falls below this
        max_sweeps: Upper bound on full sweeps

    Returns:
        (eigenvalues ascending, eigenvectors as columns)
    """
    A = _symmetric(H).copy()
    n = A.shape[0]
    V = np.eye(n)
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(A ** 2) - np.sum(np.diag(A) ** 2))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rotation = np.eye(n)
                rotation[p, p] = rotation[q, q] = c
                rotation[p, q] = s
                rotation[q, p] = -s
                A = rotation.T @ A @ rotation
                V = V @ rotation
    else:
        logger.warning(f"Jacobi iteration stopped after {max_sweeps} sweeps")
    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    return values[order], V[:, order]


def svd_split(H) -> Tuple[np.ndarray, np.ndarray]:
    """H = H₊ + H₋ with H₊ ⪰ 0 built from positive eigenvalues, H₋ ⪯ 0 from the rest."""
    values, vectors = jacobi_eigh(H)
    positive = np.where(values > 0, values, 0.0)
    negative = np.where(values < 0, values, 0.0)
    H_plus = (vectors * positive) @ vectors.T
    H_minus = (vectors * negative) @ vectors.T
    return H_plus, H_minus
