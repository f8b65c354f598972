"""Sign relations between the gap and the Cholesky-transformed gradients."""
from dataclasses import asdict, dataclass
from typing import Dict, Union

import numpy as np

from ..utils.errors import DimensionError
from .linalg import cholesky_definite, jacobi_eigh
from .surrogate import QuadraticSurrogate

SIGN_TOLERANCE = 1e-9


@dataclass
class CaseReport:
    """Outcome of one sign check.

    Attributes:
        definiteness: 'positive' or 'negative'
        inner_product: ∇̃_iᵀ∇̃_j with ∇̃ = L g under the factor of ±H
        gap: α² g_iᵀ H g_j
        consistent: Whether the gap sign matches the relation for this case
    """
    definiteness: str
    inner_product: float
    gap: float
    consistent: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _nonpositive(value: float, scale: float) -> bool:
    return value <= SIGN_TOLERANCE * scale


def case_sign_check(surrogate: Union[QuadraticSurrogate, np.ndarray], g_i, g_j,
                    alpha: float = None) -> CaseReport:
    """Check the gap sign against the transformed inner product.

    For H ≻ 0 the gap is non-positive exactly when ∇̃_iᵀ∇̃_j + ∇̃_jᵀ∇̃_i is;
    for H ≺ 0 exactly when ∇̃_iᵀ∇̃_j is non-negative. Both sides are compared
    on the scale of g_iᵀHg_j (half the symmetric sum) under one tolerance.

    Args:
        surrogate: Surrogate (supplies H and α) or a bare H
        g_i, g_j: Gradients of the two wing samples
        alpha: Step size when a bare H is given (default 1)
    """
    if isinstance(surrogate, QuadraticSurrogate):
        H, alpha = surrogate.H, surrogate.alpha
    else:
        H, alpha = np.asarray(surrogate, dtype=np.float64), 1.0 if alpha is None else alpha
    g_i = np.asarray(g_i, dtype=np.float64).reshape(-1)
    g_j = np.asarray(g_j, dtype=np.float64).reshape(-1)
    if g_i.shape != (H.shape[0],) or g_j.shape != (H.shape[0],):
        raise DimensionError(f"gradients must have {H.shape[0]} components")
    L, sign = cholesky_definite(H)
    t_i, t_j = L @ g_i, L @ g_j
    inner = float(t_i @ t_j)
    gap = float(alpha ** 2 * g_i @ H @ g_j)

    scale = np.linalg.norm(H, 2) * np.linalg.norm(g_i) * np.linalg.norm(g_j)
    gap_nonpositive = _nonpositive(gap / alpha ** 2, scale)
    if sign > 0:
        consistent = gap_nonpositive == _nonpositive(inner, scale)
    else:
        consistent = gap_nonpositive == _nonpositive(-inner, scale)
    return CaseReport("positive" if sign > 0 else "negative", inner, gap, bool(consistent))


def split_case_check(H, g_i, g_j, alpha: float = 1.0) -> Dict[str, CaseReport]:
    """case_sign_check on the positive and negative eigen-subspaces of an indefinite H."""
    values, vectors = jacobi_eigh(H)
    g_i = np.asarray(g_i, dtype=np.float64)
    g_j = np.asarray(g_j, dtype=np.float64)
    reports = {}
    for part, mask in (("positive", values > 0), ("negative", values < 0)):
        if not np.any(mask):
            continue
        basis = vectors[:, mask]
        reduced = np.diag(values[mask])
        reports[part] = case_sign_check(reduced, basis.T @ g_i, basis.T @ g_j, alpha)
    return reports
