"""Analytical oracles for the supermodularity regularizer."""
from .surrogate import QuadraticSurrogate, closed_form_gap
from .linalg import cholesky_definite, jacobi_eigh, svd_split
from .cases import CaseReport, case_sign_check, split_case_check
from .verify import (check_alpha_scaling, check_cases, check_clamp, check_fourier, check_gradients,
                     check_inclusion_exclusion, independent_gap, pipeline_vs_oracle,
                     random_surrogate, run_verification)

__all__ = [
    'QuadraticSurrogate',
    'closed_form_gap',
    'cholesky_definite',
    'jacobi_eigh',
    'svd_split',
    'CaseReport',
    'case_sign_check',
    'split_case_check',
    'check_alpha_scaling',
    'check_cases',
    'check_clamp',
    'check_fourier',
    'check_gradients',
    'check_inclusion_exclusion',
    'independent_gap',
    'pipeline_vs_oracle',
    'random_surrogate',
    'run_verification',
]
