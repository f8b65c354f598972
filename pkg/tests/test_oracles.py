import pytest
import sys
import os
import json
import numpy as np
from scipy import linalg

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import Graph, Tensor
from src.game import play, sample_coalitions
from src.oracles import (QuadraticSurrogate, case_sign_check, check_alpha_scaling, check_cases, check_clamp,
                         check_fourier, check_gradients, check_inclusion_exclusion, cholesky_definite,
                         closed_form_gap, jacobi_eigh, pipeline_vs_oracle, random_surrogate, run_verification,
                         split_case_check, svd_split)
from src.oracles import verify as verify_module
from src.utils.errors import ContractError, DimensionError, NotDefiniteError


def _spd(rng: np.random.Generator, d: int) -> np.ndarray:
    A = rng.normal(size=(d, d))
    return A @ A.T + 0.5 * np.eye(d)


@pytest.mark.parametrize("d", [1, 2, 5])
def test_cholesky_positive_definite(d):
    """Test LᵀL = H with sign +1."""
    H = _spd(np.random.default_rng(d), d)
    L, sign = cholesky_definite(H)
    assert sign == 1
    np.testing.assert_allclose(L.T @ L, H, atol=1e-10)
    assert np.allclose(L, np.triu(L))


def test_cholesky_negative_definite():
    """Test that -H is factorized when H is negative definite."""
    H = -_spd(np.random.default_rng(9), 3)
    L, sign = cholesky_definite(H)
    assert sign == -1
    np.testing.assert_allclose(L.T @ L, -H, atol=1e-10)


def test_cholesky_rejects_indefinite_and_malformed():
    """Test indefinite, non-square and non-symmetric inputs."""
    with pytest.raises(NotDefiniteError):
        cholesky_definite(np.diag([1.0, -1.0]))
    with pytest.raises(NotDefiniteError):
        cholesky_definite(np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        cholesky_definite(np.ones((2, 3)))
    with pytest.raises(ContractError):
        cholesky_definite(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("d", [2, 4, 8])
def test_jacobi_matches_scipy(d):
    """Test eigenvalues and reconstruction against scipy.linalg.eigh."""
    A = np.random.default_rng(d).normal(size=(d, d))
    H = (A + A.T) / 2.0
    values, vectors = jacobi_eigh(H)
    np.testing.assert_allclose(values, linalg.eigh(H, eigvals_only=True), atol=1e-9)
    np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, H, atol=1e-9)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(d), atol=1e-9)


def test_svd_split_parts():
    """Test H = H₊ + H₋ with semidefinite parts."""
    A = np.random.default_rng(3).normal(size=(4, 4))
    H = (A + A.T) / 2.0
    H_plus, H_minus = svd_split(H)
    np.testing.assert_allclose(H_plus + H_minus, H, atol=1e-9)
    assert np.all(linalg.eigh(H_plus, eigvals_only=True) > -1e-9)
    assert np.all(linalg.eigh(H_minus, eigvals_only=True) < 1e-9)


def test_closed_form_gap_hand_computed():
    """Test α² g_0ᵀ H g_1 for disjoint singletons."""
    H = np.array([[2.0, 1.0], [1.0, 2.0]])
    surrogate = QuadraticSurrogate(H, [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], alpha=0.5)
    assert closed_form_gap(surrogate, [0], [1]) == pytest.approx(0.25 * 1.0)
    assert closed_form_gap(surrogate, [0, 2], [1, 2]) == pytest.approx(0.25 * 1.0)
    assert closed_form_gap(surrogate, [0], [0]) == 0.0


def test_closed_form_gap_identity_orthogonal():
    """Test that H = I with orthogonal gradients gives a zero gap."""
    surrogate = QuadraticSurrogate(np.eye(2), [[1.0, 0.0], [0.0, 1.0]], alpha=1.0)
    assert closed_form_gap(surrogate, [0], [1]) == 0.0


def test_surrogate_validation():
    """Test mismatched and asymmetric surrogates."""
    with pytest.raises(DimensionError):
        QuadraticSurrogate(np.eye(2), np.ones((3, 3)), 0.1)
    with pytest.raises(ContractError):
        QuadraticSurrogate(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones((3, 2)), 0.1)
    with pytest.raises(ContractError):
        QuadraticSurrogate(np.eye(2), np.ones((3, 2)), 0.0)


def test_case_sign_positive_definite():
    """Test that parallel gradients under H = I give a positive gap."""
    report = case_sign_check(np.eye(2), [1.0, 0.0], [2.0, 0.0])
    assert report.definiteness == "positive"
    assert report.inner_product == pytest.approx(2.0)
    assert report.gap == pytest.approx(2.0)
    assert report.consistent


def test_case_sign_negative_definite():
    """Test H = -I with opposed gradients."""
    report = case_sign_check(-np.eye(2), [1.0, 0.0], [-1.0, 0.0])
    assert report.definiteness == "negative"
    assert report.gap == pytest.approx(1.0)
    assert report.consistent


def test_case_sign_inside_tolerance_band():
    """Test a gap just inside the tolerance, where a doubled inner product would fall outside it."""
    report = case_sign_check(np.eye(2), [1.0, 0.0], [0.75e-9, 1.0])
    assert report.inner_product == pytest.approx(0.75e-9, rel=1e-12)
    assert report.consistent


def test_case_sign_dimension_mismatch():
    """Test gradients of the wrong length."""
    with pytest.raises(DimensionError):
        case_sign_check(np.eye(2), [1.0, 0.0, 0.0], [1.0, 0.0])


def test_split_case_check_indefinite():
    """Test both eigen-subspaces of diag(2, -3)."""
    reports = split_case_check(np.diag([2.0, -3.0]), [1.0, 1.0], [1.0, -1.0])
    assert set(reports) == {"positive", "negative"}
    assert all(r.consistent for r in reports.values())
    assert reports["positive"].gap == pytest.approx(2.0)
    assert reports["negative"].gap == pytest.approx(3.0)


def test_pipeline_matches_closed_form():
    """Test the played gap against the closed form on random quads."""
    rng = np.random.default_rng(21)
    surrogate = random_surrogate(rng, d=3, n=10, alpha=0.2)
    assert pipeline_vs_oracle(surrogate, (2, 2, 1), rng, trials=10) < 1e-9


@pytest.mark.parametrize("factor", [0.5, 2.0])
def test_alpha_scaling_is_quadratic(factor):
    """Test that α → cα multiplies the played and the closed-form gap by c²."""
    rng = np.random.default_rng(27)
    surrogate = random_surrogate(rng, d=3, n=10, alpha=0.2)
    scaled = surrogate.with_alpha(factor * surrogate.alpha)
    assert scaled.alpha == pytest.approx(factor * 0.2)
    samples = surrogate.samples()
    quad = sample_coalitions(samples, (2, 2, 2), rng)
    theta = rng.normal(size=3)
    gaps = []
    for model in (surrogate, scaled):
        with Graph():
            gaps.append(play(model, model.params(theta), quad, samples[:1], model.config()).raw_gap.item())
    assert gaps[1] == pytest.approx(factor ** 2 * gaps[0], rel=1e-9, abs=1e-12)
    assert closed_form_gap(scaled, quad.S, quad.T) == pytest.approx(
        factor ** 2 * closed_form_gap(surrogate, quad.S, quad.T), rel=1e-12, abs=1e-15)
    assert check_alpha_scaling(surrogate, (2, 2, 2), rng, factors=(factor,), trials=10) < 1e-9


def test_random_surrogate_definiteness():
    """Test that the definite option yields a factorizable H of that sign."""
    rng = np.random.default_rng(22)
    assert cholesky_definite(random_surrogate(rng, d=4, definite=1).H)[1] == 1
    assert cholesky_definite(random_surrogate(rng, d=4, definite=-1).H)[1] == -1


def test_check_gradients_small():
    """Test the finite-difference check on a few networks."""
    assert check_gradients(np.random.default_rng(23), instances=2) < 1e-6


def test_check_cases_consistent():
    """Test that random definite Hessians report no inconsistency."""
    assert check_cases(np.random.default_rng(24), trials=60) == 0


def test_check_fourier():
    """Test the spectral identities on random images."""
    result = check_fourier(np.random.default_rng(25))
    assert result["identity"] <= 1e-8
    assert result["interpolation"] <= 1e-12
    assert result["parseval"] <= 1e-8


def test_check_clamp_matches_pipeline():
    """Test L_sm = max(0, independent gap) on the real pipeline."""
    assert check_clamp(np.random.default_rng(28), trials=3, seed=0) <= 1e-10


def test_check_clamp_flags_positive_sm_on_negative_gap(monkeypatch):
    """Test that a positive L_sm counts as a violation when the independent gap is negative."""
    class FixedOutcome:
        sm = Tensor(0.5)

    monkeypatch.setattr(verify_module, "play", lambda *args, **kwargs: FixedOutcome())
    monkeypatch.setattr(verify_module, "independent_gap", lambda *args, **kwargs: -0.2)
    assert check_clamp(np.random.default_rng(29), trials=2, seed=0) == pytest.approx(0.5)


def test_check_inclusion_exclusion():
    """Test that the coalition loss is modular in the samples."""
    assert check_inclusion_exclusion(np.random.default_rng(26), trials=5, seed=1) <= 1e-10


def test_run_verification_writes_report(tmp_path):
    """Test that every check passes and the table lands on disk."""
    table = run_verification(seed=0, clamp_trials=3, out_dir=tmp_path)
    assert set(table["criterion"]) == {1, 2, 3, 4, 5, 6}
    assert table["passed"].all()
    assert (tmp_path / "verification.csv").exists()
    report = json.loads((tmp_path / "verification.json").read_text())
    assert report["passed"] is True
    assert len(report["checks"]) == len(table)
