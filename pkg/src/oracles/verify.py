"""Exact checks of the pipeline against closed forms, and the verification table."""
import json
import logging
import time
from collections import OrderedDict
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..augment import build_augmented_pool, dft2, mix_amplitude, mix_spectrum, IdAllocator
from ..autodiff import Graph, Tensor, finite_difference_check, grad, no_grad
from ..data import default_manifest, generate, leave_one_out
from ..data.sample import Sample
from ..game import (ClassifierGame, CoalitionInputs, CoalitionQuad, GameConfig, GameModel,
                    coalition_loss, fit_coalition_sizes, meta_split, meta_test_loss, play,
                    sample_coalitions)
from ..model import LayerSpec, ModelParams, forward, init_params
from .cases import case_sign_check
from .surrogate import QuadraticSurrogate, closed_form_gap

logger = logging.getLogger(__name__)


def independent_gap(model: GameModel, params: Mapping[str, Tensor], quad: CoalitionQuad,
                    meta_test: Sequence[Sample], alpha: float) -> float:
    """Raw gap recomputed branch by branch from fresh copies of θ.

    Shares no tensors with the pipeline: every branch gets its own copy of θ
    and its own inputs, and the virtual step is done on plain arrays.
    """
    test = CoalitionInputs(meta_test, track=False)
    values = {}
    for name, coalition in quad.branches().items():
        fresh = OrderedDict((n, Tensor(p.data.copy(), requires_grad=True, name=n)) for n, p in params.items())
        loss = coalition_loss(model, fresh, CoalitionInputs(coalition, track=False), coalition)
        gradients = grad(loss, list(fresh.values()))
        with no_grad():
            virtual = OrderedDict((n, Tensor(fresh[n].data - alpha * g.data, name=n))
                                  for n, g in zip(fresh, gradients))
            values[name] = meta_test_loss(model, virtual, test).item()
    return values["union"] + values["intersection"] - values["S"] - values["T"]


def _pipeline_gap(surrogate: QuadraticSurrogate, quad: CoalitionQuad, theta: np.ndarray) -> float:
    with Graph():
        outcome = play(surrogate, surrogate.params(theta), quad, surrogate.samples()[:1], surrogate.config())
        return outcome.raw_gap.item()


def pipeline_vs_oracle(surrogate: QuadraticSurrogate, sizes: Tuple[int, int, int],
                       rng: np.random.Generator, trials: int = 100) -> float:
    """Worst |pipeline raw gap - closed_form_gap| over random quads and θ."""
    samples = surrogate.samples()
    worst = 0.0
    for _ in range(trials):
        quad = sample_coalitions(samples, sizes, rng)
        theta = rng.normal(size=surrogate.dim)
        pipeline = _pipeline_gap(surrogate, quad, theta)
        worst = max(worst, abs(pipeline - closed_form_gap(surrogate, quad.S, quad.T)))
    return worst


def check_alpha_scaling(surrogate: QuadraticSurrogate, sizes: Tuple[int, int, int], rng: np.random.Generator,
                        factors: Sequence[float] = (0.5, 2.0), trials: int = 20) -> float:
    """Worst deviation from gap(cα) = c²·gap(α), for the pipeline and the closed form alike."""
    samples = surrogate.samples()
    worst = 0.0
    for _ in range(trials):
        quad = sample_coalitions(samples, sizes, rng)
        theta = rng.normal(size=surrogate.dim)
        pipeline = _pipeline_gap(surrogate, quad, theta)
        closed = closed_form_gap(surrogate, quad.S, quad.T)
        for factor in factors:
            scaled = surrogate.with_alpha(factor * surrogate.alpha)
            worst = max(worst, abs(_pipeline_gap(scaled, quad, theta) - factor ** 2 * pipeline),
                        abs(closed_form_gap(scaled, quad.S, quad.T) - factor ** 2 * closed))
    return worst


def random_surrogate(rng: np.random.Generator, d: int = 2, n: int = 12, alpha: float = 0.1,
                     definite: Optional[int] = None) -> QuadraticSurrogate:
    """Random symmetric (or ±definite) H with Gaussian per-sample gradients."""
    A = rng.normal(size=(d, d))
    if definite is None:
        H = (A + A.T) / 2.0
    else:
        H = definite * (A @ A.T + 0.1 * d * np.eye(d))
    return QuadraticSurrogate(H, rng.normal(size=(n, d)), alpha)


def _smooth_objective(spec: LayerSpec, x: np.ndarray) -> Callable:
    def objective(tensors):
        out = forward(ModelParams(spec, tensors), x)
        return out.sum() + 0.5 * (out * out).mean()
    return objective


def check_gradients(rng: np.random.Generator, instances: int = 20) -> float:
    """Finite differences on random tanh MLPs with positive weights and inputs."""
    worst = 0.0
    for _ in range(instances):
        spec = LayerSpec(input_dim=4, num_classes=3, hidden=(5,), activation="tanh")
        point = OrderedDict((name, rng.uniform(0.1, 1.0, size=shape)) for name, shape in spec.shapes().items())
        x = rng.uniform(0.1, 1.0, size=(3, 4))
        worst = max(worst, finite_difference_check(_smooth_objective(spec, x), point, step=1e-5))
    return worst


def _synthetic_task(seed: int, samples_per_domain: int = 12):
    dataset = generate(default_manifest(samples_per_domain=samples_per_domain, seed=seed))
    sources, _ = leave_one_out(dataset, dataset.domain_ids[-1])
    spec = LayerSpec(input_dim=int(np.prod(dataset.manifest.image_shape)),
                     num_classes=dataset.manifest.num_classes, hidden=(8,))
    return sources, spec


def _random_quad(sources, rng: np.random.Generator, allocator: IdAllocator, batch_size: int = 16):
    originals = [s for samples in sources.values() for s in samples]
    batch = [originals[i] for i in rng.choice(len(originals), size=batch_size, replace=False)]
    by_domain = OrderedDict()
    for sample in batch:
        by_domain.setdefault(sample.domain_id, []).append(sample)
    augmented = build_augmented_pool(by_domain, batch_size, rng, 1.0, allocator)
    split = meta_split(by_domain, augmented, 1, rng)
    sizes = fit_coalition_sizes(len(split.pool), batch_size)
    return sample_coalitions(split.pool, sizes, rng), split.meta_test


def check_clamp(rng: np.random.Generator, trials: int = 1000, seed: int = 0) -> float:
    """Worst violation of L_sm == max(0, independent gap) over random quads."""
    sources, spec = _synthetic_task(seed)
    model = ClassifierGame(spec)
    allocator = IdAllocator()
    config = GameConfig(alpha=0.05)
    worst = 0.0
    for _ in range(trials):
        params = init_params(spec, rng)
        quad, meta_test = _random_quad(sources, rng, allocator)
        with Graph():
            sm = play(model, params, quad, meta_test, config).sm.item()
        reference = independent_gap(model, params, quad, meta_test, config.alpha)
        worst = max(worst, -sm, abs(sm - max(0.0, reference)))
    return worst


def check_inclusion_exclusion(rng: np.random.Generator, trials: int = 100, seed: int = 0) -> float:
    """Worst |F(S∪T) + F(S∩T) - F(S) - F(T)| over random quads."""
    sources, spec = _synthetic_task(seed)
    model = ClassifierGame(spec)
    pool = [s for samples in sources.values() for s in samples]
    worst = 0.0
    with no_grad():
        for _ in range(trials):
            params = init_params(spec, rng, requires_grad=False)
            sizes = tuple(int(v) for v in rng.integers(0, 5, size=3))
            sizes = (sizes[0], max(1, sizes[1]), sizes[2])
            quad = sample_coalitions(pool, sizes, rng)
            inputs = CoalitionInputs(quad.participants(), track=False)
            F = {name: coalition_loss(model, params, inputs, c).item() for name, c in quad.branches().items()}
            worst = max(worst, abs(F["union"] + F["intersection"] - F["S"] - F["T"]))
    return worst


def check_cases(rng: np.random.Generator, trials: int = 1000) -> int:
    """Number of inconsistent sign reports over random definite H."""
    failures = 0
    for trial in range(trials):
        d = (2, 4, 8)[trial % 3]
        sign = 1 if rng.random() < 0.5 else -1
        surrogate = random_surrogate(rng, d=d, n=2, definite=sign)
        report = case_sign_check(surrogate, surrogate.gradients[0], surrogate.gradients[1])
        failures += 0 if report.consistent else 1
    return failures


def check_fourier(rng: np.random.Generator) -> Dict[str, float]:
    """λ=0 identity, amplitude interpolation and Parseval on random images."""
    x_i = rng.uniform(size=(3, 8, 8))
    x_j = rng.uniform(size=(3, 8, 8))
    identity = float(np.max(np.abs(mix_amplitude(x_i, x_j, 0.0) - x_i)))
    interpolation = 0.0
    for lam in (0.25, 0.5, 0.75):
        expected = (1 - lam) * dft2(x_i).amplitude + lam * dft2(x_j).amplitude
        interpolation = max(interpolation, float(np.max(np.abs(mix_spectrum(x_i, x_j, lam).amplitude - expected))))
    energy = np.sum(x_i ** 2) * x_i.shape[-1] * x_i.shape[-2]
    parseval = float(abs(energy - np.sum(dft2(x_i).amplitude ** 2)) / energy)
    return {"identity": identity, "interpolation": interpolation, "parseval": parseval}


def run_verification(seed: int = 0, clamp_trials: int = 1000,
                     out_dir: Optional[Union[str, Path]] = None) -> pd.DataFrame:
    """Run every exact check and tabulate pass/fail.

    Args:
        seed: Seed for all random trials
        clamp_trials: Iterations of the clamp check
        out_dir: Where to write verification.csv and verification.json

    Returns:
        DataFrame with one row per check
    """
    rng = np.random.default_rng(seed)
    rows: List[Dict] = []

    def record(check: str, criterion: int, tolerance: float, trials: int, fn: Callable):
        start = time.perf_counter()
        worst = fn()
        elapsed = time.perf_counter() - start
        rows.append({"check": check, "criterion": criterion, "worst": float(worst),
                     "tolerance": tolerance, "trials": trials, "passed": bool(worst <= tolerance),
                     "seconds": round(elapsed, 3)})
        logger.info(f"{check}: worst={worst:.3e} tolerance={tolerance:.0e}")

    record("finite-difference", 1, 1e-6, 20, lambda: check_gradients(rng, 20))
    surrogate = QuadraticSurrogate(2.0 * np.eye(2), rng.normal(size=(12, 2)), 0.1)
    record("pipeline-vs-oracle", 2, 1e-9, 100, lambda: pipeline_vs_oracle(surrogate, (2, 2, 2), rng, 100))
    record("alpha-scaling", 2, 1e-9, 20, lambda: check_alpha_scaling(surrogate, (2, 2, 2), rng, (0.5, 2.0), 20))
    record("clamp-semantics", 3, 1e-10, clamp_trials, lambda: check_clamp(rng, clamp_trials, seed))
    record("case-consistency", 4, 0, 1000, lambda: check_cases(rng, 1000))
    fourier = check_fourier(rng)
    rows.extend([
        {"check": "fourier-identity", "criterion": 5, "worst": fourier["identity"], "tolerance": 1e-8,
         "trials": 1, "passed": fourier["identity"] <= 1e-8, "seconds": 0.0},
        {"check": "fourier-interpolation", "criterion": 5, "worst": fourier["interpolation"], "tolerance": 1e-12,
         "trials": 3, "passed": fourier["interpolation"] <= 1e-12, "seconds": 0.0},
        {"check": "fourier-parseval", "criterion": 5, "worst": fourier["parseval"], "tolerance": 1e-8,
         "trials": 1, "passed": fourier["parseval"] <= 1e-8, "seconds": 0.0},
    ])
    record("inclusion-exclusion", 6, 1e-10, 100, lambda: check_inclusion_exclusion(rng, 100, seed))

    table = pd.DataFrame(rows)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        table.to_csv(out_dir / "verification.csv", index=False)
        with open(out_dir / "verification.json", "w", encoding="utf-8") as f:
            json.dump({"seed": seed, "passed": bool(table["passed"].all()),
                       "checks": table.to_dict(orient="records")}, f, indent=2, sort_keys=True)
        logger.info(f"Wrote verification report to {out_dir}")
    return table
