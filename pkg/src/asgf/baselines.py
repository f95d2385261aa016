"""Reference optimizers used for comparison with ASGF.

``es_minimize`` is the plain Monte Carlo evolution-strategy update.
``dgs_minimize`` is a fixed-hyperparameter directional Gaussian smoothing
optimizer: Gauss-Hermite directional derivatives over a fresh random basis
every iteration, constant learning rate and a geometric sigma schedule.
It is a reconstruction, not a port of any published DGS code.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from .optimizer import OptimizationResult, RunTrace, random_orthonormal_basis
from .quadrature import gauss_hermite_rule
from .smoothing import Objective, directional_derivative, mc_gradient

__all__ = ["EsConfig", "DgsConfig", "es_minimize", "dgs_minimize"]

STEP = "step"


@dataclass(frozen=True)
class EsConfig:
    sigma: float = 0.1
    learning_rate: float = 0.01
    sample_count: int = 20
    max_iterations: int = 10_000
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.sample_count < 1 or self.max_iterations < 1:
            raise ValueError("sample_count and max_iterations must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DgsConfig:
    """Fixed DGS hyperparameters.

    ``sigma_decay`` is the per-iteration relative shrink of sigma,
    ``sigma <- sigma * (1 - sigma_decay)``. ``eps_x`` stops the run once a
    step is shorter than it.
    """

    learning_rate: float = 0.01
    point_count: int = 5
    sigma: float = 1.0
    sigma_decay: float = 0.01
    max_iterations: int = 10_000
    eps_x: float = 1e-6
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.point_count < 3 or self.point_count % 2 == 0:
            raise ValueError("point_count must be an odd integer >= 3")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 <= self.sigma_decay < 1:
            raise ValueError("sigma_decay must lie in [0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def es_minimize(
    objective: Objective,
    x0,
    sigma: float,
    learning_rate: float,
    sample_count: int,
    max_iterations: int,
    rng: np.random.Generator,
    target_value: Optional[float] = None,
) -> OptimizationResult:
    """Monte Carlo ES: ``x <- x - (2 lr / (sigma M)) sum eps_m f(x + sigma eps_m)``.

    Each iteration costs ``sample_count`` calls plus one to evaluate the new
    iterate for best-so-far tracking.
    """
    if not sigma > 0 or learning_rate < 0 or sample_count < 1 or max_iterations < 1:
        raise ValueError("invalid ES parameters")
    start = objective.evaluations
    x = np.array(x0, dtype=float)
    best_x, best_f = x.copy(), objective(x)
    trace: List[RunTrace] = []
    status = "max_iter_reached"
    for i in range(1, max_iterations + 1):
        g = mc_gradient(objective, x, sigma, sample_count, rng)
        x = x - learning_rate * g
        f = objective(x)
        if f < best_f:
            best_x, best_f = x.copy(), f
        trace.append(
            RunTrace(i, best_f, f, sigma, learning_rate, objective.evaluations - start, STEP)
        )
        if target_value is not None and best_f <= target_value:
            status = "target_reached"
            break
    return OptimizationResult(best_x, best_f, trace, status, len(trace), objective.evaluations - start)


def dgs_minimize(
    objective: Objective,
    x0,
    config: DgsConfig,
    target_value: Optional[float] = None,
) -> OptimizationResult:
    """Directional Gaussian smoothing with fixed hyperparameters.

    Every iteration costs exactly ``d * point_count`` calls. The center node
    of the odd rule sits at the current iterate, so its value doubles as
    ``f(x_i)`` for best-so-far tracking at no extra cost; the best value
    therefore refers to iterates ``x_0 .. x_{n-1}``.
    """
    rng = np.random.default_rng(config.rng_seed)
    rule = gauss_hermite_rule(config.point_count)
    center = config.point_count // 2
    start = objective.evaluations
    x = np.array(x0, dtype=float)
    sigma = config.sigma
    best_x, best_f = x.copy(), np.inf
    trace: List[RunTrace] = []
    status = "max_iter_reached"
    for i in range(1, config.max_iterations + 1):
        basis = random_orthonormal_basis(x.size, rng)
        samples = [directional_derivative(objective, x, sigma, xi, rule) for xi in basis]
        f = float(samples[0].values[center])
        if f < best_f:
            best_x, best_f = x.copy(), f
        gradient = np.array([s.derivative_estimate for s in samples]) @ basis
        step = config.learning_rate * gradient
        trace.append(
            RunTrace(i, best_f, f, sigma, config.learning_rate, objective.evaluations - start, STEP)
        )
        if target_value is not None and best_f <= target_value:
            status = "target_reached"
            break
        x = x - step
        sigma *= 1.0 - config.sigma_decay
        if np.linalg.norm(step) < config.eps_x:
            status = "converged"
            break
    return OptimizationResult(best_x, best_f, trace, status, len(trace), objective.evaluations - start)
