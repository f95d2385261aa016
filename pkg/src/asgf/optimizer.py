"""Adaptive stochastic gradient-free (ASGF) minimization.

Each iteration estimates the smoothed gradient along an orthonormal basis
whose first row follows the previous smoothed gradient (the main
direction) while the remaining rows are a fresh random completion. The
main direction uses Gauss-Hermite rules of growing size until consecutive
estimates agree; the auxiliary directions use a small fixed rule. The step
size is ``sigma / L`` with ``L`` a running average of the local Lipschitz
estimate along the main direction, and ``sigma`` itself is adapted from
the ratio of directional derivatives to local Lipschitz constants.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterator, List, Optional, Sequence

import numpy as np

from .quadrature import gauss_hermite_rule
from .smoothing import DirectionalSample, Objective, directional_derivative

__all__ = [
    "AsgfConfig",
    "OptimizerState",
    "StepReport",
    "RunTrace",
    "OptimizationResult",
    "random_orthonormal_basis",
    "complete_basis",
    "adaptive_main_derivative",
    "update_learning_rate",
    "initial_state",
    "asgf_step",
    "update_parameters",
    "iterate_asgf",
    "minimize",
]

logger = logging.getLogger(__name__)

SIGMA_DECREASED = "sigma_decreased"
SIGMA_INCREASED = "sigma_increased"
THRESHOLDS_TIGHTENED = "thresholds_tightened"
RESET = "reset"
TERMINATED = "terminated"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class AsgfConfig:
    """Hyperparameters of ASGF. Defaults are the values used for every
    benchmark; only ``sigma0`` is problem dependent (a tenth of the
    diameter of the sampling box is a good start)."""

    sigma0: float = 1.0
    gamma_sigma: float = 0.9
    aux_point_count: int = 5
    A0: float = 0.1
    B0: float = 0.9
    A_minus: float = 0.95
    A_plus: float = 1.02
    B_minus: float = 0.98
    B_plus: float = 1.01
    gamma_L: float = 0.9
    reset_budget: int = 2
    reset_factor: float = 0.01
    eps_m: float = 0.1
    eps_x: float = 1e-6
    max_iterations: int = 10_000
    max_main_points: int = 41
    rng_seed: Optional[int] = None

    def __post_init__(self):
        problems = []
        if not self.sigma0 > 0:
            problems.append("sigma0 must be positive")
        if not 0 < self.gamma_sigma < 1:
            problems.append("gamma_sigma must lie in (0, 1)")
        if self.aux_point_count < 3 or self.aux_point_count % 2 == 0:
            problems.append("aux_point_count must be an odd integer >= 3")
        if not (0 < self.A0 < 1 and 0 < self.B0 < 1 and self.A0 < self.B0):
            problems.append("need 0 < A0 < B0 < 1")
        if not self.A_minus < 1 < self.A_plus:
            problems.append("need A_minus < 1 < A_plus")
        if not self.B_minus < 1 < self.B_plus:
            problems.append("need B_minus < 1 < B_plus")
        if not 0 <= self.gamma_L < 1:
            problems.append("gamma_L must lie in [0, 1)")
        if self.reset_budget < 0:
            problems.append("reset_budget must be >= 0")
        if not 0 < self.reset_factor < 1:
            problems.append("reset_factor must lie in (0, 1)")
        if not self.eps_m > 0 or not self.eps_x > 0:
            problems.append("eps_m and eps_x must be positive")
        if self.max_iterations < 1:
            problems.append("max_iterations must be positive")
        if self.max_main_points < 5 or self.max_main_points % 2 == 0:
            problems.append("max_main_points must be an odd integer >= 5")
        if problems:
            raise ValueError("invalid AsgfConfig: " + "; ".join(problems))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "AsgfConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ValueError(f"unknown AsgfConfig keys: {sorted(unknown)}")
        return cls(**values)


@dataclass
class OptimizerState:
    """Everything ASGF carries from one iteration to the next.

    ``averaged_lipschitz`` is ``None`` until the first step sets it.
    """

    iterate: np.ndarray
    best_point: np.ndarray
    best_value: float
    sigma: float
    basis: np.ndarray
    averaged_lipschitz: Optional[float]
    threshold_low: float
    threshold_high: float
    resets_remaining: int
    rng: np.random.Generator = field(repr=False)
    iteration: int = 0
    evaluations: int = 0
    current_value: float = math.nan


@dataclass
class StepReport:
    gradient: np.ndarray
    sigma: float
    learning_rate: float
    main_point_count: int
    main_converged: bool
    lipschitz_constants: np.ndarray
    ratio_max: float
    action: str
    step_norm: float


@dataclass(frozen=True)
class RunTrace:
    """One row of a convergence log."""

    iteration: int
    best_value: float
    current_value: float
    sigma: float
    learning_rate: float
    cumulative_evaluations: int
    action: str
    resets_remaining: int = 0


@dataclass
class OptimizationResult:
    best_point: np.ndarray
    best_value: float
    trace: List[RunTrace]
    status: str
    iterations: int
    evaluations: int

    @property
    def max_iter_reached(self) -> bool:
        return self.status == "max_iter_reached"


def random_orthonormal_basis(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix; the rows form the basis."""
    if dimension < 1:
        raise ValueError(f"dimension must be positive, got {dimension}")
    g = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return np.ascontiguousarray((q * signs).T)


def complete_basis(main_direction: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis whose first row is ``main_direction``.

    The other rows are a random orthonormal basis of the orthogonal
    complement: Gaussian vectors are projected off the main direction and
    orthonormalized by QR.
    """
    u = np.asarray(main_direction, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("main direction must be a finite nonzero vector")
    u = u / norm
    d = u.size
    basis = np.empty((d, d))
    basis[0] = u
    if d == 1:
        return basis
    g = rng.standard_normal((d, d - 1))
    # Two projection passes keep the complement orthogonal to u at 1e-16.
    g -= np.outer(u, u @ g)
    g -= np.outer(u, u @ g)
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    basis[1:] = (q * signs).T
    return basis


def adaptive_main_derivative(
    objective: Objective,
    x: np.ndarray,
    sigma: float,
    direction: np.ndarray,
    eps_m: float,
    max_points: int = 41,
) -> DirectionalSample:
    """Directional derivative with rules of 3, 5, 7, ... points.

    Stops at the first rule whose estimate differs from the previous one by
    less than ``eps_m`` in absolute value. If ``max_points`` is reached
    first, the last sample is returned with ``converged=False``. Every rule
    tried costs its full point count, since Gauss-Hermite nodes are not
    nested.
    """
    if not eps_m > 0:
        raise ValueError("eps_m must be positive")
    previous = directional_derivative(objective, x, sigma, direction, gauss_hermite_rule(3))
    m = 5
    while m <= max_points:
        sample = directional_derivative(objective, x, sigma, direction, gauss_hermite_rule(m))
        if abs(sample.derivative_estimate - previous.derivative_estimate) < eps_m:
            return sample
        previous = sample
        m += 2
    previous.converged = False
    return previous


def update_learning_rate(state: OptimizerState, L1: float, gamma_L: float) -> float:
    """Fold ``L1`` into the running Lipschitz average and return ``sigma / L``.

    The first call (average still ``None``) takes ``L1`` as is. Mutates
    ``state.averaged_lipschitz``.

    Raises
    ------
    ZeroDivisionError
        If the updated average is zero (flat along the main direction).
    """
    if state.averaged_lipschitz is None:
        averaged = float(L1)
    else:
        averaged = (1.0 - gamma_L) * L1 + gamma_L * state.averaged_lipschitz
    state.averaged_lipschitz = averaged
    if averaged == 0:
        raise ZeroDivisionError("averaged Lipschitz constant is zero")
    return state.sigma / averaged


def initial_state(objective: Objective, x0, config: AsgfConfig) -> OptimizerState:
    """State before the first iteration; evaluates ``f(x0)`` once."""
    x0 = np.array(x0, dtype=float)
    if x0.ndim != 1 or x0.size != objective.dimension:
        raise ValueError(f"x0 must be a vector of length {objective.dimension}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    rng = np.random.default_rng(config.rng_seed)
    start = objective.evaluations
    f0 = objective(x0)
    return OptimizerState(
        iterate=x0,
        best_point=x0.copy(),
        best_value=f0,
        sigma=float(config.sigma0),
        basis=random_orthonormal_basis(x0.size, rng),
        averaged_lipschitz=None,
        threshold_low=config.A0,
        threshold_high=config.B0,
        resets_remaining=config.reset_budget,
        rng=rng,
        evaluations=objective.evaluations - start,
        current_value=f0,
    )


def _ratio_max(samples: Sequence[DirectionalSample]) -> float:
    ratio = 0.0
    for s in samples:
        L = s.lipschitz_estimate
        # A flat direction (L == 0) carries no signal; 0/0 must not win the max.
        if L:
            ratio = max(ratio, abs(s.derivative_estimate) / L)
    return ratio


def update_parameters(
    state: OptimizerState,
    gradient: np.ndarray,
    samples: Sequence[DirectionalSample],
    config: AsgfConfig,
) -> tuple[OptimizerState, str]:
    """Adapt the smoothing radius, thresholds and search directions.

    Returns the new state and the action taken.
    """
    state = replace(state)
    if state.resets_remaining > 0 and state.sigma < config.reset_factor * config.sigma0:
        state.basis = random_orthonormal_basis(state.iterate.size, state.rng)
        state.sigma = float(config.sigma0)
        state.threshold_low = config.A0
        state.threshold_high = config.B0
        state.resets_remaining -= 1
        return state, RESET

    state.basis = complete_basis(gradient, state.rng)
    ratio = _ratio_max(samples)
    A, B = state.threshold_low, state.threshold_high
    if ratio < A:
        state.sigma *= config.gamma_sigma
        state.threshold_low = A * config.A_minus
        return state, SIGMA_DECREASED
    if ratio > B:
        state.sigma /= config.gamma_sigma
        state.threshold_high = B * config.B_plus
        return state, SIGMA_INCREASED
    new_A, new_B = A * config.A_plus, B * config.B_minus
    if new_A < new_B:
        state.threshold_low, state.threshold_high = new_A, new_B
    else:
        logger.debug("threshold update skipped: A=%g would reach B=%g", new_A, new_B)
    return state, THRESHOLDS_TIGHTENED


def _estimate(
    objective: Objective,
    state: OptimizerState,
    config: AsgfConfig,
    executor: Optional[Executor],
) -> List[DirectionalSample]:
    x, sigma, basis = state.iterate, state.sigma, state.basis
    aux_rule = gauss_hermite_rule(config.aux_point_count)

    def main():
        return adaptive_main_derivative(
            objective, x, sigma, basis[0], config.eps_m, config.max_main_points
        )

    def aux(j):
        return directional_derivative(objective, x, sigma, basis[j], aux_rule)

    if executor is None:
        return [main()] + [aux(j) for j in range(1, len(basis))]
    futures = [executor.submit(main)] + [
        executor.submit(aux, j) for j in range(1, len(basis))
    ]
    return [f.result() for f in futures]


def asgf_step(
    objective: Objective,
    state: OptimizerState,
    config: AsgfConfig,
    executor: Optional[Executor] = None,
) -> tuple[OptimizerState, StepReport]:
    """One ASGF iteration.

    Directional samples for the ``d`` basis rows may run on ``executor``;
    results are always reduced in basis order, so the outcome does not
    depend on scheduling.
    """
    start = objective.evaluations
    samples = _estimate(objective, state, config, executor)
    derivs = np.array([s.derivative_estimate for s in samples])
    gradient = derivs @ state.basis
    lipschitz = np.array([s.lipschitz_estimate for s in samples], dtype=float)
    main = samples[0]
    ratio = _ratio_max(samples)

    new = replace(state, iteration=state.iteration + 1)
    sigma = state.sigma
    L1 = main.lipschitz_estimate
    grad_norm = float(np.linalg.norm(gradient))
    candidate = L1 if state.averaged_lipschitz is None else (
        (1.0 - config.gamma_L) * L1 + config.gamma_L * state.averaged_lipschitz
    )

    if grad_norm == 0 or candidate == 0:
        # No usable descent signal at this radius: draw new directions and retry.
        new.basis = random_orthonormal_basis(state.iterate.size, state.rng)
        new.evaluations = state.evaluations + objective.evaluations - start
        report = StepReport(
            gradient=gradient, sigma=sigma, learning_rate=0.0,
            main_point_count=main.point_count, main_converged=main.converged,
            lipschitz_constants=lipschitz, ratio_max=ratio, action=DEGENERATE,
            step_norm=0.0,
        )
        return new, report

    learning_rate = update_learning_rate(new, L1, config.gamma_L)
    x_next = state.iterate - learning_rate * gradient
    f_next = objective(x_next)
    new.iterate = x_next
    new.current_value = f_next
    if f_next < state.best_value:
        new.best_point = x_next.copy()
        new.best_value = f_next
    step_norm = float(np.linalg.norm(x_next - state.iterate))

    if step_norm < config.eps_x:
        action = TERMINATED
    else:
        new, action = update_parameters(new, gradient, samples, config)
    new.evaluations = state.evaluations + objective.evaluations - start
    report = StepReport(
        gradient=gradient, sigma=sigma, learning_rate=learning_rate,
        main_point_count=main.point_count, main_converged=main.converged,
        lipschitz_constants=lipschitz, ratio_max=ratio, action=action,
        step_norm=step_norm,
    )
    return new, report


def iterate_asgf(
    objective: Objective,
    x0,
    config: AsgfConfig,
    workers: int = 1,
) -> Iterator[tuple[OptimizerState, StepReport]]:
    """Yield ``(state, report)`` after every iteration.

    Stops after a terminating step or ``config.max_iterations`` steps.
    ``workers > 1`` evaluates directions on a thread pool.
    """
    state = initial_state(objective, x0, config)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()
    with pool as executor:
        for _ in range(config.max_iterations):
            state, report = asgf_step(objective, state, config, executor)
            yield state, report
            if report.action == TERMINATED:
                return


def minimize(
    objective: Objective,
    x0,
    config: AsgfConfig,
    workers: int = 1,
    target_value: Optional[float] = None,
) -> OptimizationResult:
    """Minimize ``objective`` from ``x0`` with ASGF.

    Parameters
    ----------
    objective : Objective
        Counting wrapper around the function to minimize.
    x0 : array_like
        Initial point.
    config : AsgfConfig
        Hyperparameters, including the RNG seed.
    workers : int, optional
        Threads used for the directional estimates within a step.
    target_value : float, optional
        Stop as soon as the best value drops to this level.

    Returns
    -------
    OptimizationResult
        Best point and value seen, one :class:`RunTrace` per iteration, and
        a status of ``"converged"``, ``"target_reached"`` or
        ``"max_iter_reached"``.
    """
    start = objective.evaluations
    trace: List[RunTrace] = []
    status = "max_iter_reached"
    state = None
    for state, report in iterate_asgf(objective, x0, config, workers=workers):
        trace.append(
            RunTrace(
                iteration=state.iteration,
                best_value=state.best_value,
                current_value=state.current_value,
                sigma=report.sigma,
                learning_rate=report.learning_rate,
                cumulative_evaluations=objective.evaluations - start,
                action=report.action,
                resets_remaining=state.resets_remaining,
            )
        )
        if report.action == TERMINATED:
            status = "converged"
            break
        if target_value is not None and state.best_value <= target_value:
            status = "target_reached"
            break
    return OptimizationResult(
        best_point=state.best_point,
        best_value=state.best_value,
        trace=trace,
        status=status,
        iterations=state.iteration,
        evaluations=objective.evaluations - start,
    )
