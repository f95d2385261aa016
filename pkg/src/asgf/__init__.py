"""Adaptive stochastic gradient-free optimization with directional Gaussian smoothing.

Quick start::

    import numpy as np
    from asgf import AsgfConfig, Objective, minimize

    f = Objective(lambda x: float(np.sum((x - 3.0) ** 2)), dimension=4)
    result = minimize(f, np.zeros(4), AsgfConfig(sigma0=1.0, rng_seed=0))
    print(result.best_point, result.best_value)
"""

from .baselines import DgsConfig, EsConfig, dgs_minimize, es_minimize
from .benchmarks import BenchmarkSpec, get_benchmark, is_success, registry, sample_initial_point
from .harness import ExperimentPlan, SummaryRow, compare, emit_convergence_plot_data, run_experiment
from .optimizer import (
    AsgfConfig,
    OptimizationResult,
    OptimizerState,
    RunTrace,
    StepReport,
    adaptive_main_derivative,
    asgf_step,
    complete_basis,
    iterate_asgf,
    minimize,
    random_orthonormal_basis,
    update_learning_rate,
    update_parameters,
)
from .quadrature import QuadratureRule, gauss_hermite_rule, integrate
from .smoothing import (
    DirectionalSample,
    NonFiniteValueError,
    Objective,
    ObjectiveError,
    assemble_gradient,
    directional_derivative,
    local_lipschitz,
    mc_gradient,
    orthogonal_antithetic_gradient,
)

__version__ = "0.1.0"
