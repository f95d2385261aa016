"""
ASGF on standard test functions
===============================

Run the optimizer on a few multimodal benchmarks from random starting
points, and look at what the adaptive radius does along the way.
"""

import collections

from asgf import AsgfConfig, NonFiniteValueError, get_benchmark, is_success, minimize, sample_initial_point

# %%
# Benchmarks are looked up by name.  The smoothing radius starts at a tenth
# of the search box diameter.  Occasionally a first step taken with a tiny
# curvature estimate overshoots to infinity; the objective wrapper reports
# that instead of letting NaNs through.
for name in ("branin", "ackley-10", "levy-10", "rastrigin-2"):
    spec = get_benchmark(name)
    config = AsgfConfig(sigma0=spec.default_sigma0, rng_seed=1)
    try:
        result = minimize(
            spec.objective(),
            sample_initial_point(spec, 1),
            config,
            target_value=spec.global_minimum_value + spec.success_tolerance,
        )
    except NonFiniteValueError as err:
        print(f"{spec.label:12s} diverged: {str(err)[:40]}...")
        continue
    print(
        f"{spec.label:12s} best {result.best_value: .3e}  success {is_success(spec, result.best_value)}"
        f"  iterations {result.iterations:4d}  evaluations {result.evaluations}"
    )

# %%
# Without the early stop, the trace shows radius changes and resets.  On
# Levy the radius keeps shrinking into a local basin until a reset widens
# it again.
spec = get_benchmark("levy-10")
result = minimize(spec.objective(), sample_initial_point(spec, 0),
                  AsgfConfig(sigma0=spec.default_sigma0, rng_seed=0))
print(collections.Counter(t.action for t in result.trace))
for t in result.trace:
    if t.action == "reset":
        print(f"reset at iteration {t.iteration}, best so far {t.best_value:.4g}")
print("final best", result.best_value, "status", result.status)
