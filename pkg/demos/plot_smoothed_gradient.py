"""
Smoothed gradients along orthonormal directions
===============================================

A directional derivative of the Gaussian-smoothed function only needs a
handful of function values along one line.  Stacking d of them over an
orthonormal basis yields a gradient estimate that ignores high-frequency
noise.
"""

import numpy as np

from asgf import (
    Objective,
    assemble_gradient,
    directional_derivative,
    gauss_hermite_rule,
    mc_gradient,
    random_orthonormal_basis,
)

rng = np.random.default_rng(0)
d = 6

# %%
# A bowl with small ripples on top.  Its true gradient is dominated by the
# ripples near the minimum.
def rippled(x):
    return float(x @ x + 0.05 * np.sum(np.cos(40 * x)))


f = Objective(rippled, d)
x = np.full(d, 0.3)

# %%
# With a wide radius the ripples average out and the estimate points
# along the bowl's gradient 2x.
basis = random_orthonormal_basis(d, rng)
rule = gauss_hermite_rule(7)
for sigma in (0.01, 0.5):
    samples = [directional_derivative(f, x, sigma, xi, rule) for xi in basis]
    g = assemble_gradient(samples)
    print(f"sigma={sigma:<5} gradient {np.round(g, 3)}")
print("bowl gradient      ", 2 * x)
print("evaluations so far ", f.evaluations)

# %%
# A Monte Carlo estimate at the same radius needs many more samples for a
# comparable answer, and it is still noisy.
g_mc = mc_gradient(f, x, 0.5, 400, rng)
print("Monte Carlo (400)  ", np.round(g_mc, 3))
