"""
Gauss-Hermite rules
===================

Every smoothed derivative in the package is a Gauss-Hermite sum.  This
script builds a few rules and checks what they integrate exactly.
"""

import math

import numpy as np

from asgf import gauss_hermite_rule, integrate

# %%
# A rule with m points carries nodes, weights and its size.  Weights sum
# to sqrt(pi), the mass of exp(-v^2).
rule = gauss_hermite_rule(5)
print("nodes  ", np.round(rule.nodes, 6))
print("weights", np.round(rule.weights, 6))
print("sum of weights", rule.weights.sum(), "vs", math.sqrt(math.pi))

# %%
# An m-point rule is exact for polynomials up to degree 2m - 1.  Degree 10
# is one step too far for five points.
for k in (2, 4, 8, 9, 10):
    exact = math.gamma((k + 1) / 2) if k % 2 == 0 else 0.0
    approx = integrate(rule, rule.nodes ** k)
    print(f"degree {k:2d}: quadrature {approx: .12f}  exact {exact: .12f}")

# %%
# Rules are cached and read-only, so asking twice costs nothing.
assert gauss_hermite_rule(5) is rule
print("rule arrays writeable?", rule.nodes.flags.writeable)
