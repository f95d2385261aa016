"""Gauss-Hermite quadrature rules for the weight function exp(-v**2)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = ["QuadratureRule", "gauss_hermite_rule", "integrate", "MAX_POINT_COUNT"]

#: Largest point count accepted by default. Past this the outer weights
#: drop below ~1e-80 and node accuracy degrades.
MAX_POINT_COUNT = 101


@dataclass(frozen=True)
class QuadratureRule:
    """An ``m``-point Gauss-Hermite rule (physicists' convention).

    ``nodes`` are ascending and symmetric about zero, ``weights`` are
    positive and sum to ``sqrt(pi)``. Both arrays are read-only so a rule
    can be shared between threads.
    """

    point_count: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.point_count


def _orthonormal_hermite(x: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the orthonormal Hermite polynomials of degree ``degree`` and
    ``degree - 1`` at ``x``, plus the running sum of squares of degrees
    ``0 .. degree - 1``.

    Returns ``(h_{degree}, sum_{k<degree} h_k**2)``.
    """
    h_prev = np.zeros_like(x)
    h = np.full_like(x, math.pi ** -0.25)
    christoffel = np.zeros_like(x)
    for k in range(degree):
        christoffel += h * h
        h_next = x * math.sqrt(2.0 / (k + 1)) * h - math.sqrt(k / (k + 1)) * h_prev
        h_prev, h = h, h_next
    return h, christoffel


def _compute_rule(point_count: int) -> QuadratureRule:
    m = point_count
    if m == 1:
        nodes = np.zeros(1)
        weights = np.array([math.sqrt(math.pi)])
    else:
        # Golub-Welsch: the Jacobi matrix of the Hermite recurrence has
        # zero diagonal and off-diagonal sqrt(k/2).
        off = np.sqrt(np.arange(1, m) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)

        # One Newton polish on H_m, using d/dx h_m = sqrt(2m) h_{m-1}.
        h_m, _ = _orthonormal_hermite(nodes, m)
        h_m1, _ = _orthonormal_hermite(nodes, m - 1)
        nodes = nodes - h_m / (math.sqrt(2.0 * m) * h_m1)

        # Christoffel numbers; stays positive for tiny outer weights where
        # squared eigenvector components would underflow into noise.
        _, christoffel = _orthonormal_hermite(nodes, m)
        weights = 1.0 / christoffel

        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
        if m % 2:
            nodes[m // 2] = 0.0
        weights *= math.sqrt(math.pi) / weights.sum()

    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(point_count=m, nodes=nodes, weights=weights)


@functools.lru_cache(maxsize=None)
def _cached_rule(point_count: int) -> QuadratureRule:
    return _compute_rule(point_count)


def gauss_hermite_rule(point_count: int, max_points: int = MAX_POINT_COUNT) -> QuadratureRule:
    """Return the ``point_count``-point Gauss-Hermite rule.

    The rule integrates polynomials of degree ``<= 2 * point_count - 1``
    against ``exp(-v**2)`` exactly. Rules are cached, so repeated calls
    return the same object.

    Parameters
    ----------
    point_count : int
        Number of nodes, ``1 <= point_count <= max_points``.
    max_points : int, optional
        Upper bound on ``point_count``.

    Raises
    ------
    ValueError
        If ``point_count`` is out of range.
    """
    if isinstance(point_count, bool) or int(point_count) != point_count:
        raise TypeError(f"point_count must be an integer, got {point_count!r}")
    point_count = int(point_count)
    if point_count < 1:
        raise ValueError(f"point_count must be >= 1, got {point_count}")
    if point_count > max_points:
        raise ValueError(f"point_count {point_count} exceeds the cap of {max_points}")
    return _cached_rule(point_count)


def integrate(rule: QuadratureRule, samples) -> float:
    """Weighted sum ``sum_m w_m * samples_m``."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (rule.point_count,):
        raise ValueError(
            f"expected {rule.point_count} samples, got shape {samples.shape}"
        )
    return float(np.dot(rule.weights, samples))
