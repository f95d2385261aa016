"""Directional Gaussian-smoothing gradient estimators.

The quadrature-based estimators work one direction at a time: along a unit
vector ``xi`` the derivative of the Gaussian-smoothed objective is

    (2 / (sigma * sqrt(pi))) * sum_m w_m p_m f(x + sigma p_m xi)

and the gradient is the sum of those derivatives times their directions
over an orthonormal basis. The function values are kept so the same batch
also yields a local Lipschitz estimate.

``mc_gradient`` and ``orthogonal_antithetic_gradient`` are the Monte Carlo
baselines.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .quadrature import QuadratureRule

__all__ = [
    "Objective",
    "ObjectiveError",
    "NonFiniteValueError",
    "DirectionalSample",
    "directional_derivative",
    "assemble_gradient",
    "local_lipschitz",
    "mc_gradient",
    "orthogonal_gaussian_directions",
    "orthogonal_antithetic_gradient",
]


class ObjectiveError(RuntimeError):
    """The objective raised while being evaluated at ``point``."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = point


class NonFiniteValueError(ObjectiveError):
    """The objective returned NaN or an infinity."""


class Objective:
    """A black-box function with an evaluation counter.

    Parameters
    ----------
    function : callable
        Maps a 1-d array of length ``dimension`` to a float. Must be
        deterministic for a fixed input.
    dimension : int
        Input dimension.
    batch_function : callable, optional
        Vectorized form taking an ``(n, dimension)`` array and returning
        ``n`` values. Must agree bit-for-bit with ``function``.

    The counter is guarded by a lock so concurrent calls are counted
    exactly once each.
    """

    def __init__(
        self,
        function: Callable[[np.ndarray], float],
        dimension: int,
        batch_function: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        if dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.function = function
        self.dimension = int(dimension)
        self.batch_function = batch_function
        self._count = 0
        self._lock = threading.Lock()

    @property
    def evaluations(self) -> int:
        return self._count

    def _check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dimension,):
            raise ValueError(
                f"expected points of dimension {self.dimension}, got shape {x.shape}"
            )
        return x

    def __call__(self, x) -> float:
        x = self._check_point(x)
        with self._lock:
            self._count += 1
        try:
            value = float(self.function(x))
        except Exception as exc:
            raise ObjectiveError(f"objective failed at {x!r}: {exc}", x) from exc
        if not math.isfinite(value):
            raise NonFiniteValueError(f"objective returned {value} at {x!r}", x)
        return value

    def evaluate_many(self, points) -> np.ndarray:
        """Evaluate each row of ``points``; counts one call per row."""
        points = self._check_point(points)
        if self.batch_function is None:
            return np.array([self(p) for p in points])
        with self._lock:
            self._count += len(points)
        try:
            values = np.asarray(self.batch_function(points), dtype=float)
        except Exception as exc:
            raise ObjectiveError(f"objective failed on batch: {exc}", points) from exc
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            raise NonFiniteValueError(
                f"objective returned {values[i]} at {points[i]!r}", points[i]
            )
        return values


@dataclass
class DirectionalSample:
    """Objective values along one direction and the estimates built on them.

    ``values`` are ordered by ascending quadrature node.
    ``lipschitz_estimate`` is ``None`` for one-point rules, which have no
    consecutive node pair.
    """

    direction: np.ndarray
    point_count: int
    values: np.ndarray
    derivative_estimate: float
    lipschitz_estimate: Optional[float]
    converged: bool = True


def _lipschitz_from_values(values: np.ndarray, sigma: float, nodes: np.ndarray) -> float:
    slopes = np.abs(np.diff(values) / (sigma * np.diff(nodes)))
    return float(slopes.max())


def directional_derivative(
    objective: Objective,
    x: np.ndarray,
    sigma: float,
    direction: np.ndarray,
    rule: QuadratureRule,
) -> DirectionalSample:
    """Estimate the smoothed directional derivative along ``direction``.

    Makes exactly ``rule.point_count`` objective calls. The local Lipschitz
    estimate is computed from the same values when the rule has at least
    two nodes.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    points = x + sigma * np.outer(rule.nodes, direction)
    values = objective.evaluate_many(points)
    derivative = 2.0 / (sigma * math.sqrt(math.pi)) * float(
        np.dot(rule.weights * rule.nodes, values)
    )
    lipschitz = (
        _lipschitz_from_values(values, sigma, rule.nodes) if rule.point_count >= 2 else None
    )
    return DirectionalSample(
        direction=direction,
        point_count=rule.point_count,
        values=values,
        derivative_estimate=derivative,
        lipschitz_estimate=lipschitz,
    )


def assemble_gradient(samples: Sequence[DirectionalSample], check: bool = True) -> np.ndarray:
    """Sum ``derivative_estimate * direction`` over a full orthonormal basis.

    With ``check=True`` the directions must number ``d`` and have a Gram
    matrix within 1e-6 of the identity. The check costs O(d**3); callers
    that maintain the basis themselves may skip it.
    """
    if not samples:
        raise ValueError("no directional samples given")
    basis = np.stack([s.direction for s in samples])
    derivs = np.array([s.derivative_estimate for s in samples])
    if check:
        n, d = basis.shape
        if n != d:
            raise ValueError(f"need {d} directions for dimension {d}, got {n}")
        if np.abs(basis @ basis.T - np.eye(d)).max() > 1e-6:
            raise ValueError("directions are not orthonormal")
    return derivs @ basis


def local_lipschitz(sample: DirectionalSample, sigma: float, rule: QuadratureRule) -> float:
    """Largest absolute difference quotient between consecutive nodes."""
    if rule.point_count < 2:
        raise ValueError("a local Lipschitz estimate needs at least two nodes")
    if len(sample.values) != rule.point_count:
        raise ValueError(
            f"sample has {len(sample.values)} values, rule has {rule.point_count} nodes"
        )
    return _lipschitz_from_values(np.asarray(sample.values), sigma, rule.nodes)


def mc_gradient(
    objective: Objective,
    x: np.ndarray,
    sigma: float,
    sample_count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monte Carlo estimate ``2/(sigma M) * sum eps_m f(x + sigma eps_m)``.

    ``eps_m`` are standard normal. Uses ``sample_count`` objective calls.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    x = np.asarray(x, dtype=float)
    eps = rng.standard_normal((sample_count, x.size))
    values = objective.evaluate_many(x + sigma * eps)
    return 2.0 / (sigma * sample_count) * (values @ eps)


def orthogonal_gaussian_directions(
    dimension: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``count`` Gaussian-marginal vectors, orthogonal within blocks of ``dimension``.

    Each block is a Gaussian matrix orthonormalized by QR (sign-fixed so
    the result is Haar distributed), with row norms replaced by the norms
    of independent Gaussian vectors, i.e. chi-distributed with
    ``dimension`` degrees of freedom.
    """
    blocks = []
    remaining = count
    while remaining > 0:
        q = _haar_orthogonal(dimension, rng)
        norms = np.linalg.norm(rng.standard_normal((dimension, dimension)), axis=1)
        block = q * norms[:, None]
        blocks.append(block[: min(remaining, dimension)])
        remaining -= dimension
    return np.concatenate(blocks, axis=0)


def _haar_orthogonal(dimension: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return (q * signs).T


def orthogonal_antithetic_gradient(
    objective: Objective,
    x: np.ndarray,
    sigma: float,
    sample_count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Antithetic estimate ``1/(sigma M) * sum eps_j (f(x+sigma eps_j) - f(x-sigma eps_j))``.

    Directions come from :func:`orthogonal_gaussian_directions`. Uses
    ``2 * sample_count`` objective calls.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    x = np.asarray(x, dtype=float)
    eps = orthogonal_gaussian_directions(x.size, sample_count, rng)
    plus = objective.evaluate_many(x + sigma * eps)
    minus = objective.evaluate_many(x - sigma * eps)
    return (plus - minus) @ eps / (sigma * sample_count)
