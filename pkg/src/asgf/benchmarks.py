"""Standard global-optimization test functions.

Formulas, domains and minima follow the usual definitions of the Virtual
Library of Simulation Experiments. Every function is written over the last
axis, so the same code serves single points and ``(n, d)`` batches and the
two agree bit for bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from .smoothing import Objective

__all__ = [
    "BenchmarkSpec",
    "registry",
    "get_benchmark",
    "is_success",
    "sample_initial_point",
    "BENCHMARK_NAMES",
    "branin",
    "cross_in_tray",
    "dropwave",
    "sphere",
    "ackley",
    "levy",
    "rastrigin",
]


def branin(x: np.ndarray) -> np.ndarray:
    """Branin-Hoo; minimum 5/(4 pi) ~ 0.397887 at (-pi, 12.275), (pi, 2.275), (3 pi, 2.475)."""
    x1, x2 = x[..., 0], x[..., 1]
    b = 5.1 / (4 * math.pi**2)
    c = 5 / math.pi
    t = 1 / (8 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


def cross_in_tray(x: np.ndarray) -> np.ndarray:
    """Cross-in-Tray; minimum ~ -2.06261 at (+-1.34941, +-1.34941)."""
    x1, x2 = x[..., 0], x[..., 1]
    r = np.sqrt(x1**2 + x2**2)
    inner = np.abs(np.sin(x1) * np.sin(x2) * np.exp(np.abs(100 - r / math.pi)))
    return -1e-4 * (inner + 1) ** 0.1


def dropwave(x: np.ndarray) -> np.ndarray:
    """Drop-Wave; minimum -1 at the origin."""
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    return -(1 + np.cos(12 * np.sqrt(r2))) / (0.5 * r2 + 2)


def sphere(x: np.ndarray) -> np.ndarray:
    """Sum of squares; minimum 0 at the origin."""
    return np.sum(x * x, axis=-1)


def ackley(x: np.ndarray) -> np.ndarray:
    """Ackley with a=20, b=0.2, c=2 pi; minimum 0 at the origin."""
    d = x.shape[-1]
    s1 = np.sum(x * x, axis=-1) / d
    s2 = np.sum(np.cos(2 * math.pi * x), axis=-1) / d
    return -20 * np.exp(-0.2 * np.sqrt(s1)) - np.exp(s2) + 20 + math.e


def levy(x: np.ndarray) -> np.ndarray:
    """Levy; minimum 0 at (1, ..., 1)."""
    w = 1 + (x - 1) / 4
    head = np.sin(math.pi * w[..., 0]) ** 2
    mid = (w[..., :-1] - 1) ** 2 * (1 + 10 * np.sin(math.pi * w[..., :-1] + 1) ** 2)
    wd = w[..., -1]
    tail = (wd - 1) ** 2 * (1 + np.sin(2 * math.pi * wd) ** 2)
    return head + np.sum(mid, axis=-1) + tail


def rastrigin(x: np.ndarray) -> np.ndarray:
    """Rastrigin; minimum 0 at the origin."""
    d = x.shape[-1]
    return 10 * d + np.sum(x * x - 10 * np.cos(2 * math.pi * x), axis=-1)


_CROSS_IN_TRAY_ARGMIN = 1.3494065732605582
_CROSS_IN_TRAY_MIN = -2.0626118708227392


@dataclass(frozen=True)
class BenchmarkSpec:
    """A test problem: function, sampling box, and known global minimum."""

    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    global_minimum_value: float
    minimizer: np.ndarray
    function: Callable[[np.ndarray], np.ndarray]
    success_tolerance: float = 1e-4

    @property
    def label(self) -> str:
        return f"{self.name}-{self.dimension}"

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(f"{self.label} expects shape ({self.dimension},), got {x.shape}")
        return float(self.evaluate_batch(x[None, :])[0])

    def evaluate_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ValueError(
                f"{self.label} expects shape (n, {self.dimension}), got {points.shape}"
            )
        # Far outside the domain values may overflow; the Objective wrapper flags them.
        with np.errstate(over="ignore", invalid="ignore"):
            return self.function(points)

    def objective(self) -> Objective:
        """A fresh counting objective for one run."""
        return Objective(self, self.dimension, batch_function=self.evaluate_batch)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def default_sigma0(self) -> float:
        """A tenth of the Euclidean diameter of the sampling box."""
        return self.diameter / 10


def _box(lo, hi, d):
    lower = np.broadcast_to(np.asarray(lo, dtype=float), (d,)).copy()
    upper = np.broadcast_to(np.asarray(hi, dtype=float), (d,)).copy()
    return lower, upper


def _make(name, d, lo, hi, fmin, argmin, fn) -> BenchmarkSpec:
    lower, upper = _box(lo, hi, d)
    for a in (lower, upper):
        a.setflags(write=False)
    argmin = np.broadcast_to(np.asarray(argmin, dtype=float), (d,)).copy()
    return BenchmarkSpec(name, d, lower, upper, fmin, argmin, fn)


_FIXED: Dict[str, Callable[[], BenchmarkSpec]] = {
    "branin": lambda: _make(
        "branin", 2, [-5.0, 0.0], [10.0, 15.0], 5 / (4 * math.pi), [math.pi, 2.275], branin
    ),
    "cross-in-tray": lambda: _make(
        "cross-in-tray", 2, -10.0, 10.0, _CROSS_IN_TRAY_MIN, _CROSS_IN_TRAY_ARGMIN, cross_in_tray
    ),
    "dropwave": lambda: _make("dropwave", 2, -5.12, 5.12, -1.0, 0.0, dropwave),
}

_SCALABLE: Dict[str, Callable[[int], BenchmarkSpec]] = {
    "sphere": lambda d: _make("sphere", d, -5.12, 5.12, 0.0, 0.0, sphere),
    "ackley": lambda d: _make("ackley", d, -32.768, 32.768, 0.0, 0.0, ackley),
    "levy": lambda d: _make("levy", d, -10.0, 10.0, 0.0, 1.0, levy),
    "rastrigin": lambda d: _make("rastrigin", d, -5.12, 5.12, 0.0, 0.0, rastrigin),
}

BENCHMARK_NAMES = tuple(_FIXED) + tuple(_SCALABLE)


def registry(dimension: int = 10) -> List[BenchmarkSpec]:
    """All benchmarks; the scalable ones at ``dimension``."""
    return [make() for make in _FIXED.values()] + [
        make(dimension) for make in _SCALABLE.values()
    ]


def get_benchmark(name: str, dimension: Optional[int] = None) -> BenchmarkSpec:
    """Look a benchmark up by name, e.g. ``"ackley-10"`` or ``"branin"``.

    The dimension may be a ``-<d>`` suffix or passed separately.
    """
    key = name.strip().lower().replace("_", "-")
    m = re.fullmatch(r"(.+?)-(\d+)d?", key)
    if m and m.group(1) in BENCHMARK_NAMES:
        key, suffix = m.group(1), int(m.group(2))
        if dimension is not None and dimension != suffix:
            raise ValueError(f"conflicting dimensions for {name!r}: {suffix} and {dimension}")
        dimension = suffix
    if key in _FIXED:
        spec = _FIXED[key]()
        if dimension is not None and dimension != spec.dimension:
            raise ValueError(f"{key} is only defined for d={spec.dimension}")
        return spec
    if key in _SCALABLE:
        if dimension is None:
            raise ValueError(f"{key} needs a dimension, e.g. '{key}-10'")
        if dimension < 1:
            raise ValueError("dimension must be positive")
        return _SCALABLE[key](dimension)
    raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(BENCHMARK_NAMES)}")


def is_success(spec: BenchmarkSpec, achieved_value: float) -> bool:
    """True when ``achieved_value`` is within the tolerance of the global minimum."""
    return achieved_value - spec.global_minimum_value <= spec.success_tolerance


def sample_initial_point(spec: BenchmarkSpec, seed: int) -> np.ndarray:
    """Uniform draw from the sampling box, fully determined by ``seed``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(spec.lower, spec.upper)
