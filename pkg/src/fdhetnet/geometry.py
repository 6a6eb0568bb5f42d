"""Homogeneous Poisson point processes on disk windows.

Distances are in km and intensities in points per km^2. Every sampler takes an
explicit seed or :class:`numpy.random.Generator` so drops are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPointsError, ParameterError

__all__ = [
    "Window",
    "PointSet",
    "as_generator",
    "spawn_generators",
    "sample_ppp",
    "sample_disk",
    "nth_nearest_sq_distance",
    "policy_radius",
]


@dataclass(frozen=True)
class Window:
    """Disk observation window."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ParameterError("window radius must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def area(self) -> float:
        return float(np.pi * self.radius ** 2)


@dataclass(frozen=True)
class PointSet:
    """Immutable planar point pattern drawn on a window."""

    points: np.ndarray
    intensity: float
    window: Window

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def sq_distances(self, origin=(0.0, 0.0)) -> np.ndarray:
        d = self.points - np.asarray(origin, dtype=float)
        return np.einsum("ij,ij->i", d, d)


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence or a Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_generators(seed, n: int) -> list:
    """Split ``seed`` into ``n`` statistically independent streams."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(n)]


def sample_disk(rng: np.random.Generator, n: int, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    """``n`` i.i.d. uniform points on a disk, shape ``(n, 2)``."""
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    out = np.empty((n, 2))
    out[:, 0] = center[0] + r * np.cos(theta)
    out[:, 1] = center[1] + r * np.sin(theta)
    return out


def sample_ppp(intensity: float, window: Window, rng_seed) -> PointSet:
    """Sample a homogeneous PPP of ``intensity`` on ``window``.

    Raises
    ------
    ParameterError
        If ``intensity`` is not strictly positive.
    """
    if not (np.isfinite(intensity) and intensity > 0):
        raise ParameterError("intensity must be positive")
    rng = as_generator(rng_seed)
    n = rng.poisson(intensity * window.area)
    pts = sample_disk(rng, n, window.radius, window.center)
    return PointSet(pts, float(intensity), window)


def nth_nearest_sq_distance(points: PointSet, n: int, origin=(0.0, 0.0)) -> float:
    """Squared distance from ``origin`` to the ``n``-th nearest point."""
    if n < 1:
        raise ParameterError("order n must be a positive integer")
    if len(points) < n:
        raise InsufficientPointsError(f"need at least {n} points, got {len(points)}")
    d2 = points.sq_distances(origin)
    return float(np.partition(d2, n - 1)[n - 1])


def policy_radius(intensities, min_points: float = 500.0, nearest_multiple: float = 10.0) -> float:
    """Guard-zone window radius.

    Every tier gets at least ``min_points`` expected points and the radius is
    at least ``nearest_multiple`` times the mean nearest-point distance of the
    superposed process.
    """
    lam = np.asarray(intensities, dtype=float)
    if np.any(lam <= 0):
        raise ParameterError("intensities must be positive")
    r_count = np.sqrt(min_points / (np.pi * lam.min()))
    r_near = nearest_multiple * 0.5 / np.sqrt(lam.sum())
    return float(max(r_count, r_near))
