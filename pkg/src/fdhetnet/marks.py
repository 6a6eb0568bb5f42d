"""Nonnegative random marks: fading gains, association biases, gain ratios.

A :class:`MarkDistribution` is a small closed family (constant, exponential,
empirical) that supports the handful of functionals the rate analysis needs:
fractional moments, Laplace transforms, scaling and sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ParameterError

__all__ = ["MarkDistribution", "constant", "exponential", "empirical"]

_KINDS = ("constant", "exponential", "empirical")


@dataclass(frozen=True)
class MarkDistribution:
    """Law of a nonnegative random variable.

    Parameters
    ----------
    kind : {"constant", "exponential", "empirical"}
        Family of the law.
    value : float
        The point mass for ``constant`` and the mean for ``exponential``.
    samples : tuple of float
        Equally weighted atoms for ``empirical``.
    """

    kind: str
    value: float = 0.0
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown mark kind {self.kind!r}")
        if self.kind == "empirical":
            arr = np.asarray(self.samples, dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ParameterError("empirical mark needs a nonempty 1-D sample")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ParameterError("empirical mark samples must be finite and >= 0")
            object.__setattr__(self, "samples", tuple(arr.tolist()))
        else:
            if not np.isfinite(self.value) or self.value < 0:
                raise ParameterError("mark parameter must be finite and >= 0")

    # views

    @property
    def atoms(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=float)

    @property
    def mean(self) -> float:
        return self.moment(1.0)

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "constant"

    # functionals

    def moment(self, p: float) -> float:
        """Return ``E[W**p]``; negative ``p`` is allowed where it is finite."""
        if self.kind == "constant":
            return float(self.value) ** p
        if self.kind == "exponential":
            if p <= -1:
                return np.inf
            return float(self.value) ** p * float(gamma_fn(1.0 + p))
        w = self.atoms
        with np.errstate(divide="ignore"):
            return float(np.mean(w ** p))

    def laplace(self, s):
        """Return ``E[exp(-s W)]`` elementwise over ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.exp(-s * self.value)
        if self.kind == "exponential":
            return 1.0 / (1.0 + s * self.value)
        w = self.atoms
        out = np.empty(s.shape)
        flat = s.reshape(-1)
        res = out.reshape(-1)
        for start in range(0, flat.size, 256):
            block = flat[start:start + 256]
            res[start:start + 256] = np.exp(-np.outer(block, w)).mean(axis=1)
        return out

    def laplace_complement(self, s):
        """Return ``1 - E[exp(-s W)]`` without cancellation at small ``s``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return -np.expm1(-s * self.value)
        if self.kind == "exponential":
            x = s * self.value
            return x / (1.0 + x)
        w = self.atoms
        out = np.empty(s.shape)
        flat = s.reshape(-1)
        res = out.reshape(-1)
        for start in range(0, flat.size, 256):
            block = flat[start:start + 256]
            res[start:start + 256] = (-np.expm1(-np.outer(block, w))).mean(axis=1)
        return out

    def scaled(self, c: float) -> "MarkDistribution":
        """Law of ``c * W``."""
        if c < 0 or not np.isfinite(c):
            raise ParameterError("scale factor must be finite and >= 0")
        if self.kind == "empirical":
            return MarkDistribution("empirical", samples=tuple((self.atoms * c).tolist()))
        return MarkDistribution(self.kind, value=float(self.value) * c)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, float(self.value))
        if self.kind == "exponential":
            return rng.exponential(self.value, size)
        return rng.choice(self.atoms, size=size)


def constant(value: float) -> MarkDistribution:
    return MarkDistribution("constant", value=float(value))


def exponential(mean: float = 1.0) -> MarkDistribution:
    return MarkDistribution("exponential", value=float(mean))


def empirical(samples) -> MarkDistribution:
    return MarkDistribution("empirical", samples=tuple(np.asarray(samples, dtype=float).ravel().tolist()))
