"""Hazard functions of the scaling limit and exact samplers.

A hazard ``f >= 0`` with divergent cumulative ``F(t) = int_0^t f`` defines a
proper positive random duration through the survival ``exp(-F(t))``.
Durations are sampled exactly by cumulative-hazard inversion: draw a
standard exponential E and solve ``F(t) = E``, in closed form where the
family allows it and by bracketed root finding on the monotone F otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, DomainError

__all__ = [
    "Hazard",
    "ConstantHazard",
    "WeibullHazard",
    "ParetoHazard",
    "QuadratureHazard",
]


class Hazard:
    """Common interface: vectorised rate, cumulative, exact inversion."""

    def rate(self, t):
        """Hazard value(s) at time(s) t >= 0."""
        raise NotImplementedError

    def cumulative(self, t):
        """F(t) = int_0^t rate(u) du."""
        raise NotImplementedError

    def inverse_cumulative(self, y):
        """The smallest t with F(t) = y, for y > 0."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw duration(s) with survival exp(-F(t))."""
        e = rng.exponential(size=size)
        return self.inverse_cumulative(e)


@dataclass(frozen=True)
class ConstantHazard(Hazard):
    """Memoryless case: exponential durations with the given rate."""

    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise DomainError(f"constant hazard must be positive, got {self.value}")

    def rate(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def cumulative(self, t):
        return self.value * np.asarray(t, dtype=float)

    def inverse_cumulative(self, y):
        return np.asarray(y, dtype=float) / self.value


@dataclass(frozen=True)
class WeibullHazard(Hazard):
    """``f(x) = shape * scale * x**(shape-1)``; survival exp(-scale t^shape)."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0.0 and self.scale > 0.0):
            raise DomainError("weibull shape and scale must be positive")

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        return self.shape * self.scale * t ** (self.shape - 1.0)

    def cumulative(self, t):
        return self.scale * np.asarray(t, dtype=float) ** self.shape

    def inverse_cumulative(self, y):
        return (np.asarray(y, dtype=float) / self.scale) ** (1.0 / self.shape)


@dataclass(frozen=True)
class ParetoHazard(Hazard):
    """``f(x) = exponent / x`` beyond the threshold, zero before.

    The cumulative hazard is flat on [0, threshold], so durations never fall
    below the threshold: survival is ``(threshold / t)**exponent`` past it.
    """

    exponent: float
    threshold: float

    def __post_init__(self):
        if not (self.exponent > 0.0 and self.threshold > 0.0):
            raise DomainError("pareto exponent and threshold must be positive")

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(t >= self.threshold, self.exponent / t, 0.0)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.exponent * np.log(t / self.threshold)
        return np.where(t > self.threshold, out, 0.0)

    def inverse_cumulative(self, y):
        # F vanishes on the plateau, so the solution lives in [threshold, inf)
        return self.threshold * np.exp(np.asarray(y, dtype=float) / self.exponent)


@dataclass(frozen=True)
class QuadratureHazard(Hazard):
    """User-supplied hazard; cumulative by adaptive quadrature.

    Inversion brackets the root on the monotone cumulative and polishes it
    to the requested relative tolerance.  The hazard must be nonnegative and
    right-continuous with a divergent integral; a bracket that cannot reach
    the target exponential level flags non-divergence.
    """

    fn: Callable[[float], float]
    rel_tol: float = 1e-10
    bracket_cap: float = 1e15

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return float(self.fn(float(t)))
        return np.array([self.fn(float(u)) for u in t.ravel()]).reshape(t.shape)

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            val, _ = integrate.quad(self.fn, 0.0, float(t), epsabs=0.0, epsrel=self.rel_tol, limit=200)
            return val
        return np.array([self.cumulative(float(u)) for u in t.ravel()]).reshape(t.shape)

    def inverse_cumulative(self, y):
        y_arr = np.asarray(y, dtype=float)
        if y_arr.ndim == 0:
            return self._invert(float(y_arr))
        return np.array([self._invert(float(v)) for v in y_arr.ravel()]).reshape(y_arr.shape)

    def _invert(self, y: float) -> float:
        if y <= 0.0:
            raise DomainError(f"cumulative-hazard level must be positive, got {y}")
        hi = 1.0
        while self.cumulative(hi) < y:
            hi *= 2.0
            if hi > self.bracket_cap:
                raise ConvergenceError(
                    f"cumulative hazard stayed below {y:g} up to t={self.bracket_cap:g}; "
                    "the hazard integral may not diverge"
                )
        return float(
            optimize.brentq(lambda t: self.cumulative(t) - y, 0.0, hi, rtol=1e-12)
        )
