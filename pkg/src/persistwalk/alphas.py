"""Switch-probability sequences.

Each letter of the alphabet carries a sequence ``alpha_1, alpha_2, ...`` of
switch probabilities in (0, 1) indexed by the current run length, plus a
separate value ``alpha_inf`` for an already-infinite run.  The parametric
families below provide pointwise and vectorised evaluation, structural
equality (used by the comb dictionary round trips), and tail lower bounds
used to certify truncated series: if ``alpha_k >= c > 0`` for all
``k >= n0``, run-survival products decay at least geometrically with ratio
``1 - c`` beyond ``n0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "AlphaSequence",
    "ConstantAlpha",
    "PoissonLikeAlpha",
    "ScaledHazardAlpha",
    "TableAlpha",
    "CustomAlpha",
]


def _check_unit_open(x: float, what: str) -> float:
    if not (0.0 < x < 1.0) or math.isnan(x):
        raise DomainError(f"{what} must lie in the open interval (0, 1), got {x!r}")
    return float(x)


class AlphaSequence:
    """Common interface of all switch-probability families."""

    #: switch probability from an infinite run, in (0, 1)
    alpha_inf: float

    def value_at(self, n: int) -> float:
        """Switch probability after a run of length ``n >= 1``."""
        raise NotImplementedError

    def values_upto(self, n_max: int) -> np.ndarray:
        """Values for run lengths 1..n_max as a float array."""
        return self.values_at(np.arange(1, n_max + 1))

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        """Vectorised ``value_at`` over an integer array of run lengths."""
        ns = np.asarray(ns)
        return np.array([self.value_at(int(n)) for n in ns.ravel()]).reshape(ns.shape)

    def tail_lower_bound(self, n0: int) -> float:
        """A lower bound on ``alpha_k`` over ``k >= n0``; 0.0 if unknown.

        A strictly positive bound certifies geometric decay of run
        survivals beyond ``n0``; 0.0 means no tail control is available.
        """
        return 0.0

    @property
    def is_constant(self) -> bool:
        return False

    @property
    def tail_is_heuristic(self) -> bool:
        """True when the tail rule extrapolates rather than being declared."""
        return False


@dataclass(frozen=True)
class ConstantAlpha(AlphaSequence):
    """Run-length independent switch probability."""

    value: float
    alpha_inf: float = None  # type: ignore[assignment]

    def __post_init__(self):
        _check_unit_open(self.value, "constant switch probability")
        if self.alpha_inf is None:
            object.__setattr__(self, "alpha_inf", self.value)
        else:
            _check_unit_open(self.alpha_inf, "alpha_inf")

    def value_at(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"run length must be >= 1, got {n}")
        return self.value

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        return np.full(np.shape(ns), self.value, dtype=float)

    def tail_lower_bound(self, n0: int) -> float:
        return self.value

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class PoissonLikeAlpha(AlphaSequence):
    """``alpha_n = 1 - rho/n``, valid for ``n > rho``.

    Run survivals are ``rho**(n-1) / (n-1)!`` and the expected run length is
    ``exp(rho)``.  Evaluation at ``n <= rho`` is rejected (the value would
    leave (0, 1)); for ``rho >= 1`` combine with a :class:`TableAlpha`
    override at small run lengths.
    """

    rho: float
    alpha_inf: float = 0.5

    def __post_init__(self):
        if not self.rho > 0.0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        _check_unit_open(self.alpha_inf, "alpha_inf")

    def value_at(self, n: int) -> float:
        if n <= self.rho:
            raise DomainError(
                f"poisson-like sequence with rho={self.rho} is only valid for "
                f"run lengths n > rho, got n={n}"
            )
        return 1.0 - self.rho / n

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=float)
        if np.any(ns <= self.rho):
            raise DomainError(
                f"poisson-like sequence with rho={self.rho} is only valid for "
                "run lengths n > rho"
            )
        return 1.0 - self.rho / ns

    def tail_lower_bound(self, n0: int) -> float:
        if n0 > self.rho:
            return 1.0 - self.rho / n0
        return 0.0


@dataclass(frozen=True)
class ScaledHazardAlpha(AlphaSequence):
    """``alpha_n = rate(n * step) * step + correction(n, step) * step``.

    ``rate`` is a nonnegative hazard evaluated on the rescaled time grid;
    the optional bounded ``correction`` perturbs the leading term.  Values
    are validated lazily: every evaluation must land in (0, 1), otherwise
    the scale ``step`` is too coarse for the hazard.
    """

    rate: Callable[[np.ndarray], np.ndarray]
    step: float
    correction: Callable[[np.ndarray, float], np.ndarray] | None = None
    alpha_inf: float = 0.5

    def __post_init__(self):
        if not self.step > 0.0:
            raise DomainError(f"step must be positive, got {self.step}")
        _check_unit_open(self.alpha_inf, "alpha_inf")

    def value_at(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"run length must be >= 1, got {n}")
        a = float(self.rate(np.float64(n * self.step))) * self.step
        if self.correction is not None:
            a += float(self.correction(np.float64(n), self.step)) * self.step
        return _check_unit_open(a, f"scaled-hazard switch probability at n={n}")

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=float)
        a = np.asarray(self.rate(ns * self.step), dtype=float) * self.step
        if self.correction is not None:
            a = a + np.asarray(self.correction(ns, self.step), dtype=float) * self.step
        if a.size and (not np.all((a > 0.0) & (a < 1.0)) or np.any(np.isnan(a))):
            bad = int(ns.ravel()[np.argmax(~((a > 0.0) & (a < 1.0)))])
            raise DomainError(
                f"scaled-hazard switch probability leaves (0, 1) at run length {bad}; "
                f"reduce the step (step={self.step})"
            )
        return a


@dataclass(frozen=True)
class TableAlpha(AlphaSequence):
    """Explicit values for small run lengths plus a tail rule.

    Beyond the table, either delegate to ``tail`` (another sequence) or,
    with ``hold_last=True``, extrapolate the last tabulated value; the
    latter is a heuristic and is flagged as such for tail certification.
    """

    values: tuple[float, ...]
    tail: AlphaSequence | None = None
    hold_last: bool = False
    alpha_inf: float = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for k, v in enumerate(self.values, start=1):
            _check_unit_open(v, f"table switch probability at n={k}")
        if not self.values and self.tail is None:
            raise DomainError("table sequence needs values or a tail rule")
        if self.alpha_inf is None:
            inf = self.tail.alpha_inf if self.tail is not None else self.values[-1]
            object.__setattr__(self, "alpha_inf", inf)
        else:
            _check_unit_open(self.alpha_inf, "alpha_inf")

    def value_at(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"run length must be >= 1, got {n}")
        if n <= len(self.values):
            return self.values[n - 1]
        if self.tail is not None:
            return self.tail.value_at(n)
        if self.hold_last:
            return self.values[-1]
        raise DomainError(
            f"table sequence has no rule beyond run length {len(self.values)} "
            f"(requested {n}); declare a tail or set hold_last=True"
        )

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns)
        out = np.empty(ns.shape, dtype=float)
        head = ns <= len(self.values)
        if self.values:
            idx = np.clip(ns, 1, len(self.values)).astype(np.intp) - 1
            out[head] = np.asarray(self.values)[idx[head]]
        if np.all(head):
            return out
        if self.tail is not None:
            out[~head] = self.tail.values_at(ns[~head])
        elif self.hold_last:
            out[~head] = self.values[-1]
        else:
            raise DomainError(
                f"table sequence has no rule beyond run length {len(self.values)}"
            )
        return out

    def tail_lower_bound(self, n0: int) -> float:
        parts = []
        if n0 <= len(self.values):
            parts.append(min(self.values[n0 - 1 :]))
        if self.tail is not None:
            parts.append(self.tail.tail_lower_bound(max(n0, len(self.values) + 1)))
        elif self.hold_last:
            parts.append(self.values[-1])
        else:
            return 0.0
        return min(parts)

    @property
    def is_constant(self) -> bool:
        if not self.values:
            return self.tail is not None and self.tail.is_constant
        v = self.values[0]
        if any(x != v for x in self.values):
            return False
        if self.tail is not None:
            return self.tail.is_constant and self.tail.value_at(len(self.values) + 1) == v
        return self.hold_last

    @property
    def tail_is_heuristic(self) -> bool:
        if self.tail is not None:
            return self.tail.tail_is_heuristic
        return self.hold_last


@dataclass(frozen=True)
class CustomAlpha(AlphaSequence):
    """Arbitrary rule ``n -> alpha_n`` with an optional declared tail bound.

    Escape hatch for families outside the packaged kinds (used mainly in
    verification work).  Without ``tail_bound``, no tail control is claimed
    and series over this sequence cannot be certified.
    """

    fn: Callable[[int], float]
    tail_bound: Callable[[int], float] | None = None
    alpha_inf: float = 0.5
    _eq_token: object = field(default=None, compare=True)

    def __post_init__(self):
        _check_unit_open(self.alpha_inf, "alpha_inf")

    def value_at(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"run length must be >= 1, got {n}")
        return _check_unit_open(float(self.fn(n)), f"custom switch probability at n={n}")

    def tail_lower_bound(self, n0: int) -> float:
        if self.tail_bound is None:
            return 0.0
        return max(0.0, float(self.tail_bound(n0)))
