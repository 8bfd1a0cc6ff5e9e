"""Long-run behaviour of the walk: drift, variance constant, CLT check.

The walk drifts at rate ``(Theta_plus - Theta_minus) / (Theta_plus +
Theta_minus)`` (ratio of expected run lengths).  The fluctuation constant is
an expectation over the first two jump times of the chain started at
(+1, memory 1); it is computed from the exact inter-jump laws with
certified tails, never by Monte Carlo.  Simulation enters only in
``clt_check``, which confronts the empirical law of the centred, diffusively
scaled walk with the two Gaussian readings of the constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .chain import simulate_walk_endpoints
from .errors import DomainError
from .invariant import theta
from .model import MINUS, PLUS, ChainState, ModelSpec

__all__ = ["drift", "gap_moments", "upsilon", "AsymptoticReport", "clt_check"]

_BLOCK = 4096
_MOMENT_MAX_TERMS = 10**7


def drift(spec: ModelSpec) -> float:
    """Almost-sure limit of S_n / n."""
    if not spec.is_walk:
        raise DomainError("the walk drift requires a two-letter model")
    t_minus = theta(spec, MINUS).require_finite("expected run length of letter -1")
    t_plus = theta(spec, PLUS).require_finite("expected run length of letter +1")
    return (t_plus - t_minus) / (t_plus + t_minus)


def gap_moments(spec: ModelSpec, letter: int, tol: float = 1e-12) -> tuple[float, float]:
    """First and second moment of an inter-jump time (run of ``letter``).

    The gap starts from memory 1, so its law is ``alpha_n P(n)``.  Sums are
    truncated once the family's geometric tail bound certifies the error;
    without tail control the moment condition cannot be checked and a
    domain error is raised.
    """
    seq = spec.alphas[letter]
    m1 = 0.0
    m2 = 0.0
    log_surv = 0.0
    n = 0
    while True:
        ns = n + 1 + np.arange(_BLOCK)
        a = seq.values_at(ns)
        logs = np.log1p(-a)
        surv = np.exp(log_surv + np.concatenate(([0.0], np.cumsum(logs[:-1]))))
        pmf = a * surv
        m1 += float(ns @ pmf)
        m2 += float((ns * ns) @ pmf)
        log_surv += float(np.sum(logs))
        n += _BLOCK
        c = seq.tail_lower_bound(n + 1)
        if c > 0.0:
            q = 1.0 - c
            head = n + 1
            # sum_{m>=0} (head+m)^2 q^m, dominating the tail of the 2nd moment
            geom2 = head * head / c + 2.0 * head * q / (c * c) + q * (1.0 + q) / (c**3)
            if math.exp(log_surv) * geom2 <= tol:
                return m1, m2
        if n >= _MOMENT_MAX_TERMS:
            raise DomainError(
                "gap moments not certifiable: no tail control within "
                f"{_MOMENT_MAX_TERMS} terms (first-moment condition unverified)"
            )


def upsilon(spec: ModelSpec, tol: float = 1e-12) -> float:
    """Fluctuation constant of the walk.

    Equals ``4 / (Theta_- + Theta_+)`` times the second moment of
    ``T_1 - c T_2`` with ``c = Theta_+ / (Theta_- + Theta_+)``, where the
    first jump ends the initial +1 run and the second gap is a -1 run, the
    two being independent.
    """
    if not spec.is_walk:
        raise DomainError("the fluctuation constant requires a two-letter model")
    t_minus = theta(spec, MINUS).require_finite("expected run length of letter -1")
    t_plus = theta(spec, PLUS).require_finite("expected run length of letter +1")
    c = t_plus / (t_minus + t_plus)
    e1, e1_sq = gap_moments(spec, PLUS, tol=tol)   # T_1: the initial +1 run
    e2, e2_sq = gap_moments(spec, MINUS, tol=tol)  # T_2 - T_1: the -1 run
    # T_1 - c T_2 = (1 - c) T_1 - c (T_2 - T_1), the two gaps independent
    second = (1 - c) ** 2 * e1_sq - 2 * c * (1 - c) * e1 * e2 + c * c * e2_sq
    return 4.0 / (t_minus + t_plus) * second


@dataclass(frozen=True)
class AsymptoticReport:
    """Outcome of the distributional check of the central limit behaviour.

    Two Gaussian candidates are confronted with the empirical law of
    ``(S_n - n xi) / sqrt(n)``: standard deviation ``sqrt(upsilon)`` (the
    constant read as a variance) and ``upsilon`` (read as a standard
    deviation).  ``winner`` records the better fit rather than assuming one.
    """

    xi: float
    upsilon: float
    #: sum_k k P_i(k) per letter (-1, +1): the moment condition behind the CLT
    weighted_survival_sums: tuple[float, float]
    n: int
    replicas: int
    empirical_mean: float
    empirical_std: float
    ks_std_sqrt_upsilon: float
    ks_std_upsilon: float

    @property
    def winner(self) -> str:
        if self.ks_std_sqrt_upsilon <= self.ks_std_upsilon:
            return "std=sqrt(upsilon)"
        return "std=upsilon"

    @property
    def candidates_coincide(self) -> bool:
        return math.isclose(self.upsilon, 1.0, rel_tol=0.0, abs_tol=1e-12)

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "xi": self.xi,
            "upsilon": self.upsilon,
            "weighted_survival_sums": list(self.weighted_survival_sums),
            "n": self.n,
            "replicas": self.replicas,
            "empirical_mean": self.empirical_mean,
            "empirical_std": self.empirical_std,
            "ks_std_sqrt_upsilon": self.ks_std_sqrt_upsilon,
            "ks_std_upsilon": self.ks_std_upsilon,
            "winner": self.winner,
            "candidates_coincide": self.candidates_coincide,
        }


def clt_check(
    spec: ModelSpec,
    n: int,
    replicas: int,
    rng: np.random.Generator,
) -> AsymptoticReport:
    """Simulate the centred scaled walk and score both variance readings."""
    xi = drift(spec)
    ups = upsilon(spec)
    # sum_k k P(k) = (E[T^2] + E[T]) / 2 for the inter-jump time T
    diag = tuple(
        0.5 * (m2 + m1) for m1, m2 in (gap_moments(spec, MINUS), gap_moments(spec, PLUS))
    )
    s = simulate_walk_endpoints(spec, ChainState(PLUS, 1), n, replicas, rng)
    z = (s - n * xi) / math.sqrt(n)
    ks_sqrt = stats.kstest(z, "norm", args=(0.0, math.sqrt(ups))).statistic
    ks_lin = stats.kstest(z, "norm", args=(0.0, ups)).statistic
    return AsymptoticReport(
        xi=xi,
        upsilon=ups,
        weighted_survival_sums=diag,
        n=n,
        replicas=replicas,
        empirical_mean=float(np.mean(z)),
        empirical_std=float(np.std(z, ddof=1)),
        ks_std_sqrt_upsilon=float(ks_sqrt),
        ks_std_upsilon=float(ks_lin),
    )
