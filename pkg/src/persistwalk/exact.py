"""Exact finite-time laws of the persistent walk.

Everything here reduces to two families of composition tables per letter:
``A(m, b)`` sums, over all ways of splitting ``b`` into ``m`` runs, the
probability that the chain spends exactly those run lengths in the letter
(each run ending with a switch), and ``Ahat(m, b)`` is the same with the
last run still open.  Both satisfy one-step recurrences in ``m`` (a discrete
convolution against the run-length law), which turns the exponential
composition sums into an O(m b^2) dynamic programme.  The walk position
``S_n`` is then read off the local time of the ``+1`` letter.

All outer accumulations use compensated summation (``math.fsum``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb, factorial, fsum

import numpy as np

from .errors import DomainError
from .invariant import survivals, theta
from .model import MINUS, PLUS, ModelSpec

__all__ = [
    "ExactLawTable",
    "ExactLawEngine",
    "a_table",
    "ahat_table",
    "eta",
    "markov_case_pmf",
    "survival_of_sum",
    "pseudo_poisson_survival",
    "gen_fun_G",
    "gen_fun_Phat",
    "phi_s_tau",
    "l_tau_pmf",
]


def _run_weights(spec: ModelSpec, letter: int, b_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Survivals P(u) and switch weights P(u) alpha_u, 1-indexed up to b_max."""
    p = np.empty(b_max + 1)
    p[0] = np.nan  # index 0 unused
    p[1:] = survivals(spec.alphas[letter], b_max)
    w = np.empty_like(p)
    w[0] = np.nan
    w[1:] = p[1:] * spec.alphas[letter].values_upto(b_max)
    return p, w


def a_table(spec: ModelSpec, letter: int, m_max: int, b_max: int) -> np.ndarray:
    """Closed-run composition table A(m, b) for one letter.

    ``A[m, b]`` is the probability weight of ``m`` completed runs totalling
    ``b`` steps; ``A[0, b]`` is 1 only at ``b = 0`` and ``A[m, b] = 0`` for
    ``b < m``.
    """
    _, w = _run_weights(spec, letter, b_max)
    A = np.zeros((m_max + 1, b_max + 1))
    A[0, 0] = 1.0
    for m in range(1, m_max + 1):
        prev = A[m - 1]
        for b in range(m, b_max + 1):
            A[m, b] = fsum(w[u] * prev[b - u] for u in range(1, b - m + 2))
    return A


def ahat_table(spec: ModelSpec, letter: int, m_max: int, b_max: int) -> np.ndarray:
    """Open-run companion of :func:`a_table`: the last run has not switched.

    ``Ahat[1, b]`` is the plain survival P(b); in general
    ``Ahat[m, b] = sum_l A[m-1, b-l] P(l)``.
    """
    p, _ = _run_weights(spec, letter, b_max)
    A = a_table(spec, letter, max(m_max - 1, 0), b_max)
    return _ahat_from_a(A, p, m_max, b_max)


def _ahat_from_a(A: np.ndarray, p: np.ndarray, m_max: int, b_max: int) -> np.ndarray:
    H = np.zeros((m_max + 1, b_max + 1))
    for m in range(1, m_max + 1):
        prev = A[m - 1]
        for b in range(m, b_max + 1):
            H[m, b] = fsum(p[u] * prev[b - u] for u in range(1, b - m + 2))
    return H


@dataclass(frozen=True)
class ExactLawTable:
    """Law of the local time L_n(1) (equivalently of S_n = 1 + 2k - n).

    ``eta[k]`` is P(L_n(1) = k).  The two addends split the event by the
    direction of travel at time n: ``eta_descending`` collects the paths on
    a ``-1`` stretch, ``eta_ascending`` those on a ``+1`` stretch.
    """

    n: int
    eta: np.ndarray
    eta_ascending: np.ndarray
    eta_descending: np.ndarray
    a_tables: dict
    ahat_tables: dict
    notes: str = "exact dynamic programme, float64 with compensated outer sums"

    def s_values(self) -> np.ndarray:
        """Walk positions 1 + 2k - n matching the pmf entries."""
        return 1 + 2 * np.arange(self.n + 1) - self.n

    def s_pmf(self) -> dict[int, float]:
        return {int(s): float(p) for s, p in zip(self.s_values(), self.eta)}


class ExactLawEngine:
    """Shared composition tables for all horizons up to ``n_max``.

    Build once, then query ``eta(n)`` or the joint laws for any
    ``n <= n_max``; the tables do not depend on the horizon.
    """

    def __init__(self, spec: ModelSpec, n_max: int):
        if not spec.is_walk:
            raise DomainError("exact walk laws require a two-letter model")
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max}")
        self.spec = spec
        self.n_max = n_max
        b_max = n_max + 1
        m_max = n_max // 2 + 1
        self.b_max, self.m_max = b_max, m_max
        self.p = {}
        self.A = {}
        self.Ahat = {}
        for letter in (MINUS, PLUS):
            p, w = _run_weights(spec, letter, b_max)
            A = np.zeros((m_max + 1, b_max + 1))
            A[0, 0] = 1.0
            for m in range(1, m_max + 1):
                prev = A[m - 1]
                for b in range(m, b_max + 1):
                    A[m, b] = fsum(w[u] * prev[b - u] for u in range(1, b - m + 2))
            self.p[letter] = p
            self.A[letter] = A
            self.Ahat[letter] = _ahat_from_a(A, p, m_max + 1, b_max)

    def eta_parts(self, n: int, k: int) -> tuple[float, float]:
        """(ascending, descending) contributions to P(L_n(1) = k)."""
        if not 0 <= k <= n <= self.n_max:
            raise DomainError(f"need 0 <= k <= n <= {self.n_max}")
        t = n - k
        A1, A2 = self.A[MINUS], self.A[PLUS]
        H1, H2 = self.Ahat[MINUS], self.Ahat[PLUS]
        asc = fsum(H2[m + 1, k + 1] * A1[m, t] for m in range(0, min(k, t) + 1))
        desc = fsum(A2[m, k + 1] * H1[m, t] for m in range(1, min(k + 1, t) + 1))
        return asc, desc

    def eta(self, n: int) -> np.ndarray:
        """pmf of L_n(1) over k = 0..n."""
        out = np.empty(n + 1)
        for k in range(n + 1):
            asc, desc = self.eta_parts(n, k)
            out[k] = asc + desc
        return out

    def eta_table(self, n: int) -> ExactLawTable:
        asc = np.empty(n + 1)
        desc = np.empty(n + 1)
        for k in range(n + 1):
            asc[k], desc[k] = self.eta_parts(n, k)
        return ExactLawTable(
            n=n, eta=asc + desc, eta_ascending=asc, eta_descending=desc,
            a_tables=self.A, ahat_tables=self.Ahat,
        )

    def joint_ascending(self, n: int, k: int, m: int) -> float:
        """P(L_n(1) = k and time n falls between jumps 2m and 2m+1)."""
        if not 0 <= k <= n <= self.n_max:
            raise DomainError(f"need 0 <= k <= n <= {self.n_max}")
        if not 0 <= m <= min(k, n - k):
            return 0.0
        return float(self.Ahat[PLUS][m + 1, k + 1] * self.A[MINUS][m, n - k])

    def joint_descending(self, n: int, k: int, m: int) -> float:
        """P(L_n(1) = k and time n falls between jumps 2m-1 and 2m)."""
        if not 0 <= k <= n <= self.n_max:
            raise DomainError(f"need 0 <= k <= n <= {self.n_max}")
        if not 1 <= m <= min(k + 1, n - k):
            return 0.0
        return float(self.A[PLUS][m, k + 1] * self.Ahat[MINUS][m, n - k])


def eta(spec: ModelSpec, n: int) -> ExactLawTable:
    """Law of L_n(1) and S_n for the walk started at (+1, memory 1)."""
    return ExactLawEngine(spec, n).eta_table(n)


def markov_case_pmf(alpha_minus: float, alpha_plus: float, n: int) -> np.ndarray:
    """pmf of L_n(1) for constant switch probabilities, in binomial form.

    The two double sums count sign-change patterns directly; the degenerate
    never-switch path (k = n, zero completed runs) closes the boundary.
    """
    if not (0.0 < alpha_minus < 1.0 and 0.0 < alpha_plus < 1.0):
        raise DomainError("switch probabilities must lie in (0, 1)")
    a1, a2 = alpha_minus, alpha_plus
    out = np.empty(n + 1)
    for k in range(n + 1):
        t = n - k
        terms = [
            comb(k, m - 1) * comb(t - 1, m - 1)
            * a1 ** (m - 1) * (1 - a1) ** (t - m) * a2**m * (1 - a2) ** (k + 1 - m)
            for m in range(1, min(k + 1, t) + 1)
        ]
        terms += [
            comb(k, m) * comb(t - 1, m - 1)
            * a1**m * (1 - a1) ** (t - m) * a2**m * (1 - a2) ** (k - m)
            for m in range(1, min(k, t) + 1)
        ]
        if k == n:
            terms.append((1 - a2) ** n)
        out[k] = fsum(terms)
    return out


def survival_of_sum(survival_fns, n_max: int) -> np.ndarray:
    """Survival of a sum of independent nonnegative integer variables.

    ``survival_fns`` are arrays ``f_j`` with ``f_j[i] = P(xi_j >= i)``; each
    must start at 1, be nonincreasing, and cover indices up to
    ``n_max + k - 1``.  The result combines, over all nonempty subsets of
    the variables, iterated forward differences of shifted convolutions of
    the survivals.
    """
    fs = [np.asarray(f, dtype=float) for f in survival_fns]
    k = len(fs)
    if k == 0:
        raise DomainError("need at least one survival function")
    if k > 20:
        raise DomainError(f"subset enumeration is capped at 20 variables, got {k}")
    need = n_max + k
    for j, f in enumerate(fs):
        if len(f) < need:
            raise DomainError(f"survival {j} must cover indices 0..{need - 1}")
        if f[0] != 1.0:
            raise DomainError(f"survival {j} must start at 1, got {f[0]}")
        if np.any(np.diff(f) > 0) or np.any(f < 0):
            raise DomainError(f"survival {j} must be nonincreasing and nonnegative")
    per_n_terms: list[np.ndarray] = []
    for r in range(1, k + 1):
        for subset in combinations(range(k), r):
            g = fs[subset[0]][:need]
            for j in subset[1:]:
                g = np.convolve(g, fs[j][:need])[:need]
            g = g[k - r :]  # compose with the shift theta^(k-r)
            for _ in range(r - 1):  # iterated forward difference
                g = g[:-1] - g[1:]
            per_n_terms.append(g[: n_max + 1])
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        out[n] = fsum(t[n] for t in per_n_terms)
    return out


def pseudo_poisson_survival(rhos, n: int) -> float:
    """Survival at ``n`` of a sum of independent pseudo-Poisson variables.

    A pseudo-Poisson variable with parameter rho has survival
    ``rho**n / n!``; sums of independent ones admit the closed forms below
    (a single alternating sum per subset, or the specialised single-rho
    expression when all parameters agree).
    """
    rhos = [float(r) for r in rhos]
    k = len(rhos)
    if k == 0:
        raise DomainError("need at least one parameter")
    for r in rhos:
        if not 0.0 < r < 1.0:
            raise DomainError(f"pseudo-Poisson parameters must lie in (0, 1), got {r}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if all(r == rhos[0] for r in rhos):
        rho = rhos[0]
        terms = []
        for t in range(k):
            inner = fsum(
                comb(t, el) * (-1.0) ** el * float(el + k - t) ** (n - 1 + t)
                for el in range(t + 1)
            )
            terms.append(rho ** (n + t) / factorial(n + t) * comb(k - 1, t) * inner)
        return k * fsum(terms)
    terms = []
    for r in range(1, k + 1):
        for subset in combinations(range(k), r):
            s = fsum(rhos[i] for i in subset)
            for el in range(r):
                p = n + k + el - r
                terms.append(comb(r - 1, el) * (-1.0) ** el * s**p / factorial(p))
    return fsum(terms)


_SERIES_CHUNK = 4096
_SERIES_MAX_TERMS = 10**8


def _power_series(spec: ModelSpec, letter: int, x: float, with_switch: bool, tol: float) -> float:
    """sum_k P(k) x^k, optionally weighted by alpha_k, with certified tail.

    Survivals are nonincreasing, so the tail beyond k is at most
    ``P(k+1) x^(k+1) / (1 - x)``; summation stops once that bound drops
    below ``tol``.
    """
    if not 0.0 < x < 1.0:
        raise DomainError(f"series argument must lie in (0, 1), got {x}")
    seq = spec.alphas[letter]
    total = 0.0
    log_surv = 0.0
    k = 0
    log_x = math.log(x)
    while True:
        ns = k + 1 + np.arange(_SERIES_CHUNK)
        a = seq.values_at(ns)
        logs = np.log1p(-a)
        log_p = log_surv + np.concatenate(([0.0], np.cumsum(logs[:-1])))
        terms = np.exp(log_p + ns * log_x)
        if with_switch:
            terms = terms * a
        total += float(np.sum(terms))
        log_surv += float(np.sum(logs))
        k += _SERIES_CHUNK
        tail = math.exp(log_surv + (k + 1) * log_x) / (1.0 - x)
        if tail <= tol:
            return total
        if k >= _SERIES_MAX_TERMS:
            raise DomainError(
                f"series tail not below {tol:g} within {_SERIES_MAX_TERMS} terms"
            )


def gen_fun_Phat(spec: ModelSpec, letter: int, x: float, tol: float = 1e-15) -> float:
    """Generating function of run survivals, sum_k P(k) x^k for 0 < x < 1."""
    return _power_series(spec, letter, x, with_switch=False, tol=tol)


def gen_fun_G(spec: ModelSpec, letter: int, x: float, tol: float = 1e-15) -> float:
    """Generating function of completed runs, sum_k P(k) alpha_k x^k."""
    return _power_series(spec, letter, x, with_switch=True, tol=tol)


def phi_s_tau(spec: ModelSpec, lam: float, rho: float) -> float:
    """Generating value E[lam**S_tau] at an independent geometric time.

    ``tau`` has P(tau = j) = rho^j (1 - rho).  Requires 0 < rho < lam < 1
    (the walk can drift to -infinity fast enough that smaller lam diverges)
    and finite expected run lengths.
    """
    if not 0.0 < rho < lam < 1.0:
        raise DomainError(f"need 0 < rho < lam < 1, got rho={rho}, lam={lam}")
    if not spec.is_walk:
        raise DomainError("S_tau is only defined for two-letter models")
    for letter in (MINUS, PLUS):
        theta(spec, letter).require_finite(f"expected run length of letter {letter}")
    p1 = gen_fun_Phat(spec, MINUS, rho / lam)
    p2 = gen_fun_Phat(spec, PLUS, lam * rho)
    lr = lam * rho
    num = (rho - 1.0) * (lr * (p1 + p2) + (lr - 1.0) * p1 * p2)
    den = rho * (lr - 1.0) * p2 + lr * (rho - lam) * p1 + (lr - 1.0) * (rho - lam) * p1 * p2
    return num / den


def l_tau_pmf(spec: ModelSpec, rho: float, k: int) -> float:
    """P(L_tau(1) = k) at an independent geometric time.

    Combines the closed-run table of the ``+1`` letter with the generating
    functions of the ``-1`` letter evaluated at rho.
    """
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    for letter in (MINUS, PLUS):
        theta(spec, letter).require_finite(f"expected run length of letter {letter}")
    f1 = gen_fun_G(spec, MINUS, rho)
    g1 = gen_fun_Phat(spec, MINUS, rho)
    A2 = a_table(spec, PLUS, m_max=k + 1, b_max=k + 1)
    P2 = np.empty(k + 2)
    P2[0] = np.nan
    P2[1:] = survivals(spec.alphas[PLUS], k + 1)
    closed = fsum(A2[m, k + 1] * f1 ** (m - 1) for m in range(1, k + 2))
    open_run = fsum(
        A2[m, k + 1 - el] * P2[el] * f1**m
        for m in range(0, k + 1)
        for el in range(1, k - m + 2)
    )
    return (1.0 - rho) * rho**k * (g1 * closed + open_run)
