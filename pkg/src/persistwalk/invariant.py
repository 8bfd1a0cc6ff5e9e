"""Run survivals, expected run lengths and the invariant law of the chain.

The invariant probability exists iff every letter's expected run length
``Theta_i = sum_{n>=1} P_i(n)`` is finite, where ``P_i(n)`` is the survival
``prod_{k<n}(1 - alpha_{i,k})``.  It then factorises over letters as
``nu(a_i, n) = v*_i P_i(n) / <Theta, v*>`` with ``v*`` the Frobenius left
eigenvector of the jump matrix, and puts no mass on infinite memories.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .alphas import AlphaSequence
from .errors import ConvergenceError, DomainError, NoInvariantMeasureError
from .model import INFINITE_MEMORY, ChainState, ModelSpec

__all__ = [
    "survival",
    "survivals",
    "ThetaResult",
    "theta",
    "theta_of_sequence",
    "frobenius_left_vector",
    "InvariantMeasure",
    "stationary_measure",
    "stationarity_residual",
    "reversed_kernel",
    "sample_stationary",
]

log = logging.getLogger(__name__)

_BLOCK = 8192


def survivals(seq_or_spec, letter_or_mmax, m_max: int | None = None) -> np.ndarray:
    """Run survivals P(1..m_max), accumulated in log space.

    Accepts either ``survivals(spec, letter, m_max)`` or
    ``survivals(alpha_sequence, m_max)``.
    """
    if m_max is None:
        seq, m_max = seq_or_spec, letter_or_mmax
    else:
        seq = seq_or_spec.alphas[letter_or_mmax]
    if m_max < 1:
        raise DomainError(f"m_max must be >= 1, got {m_max}")
    a = seq.values_upto(m_max - 1) if m_max > 1 else np.empty(0)
    logs = np.concatenate(([0.0], np.cumsum(np.log1p(-a))))
    return np.exp(logs)


def survival(spec: ModelSpec, letter: int, m: int) -> float:
    """P_i(m) = prod_{k=1}^{m-1} (1 - alpha_{i,k}); the empty product is 1."""
    if m < 1:
        raise DomainError(f"memory must be >= 1, got {m}")
    if m == 1:
        return 1.0
    a = spec.alphas[letter].values_upto(m - 1)
    return float(math.exp(np.sum(np.log1p(-a))))


@dataclass(frozen=True)
class ThetaResult:
    """Certified partial sum of run survivals, or a divergence flag.

    ``value`` is meaningful only when ``diverged`` is False; then
    ``|Theta - value| <= tail_bound``.
    """

    value: float
    diverged: bool
    n_terms: int
    tail_bound: float
    tail_is_heuristic: bool = False
    reason: str | None = None

    def require_finite(self, what: str = "expected run length") -> float:
        if self.diverged:
            raise NoInvariantMeasureError(f"{what} diverges ({self.reason})")
        return self.value


def theta_of_sequence(
    seq: AlphaSequence,
    tol: float = 1e-12,
    term_cap: int = 2**20,
    sum_ceiling: float = 1e12,
) -> ThetaResult:
    """Sum run survivals of one sequence until the tail is certified.

    The family's tail lower bound ``c = inf alpha_k`` beyond the current
    index gives the geometric majorant ``tail <= P(n+1)/c``.  Without tail
    control the sum is flagged divergent once it exceeds ``sum_ceiling`` or
    uses up ``term_cap`` terms.
    """
    partial = 0.0
    log_surv = 0.0  # log P(n+1) for the next block start
    n = 0
    while True:
        ns = n + 1 + np.arange(_BLOCK)
        a = seq.values_at(ns)
        logs = np.log1p(-a)
        surv = np.exp(log_surv + np.concatenate(([0.0], np.cumsum(logs[:-1]))))
        partial += float(np.sum(surv))
        log_surv += float(np.sum(logs))
        n += _BLOCK
        c = seq.tail_lower_bound(n + 1)
        if c > 0.0:
            tail = math.exp(log_surv) / c
            if tail <= tol:
                return ThetaResult(
                    value=partial,
                    diverged=False,
                    n_terms=n,
                    tail_bound=tail,
                    tail_is_heuristic=seq.tail_is_heuristic,
                )
        if partial > sum_ceiling:
            return ThetaResult(
                value=math.inf, diverged=True, n_terms=n, tail_bound=math.inf,
                reason=f"partial sum exceeded ceiling {sum_ceiling:g}",
            )
        if n >= term_cap:
            return ThetaResult(
                value=math.inf, diverged=True, n_terms=n, tail_bound=math.inf,
                reason=f"no certifiable tail within {term_cap} terms",
            )


def theta(spec: ModelSpec, letter: int, tol: float = 1e-12, **kwargs) -> ThetaResult:
    """Expected run length of one letter (certified) or a divergence flag."""
    return theta_of_sequence(spec.alphas[letter], tol=tol, **kwargs)


def frobenius_left_vector(
    jump_matrix, tol: float = 1e-12, max_iter: int = 200_000
) -> np.ndarray:
    """Positive left eigenvector of the jump matrix, normalised to sum 1.

    Power iteration on the half-lazy transpose ``(I + P^T)/2``; the damping
    removes periodicity (the two-letter matrix is antidiagonal) without
    changing the eigenvector.  Residual is checked on the original equation
    ``P^T v = v``.
    """
    P = np.asarray(jump_matrix, dtype=float)
    K = P.shape[0]
    v = np.full(K, 1.0 / K)
    for _ in range(max_iter):
        w = 0.5 * (v + P.T @ v)
        w /= w.sum()
        if float(np.abs(P.T @ w - w).sum()) < tol:
            return w
        v = w
    raise ConvergenceError(
        f"power iteration did not reach residual {tol:g} in {max_iter} steps"
    )


@dataclass(frozen=True)
class InvariantMeasure:
    """Invariant law of the chain on a truncated memory range.

    ``nu_table[i, m - 1]`` holds ``nu(a_i, m)`` for ``m <= truncation``;
    ``residuals[i]`` is the certified mass of letter i beyond the table.
    """

    spec: ModelSpec
    theta: np.ndarray
    v_star: np.ndarray
    nu_table: np.ndarray
    truncation: int
    residuals: np.ndarray

    @property
    def residual_mass(self) -> float:
        return float(self.residuals.sum())

    @property
    def normalisation(self) -> float:
        """<Theta, v*>, the common denominator of the table."""
        return float(self.theta @ self.v_star)

    def nu(self, letter: int, memory) -> float:
        """nu(a_letter, memory), exact at any memory (0 at infinity)."""
        if memory == INFINITE_MEMORY:
            return 0.0
        if memory <= self.truncation:
            return float(self.nu_table[letter, memory - 1])
        p = survival(self.spec, letter, memory)
        return float(self.v_star[letter] * p / self.normalisation)

    def nu_x(self) -> np.ndarray:
        """Letter marginal Theta_i v*_i / <Theta, v*>."""
        return self.theta * self.v_star / self.normalisation

    def nu_mem(self, letter: int) -> np.ndarray:
        """Conditional memory law P_i(m) / Theta_i on the truncated range."""
        Z = self.v_star[letter] / self.normalisation
        return self.nu_table[letter] / (Z * self.theta[letter])

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "theta": [float(t) for t in self.theta],
            "v_star": [float(v) for v in self.v_star],
            "truncation": int(self.truncation),
            "residual_mass": self.residual_mass,
            "table": [
                [self.spec.letters[i], int(m + 1), float(self.nu_table[i, m])]
                for i in range(self.spec.K)
                for m in range(self.truncation)
            ],
        }


_SURVIVAL_FLOOR = 1e-16
_TRUNCATION_FLOOR = 10_000
_TRUNCATION_CAP = 2**20


def stationary_measure(spec: ModelSpec, tol: float = 1e-12) -> InvariantMeasure:
    """Invariant probability of the chain, tabulated up to a truncation.

    Raises :class:`NoInvariantMeasureError` when some expected run length
    diverges (then no invariant probability exists).
    """
    results = [theta(spec, i, tol=tol) for i in range(spec.K)]
    thetas = np.array([r.require_finite(f"expected run length of letter {i}")
                       for i, r in enumerate(results)])
    v_star = frobenius_left_vector(spec.jump_array(), tol=tol)
    Z = float(thetas @ v_star)

    surv = [survivals(spec.alphas[i], _TRUNCATION_FLOOR) for i in range(spec.K)]
    truncation = _TRUNCATION_FLOOR
    for i in range(spec.K):
        while surv[i][-1] >= _SURVIVAL_FLOOR and len(surv[i]) < _TRUNCATION_CAP:
            surv[i] = survivals(spec.alphas[i], min(2 * len(surv[i]), _TRUNCATION_CAP))
        below = np.flatnonzero(surv[i] < _SURVIVAL_FLOOR)
        point = int(below[0]) + 1 if below.size else len(surv[i])
        truncation = max(truncation, point)
    truncation = min(truncation, _TRUNCATION_CAP)

    nu_table = np.empty((spec.K, truncation))
    residuals = np.empty(spec.K)
    for i in range(spec.K):
        s = surv[i] if len(surv[i]) >= truncation else survivals(spec.alphas[i], truncation)
        s = s[:truncation]
        nu_table[i] = v_star[i] * s / Z
        residuals[i] = max(0.0, v_star[i] * (thetas[i] - float(np.sum(s))) / Z)
    return InvariantMeasure(
        spec=spec, theta=thetas, v_star=v_star, nu_table=nu_table,
        truncation=truncation, residuals=residuals,
    )


def stationarity_residual(spec: ModelSpec, measure: InvariantMeasure) -> float:
    """L1 distance between nu and nu applied to the kernel, on the table."""
    N = measure.truncation
    out = 0.0
    alpha = [spec.alphas[i].values_upto(N) for i in range(spec.K)]
    switch_mass = [float(np.sum(measure.nu_table[i] * alpha[i])) for i in range(spec.K)]
    for i in range(spec.K):
        # memory 1 row: inflow from switches of every other letter
        inflow = math.fsum(
            spec.jump_matrix[j][i] * switch_mass[j] for j in range(spec.K) if j != i
        )
        out += abs(inflow - measure.nu_table[i, 0])
        stay = measure.nu_table[i, : N - 1] * (1.0 - alpha[i][: N - 1])
        out += float(np.abs(stay - measure.nu_table[i, 1:]).sum())
    return out


def reversed_kernel(
    spec: ModelSpec,
    measure: InvariantMeasure,
    state_from: ChainState,
    state_to: ChainState,
) -> float:
    """Transition probability of the time-reversed chain.

    Runs unwind deterministically; from a reset state ``(a_j, 1)`` the
    reversed chain jumps into ``(a_i, n)`` with probability
    ``(v*_i / v*_j) p_{i,j} alpha_{i,n} P_i(n)``.
    """
    spec.check_state(state_from)
    spec.check_state(state_to)
    i, n = state_to.letter, state_to.memory
    j, m = state_from.letter, state_from.memory
    if n == INFINITE_MEMORY or m == INFINITE_MEMORY:
        return 0.0
    if m >= 2:
        return 1.0 if (i == j and n == m - 1) else 0.0
    if i == j:
        return 0.0
    a = spec.alphas[i].value_at(n)
    p = survival(spec, i, n)
    return float(measure.v_star[i] / measure.v_star[j] * spec.jump_matrix[i][j] * a * p)


def sample_stationary(
    spec: ModelSpec,
    measure: InvariantMeasure,
    rng: np.random.Generator,
    size: int | None = None,
    residual_tol: float = 1e-6,
):
    """Draw from the invariant law by inverse CDF on the truncated table.

    Residual mass beyond the table is assigned to the truncation boundary
    (with a logged warning when actually hit).  With ``size=None`` returns a
    single :class:`ChainState`, otherwise arrays (letters, memories).
    """
    if measure.residual_mass > residual_tol:
        raise DomainError(
            f"residual mass {measure.residual_mass:.3e} exceeds {residual_tol:g}; "
            "increase the truncation before sampling"
        )
    K, N = measure.nu_table.shape
    flat = np.concatenate([
        np.append(measure.nu_table[i], measure.residuals[i]) for i in range(K)
    ])
    cdf = np.cumsum(flat)
    n_draws = 1 if size is None else size
    u = rng.random(n_draws) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(flat) - 1)
    letters = idx // (N + 1)
    memories = idx % (N + 1) + 1
    boundary = memories == N + 1
    if boundary.any():
        log.warning(
            "%d stationary draw(s) fell in the residual mass; assigned to the "
            "truncation boundary memory %d", int(boundary.sum()), N,
        )
        memories = np.where(boundary, N, memories)
    if size is None:
        return ChainState(int(letters[0]), int(memories[0]))
    return letters.astype(np.int64), memories.astype(np.int64)
