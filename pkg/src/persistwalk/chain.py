"""Simulation of the letter/memory chain and derived path functionals.

The chain moves by a two-branch kernel: from ``(letter i, memory n)`` it
either extends the run to ``(i, n + 1)`` with probability ``1 - alpha_{i,n}``
or switches to ``(j, 1)`` with probability ``alpha_{i,n} * p_{i,j}``.
Infinite-memory states self-loop with their own switch probability.
From a trajectory one derives the jump times, the counting process, the
local time of the ``+1`` letter, and (for two letters) the persistent walk
``S_t = X_0 + ... + X_t``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .alphas import AlphaSequence
from .errors import DomainError
from .model import INFINITE_MEMORY, MINUS, PLUS, ChainState, ModelSpec
from .rng import DEFAULT_SEED, make_rng

__all__ = [
    "Trajectory",
    "kernel_step",
    "simulate_path",
    "simulate_walk_endpoints",
    "memory_from_letters",
    "jump_times",
    "counting_and_local_time",
    "letter_margin_markov",
    "memory_margin_markov",
    "MemoryMarginRule",
    "GapPmf",
    "jump_gap_pmf",
]


def kernel_step(spec: ModelSpec, state: ChainState, rng: np.random.Generator) -> ChainState:
    """One move of the letter/memory kernel."""
    spec.check_state(state)
    seq = spec.alphas[state.letter]
    if state.memory_is_infinite:
        a = seq.alpha_inf
    else:
        a = seq.value_at(state.memory)
    if rng.random() >= a:
        if state.memory_is_infinite:
            return state
        return ChainState(state.letter, state.memory + 1)
    row = spec.jump_matrix[state.letter]
    if spec.K == 2:
        return ChainState(1 - state.letter, 1)
    j = int(np.searchsorted(np.cumsum(row), rng.random(), side="right"))
    return ChainState(min(j, spec.K - 1), 1)


@dataclass(frozen=True)
class Trajectory:
    """A realised path of the chain.

    ``letters[t]`` is the letter index at time t.  ``memories`` is a float
    array so that infinite memories are representable.  For two-letter
    models ``sums`` is the persistent walk including the initial increment.
    """

    spec: ModelSpec
    letters: np.ndarray
    memories: np.ndarray
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def horizon(self) -> int:
        return len(self.letters) - 1

    @property
    def increments(self) -> np.ndarray:
        """The +-1 increments (two-letter models)."""
        if not self.spec.is_walk:
            raise DomainError("increments are only defined for two-letter models")
        return 2 * self.letters.astype(np.int64) - 1

    @property
    def sums(self) -> np.ndarray:
        """Partial sums S_t = X_0 + ... + X_t."""
        return np.cumsum(self.increments)

    def to_csv(self, path) -> None:
        """Write columns t, X, M, S, N (S empty unless two letters)."""
        T = jump_times(self)
        N = np.searchsorted(T[1:], np.arange(len(self)), side="right")
        sums = self.sums if self.spec.is_walk else None
        with open(path, "w", newline="\n") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "X", "M", "S", "N"])
            for t in range(len(self)):
                m = self.memories[t]
                m_txt = "inf" if m == INFINITE_MEMORY else str(int(m))
                x_txt = str(self.spec.walk_value(int(self.letters[t]))) if self.spec.is_walk \
                    else self.spec.letters[int(self.letters[t])]
                s_txt = str(int(sums[t])) if sums is not None else ""
                w.writerow([t, x_txt, m_txt, s_txt, int(N[t])])


def simulate_path(
    spec: ModelSpec,
    init: ChainState,
    n: int,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> Trajectory:
    """Iterate the kernel ``n`` times from ``init``; trajectory has length n+1."""
    if n < 0:
        raise DomainError(f"horizon must be >= 0, got {n}")
    spec.check_state(init)
    if rng is None:
        if seed is None:
            seed = DEFAULT_SEED
        rng = make_rng(seed)
    letters = np.empty(n + 1, dtype=np.int64)
    memories = np.empty(n + 1, dtype=float)
    state = init
    letters[0], memories[0] = state.letter, state.memory
    for t in range(1, n + 1):
        state = kernel_step(spec, state, rng)
        letters[t], memories[t] = state.letter, state.memory
    return Trajectory(spec=spec, letters=letters, memories=memories, seed=seed)


def simulate_walk_endpoints(
    spec: ModelSpec,
    init: ChainState,
    n: int,
    replicas: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Final walk positions S_n over many replicas (vectorised, two letters).

    Replicas advance in lock-step sharing one generator; for process-level
    parallelism give each chunk its own split stream.
    """
    if not spec.is_walk:
        raise DomainError("walk endpoints require a two-letter model")
    spec.check_state(init)
    if init.memory_is_infinite:
        raise DomainError("vectorised simulation needs a finite initial memory")
    x = np.full(replicas, init.letter, dtype=np.int64)
    m = np.full(replicas, init.memory, dtype=np.int64)
    s = np.full(replicas, spec.walk_value(init.letter), dtype=np.int64)
    a = np.empty(replicas, dtype=float)
    for _ in range(n):
        minus = x == MINUS
        if minus.any():
            a[minus] = spec.alphas[MINUS].values_at(m[minus])
        if not minus.all():
            plus = ~minus
            a[plus] = spec.alphas[PLUS].values_at(m[plus])
        switch = rng.random(replicas) < a
        x = np.where(switch, 1 - x, x)
        m = np.where(switch, 1, m + 1)
        s += 2 * x - 1
    return s


def memory_from_letters(letters, m0: int = 1) -> np.ndarray:
    """Reconstruct the memory sequence from letters.

    With ``m0 = 1`` this is the run-length scan; a larger ``m0`` offsets the
    initial run (the walk is assumed to have already spent ``m0 - 1`` steps
    in its first letter).
    """
    letters = np.asarray(letters)
    if letters.size == 0:
        raise DomainError("letters must be non-empty")
    if not (isinstance(m0, (int, np.integer)) and m0 >= 1):
        raise DomainError(f"initial memory must be an integer >= 1, got {m0!r}")
    memories = np.empty(len(letters), dtype=np.int64)
    memories[0] = m0
    for t in range(1, len(letters)):
        memories[t] = memories[t - 1] + 1 if letters[t] == letters[t - 1] else 1
    return memories


def jump_times(traj) -> np.ndarray:
    """Times T_0 = 0 < T_1 < ... at which the letter changes, within horizon."""
    letters = traj.letters if isinstance(traj, Trajectory) else np.asarray(traj)
    if letters.size == 0:
        raise DomainError("letters must be non-empty")
    changes = np.flatnonzero(letters[1:] != letters[:-1]) + 1
    return np.concatenate(([0], changes))


def counting_and_local_time(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Counting process N_t and local time L_t(1) along a walk path.

    Requires the standard start (letter +1, memory 1).  Satisfies
    ``S_t = sum_{n<=t} (-1)^{N_n}`` and ``S_n = 1 + 2 L_n(1) - n`` exactly.
    """
    if not traj.spec.is_walk:
        raise DomainError("counting/local time require a two-letter model")
    if traj.letters[0] != PLUS or traj.memories[0] != 1:
        raise DomainError("counting/local time assume the start (letter +1, memory 1)")
    T = jump_times(traj)
    t_axis = np.arange(len(traj))
    counting = np.searchsorted(T[1:], t_axis, side="right")
    local = np.concatenate(([0], np.cumsum(traj.letters[1:] == PLUS)))
    return counting, local


def letter_margin_markov(spec: ModelSpec) -> np.ndarray | None:
    """Transition matrix of the letter margin, or None when it is not Markov.

    The letter process alone is Markov exactly when every switch sequence is
    run-length independent.
    """
    if not all(seq.is_constant for seq in spec.alphas):
        return None
    K = spec.K
    Q = np.empty((K, K), dtype=float)
    for i in range(K):
        a = spec.alphas[i].value_at(1)
        for j in range(K):
            Q[i, j] = 1.0 - a if i == j else a * spec.jump_matrix[i][j]
    return Q


@dataclass(frozen=True)
class MemoryMarginRule:
    """Birth-and-reset transition rule of the memory margin."""

    alpha: AlphaSequence

    def probability(self, n: int, m: int) -> float:
        a = self.alpha.value_at(n)
        if m == n + 1:
            return 1.0 - a
        if m == 1:
            return a
        return 0.0

    def step(self, n: int, rng: np.random.Generator) -> int:
        return 1 if rng.random() < self.alpha.value_at(n) else n + 1


def memory_margin_markov(spec: ModelSpec) -> MemoryMarginRule | None:
    """Memory-margin rule, or None unless switch sequences are letter-free.

    Letter independence is decided structurally (identical sequence
    objects), which is the decidable criterion for the packaged families.
    """
    first = spec.alphas[0]
    if any(seq != first for seq in spec.alphas[1:]):
        return None
    return MemoryMarginRule(alpha=first)


@dataclass(frozen=True)
class GapPmf:
    """Truncated law of a time between consecutive jumps.

    ``probs[i - 1]`` is the probability of a gap of length ``i``; the support
    was cut at the smallest length with cumulative mass >= 1 - tol and the
    actual truncation point and residual are reported.
    """

    probs: np.ndarray
    truncated_at: int
    residual: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.truncated_at + 1)

    def mean(self) -> float:
        return float(self.support @ self.probs)


_GAP_BLOCK = 4096
_GAP_MAX_SUPPORT = 10**7


def jump_gap_pmf(
    spec: ModelSpec,
    start_letter: int,
    m0: int,
    gap_index: int,
    tol: float = 1e-12,
) -> GapPmf:
    """Law of the ``gap_index``-th inter-jump time of a two-letter chain.

    The first gap starts with memory ``m0``; later gaps alternate letters
    and start from memory 1.  Requires finite expected run lengths for both
    letters, which makes all gaps almost surely finite.
    """
    from .invariant import theta  # local import: invariant has no chain dependency

    if not spec.is_walk:
        raise DomainError("jump-gap laws are implemented for two-letter models")
    if not 0 <= start_letter < 2:
        raise DomainError(f"letter index {start_letter} outside 0..1")
    if m0 == INFINITE_MEMORY:
        raise DomainError("gap laws from an infinite initial memory are not defined")
    if not (isinstance(m0, (int, np.integer)) and m0 >= 1):
        raise DomainError(f"initial memory must be an integer >= 1, got {m0!r}")
    if gap_index < 1:
        raise DomainError(f"gap index must be >= 1, got {gap_index}")
    for letter in range(2):
        res = theta(spec, letter)
        if res.diverged:
            raise DomainError(
                f"expected run length of letter {letter} diverges; gaps may be infinite"
            )
    letter = start_letter if gap_index % 2 == 1 else 1 - start_letter
    m_start = m0 if gap_index == 1 else 1
    seq = spec.alphas[letter]

    chunks: list[np.ndarray] = []
    log_surv = 0.0  # log prod (1 - alpha) over the run so far
    cum = 0.0
    n_done = 0
    while cum < 1.0 - tol:
        if n_done >= _GAP_MAX_SUPPORT:
            raise DomainError(
                f"gap pmf support exceeded {_GAP_MAX_SUPPORT} before reaching mass 1 - tol"
            )
        ns = m_start + n_done + np.arange(_GAP_BLOCK)
        a = seq.values_at(ns)
        with np.errstate(divide="ignore"):
            logs = np.log1p(-a)
        surv = np.exp(log_surv + np.concatenate(([0.0], np.cumsum(logs[:-1]))))
        block = a * surv
        log_surv += float(np.sum(logs))
        chunks.append(block)
        cum += float(np.sum(block))
        n_done += _GAP_BLOCK
    probs = np.concatenate(chunks)
    cdf = np.cumsum(probs)
    cut = int(np.searchsorted(cdf, 1.0 - tol, side="left")) + 1
    return GapPmf(probs=probs[:cut], truncated_at=cut, residual=float(1.0 - cdf[cut - 1]))
