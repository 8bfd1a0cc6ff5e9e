"""Model parameterisation of the letter/memory chain.

A model is a finite alphabet ``a_1..a_K`` (0-based indices in code), one
switch-probability sequence per letter, and a row-stochastic jump matrix
with zero diagonal giving the conditional law of the next letter at a
switch.  For two-letter walk semantics, letter 0 is the ``-1`` increment and
letter 1 is ``+1``; the jump matrix is then forced to the antidiagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alphas import AlphaSequence
from .errors import DomainError

__all__ = ["INFINITE_MEMORY", "ChainState", "ModelSpec", "two_letter_spec", "MINUS", "PLUS"]

#: Distinguished memory value for an infinite run (not a finite sentinel).
INFINITE_MEMORY = math.inf

#: Letter indices carrying the -1 / +1 walk semantics when K = 2.
MINUS, PLUS = 0, 1

_ROW_SUM_TOL = 1e-12


def _valid_memory(m) -> bool:
    if m == INFINITE_MEMORY:
        return True
    return isinstance(m, (int, np.integer)) and m >= 1


@dataclass(frozen=True)
class ChainState:
    """A (letter index, run-length memory) pair; memory may be infinite."""

    letter: int
    memory: int | float

    def __post_init__(self):
        if not _valid_memory(self.memory):
            raise DomainError(f"memory must be an integer >= 1 or infinite, got {self.memory!r}")

    @property
    def memory_is_infinite(self) -> bool:
        return self.memory == INFINITE_MEMORY


@dataclass(frozen=True)
class ModelSpec:
    """Alphabet, per-letter switch sequences and jump matrix."""

    alphas: tuple[AlphaSequence, ...]
    jump_matrix: tuple[tuple[float, ...], ...]
    letters: tuple[str, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        K = len(self.alphas)
        if K < 2:
            raise DomainError(f"need at least two letters, got {K}")
        P = tuple(tuple(float(x) for x in row) for row in self.jump_matrix)
        object.__setattr__(self, "jump_matrix", P)
        if len(P) != K or any(len(row) != K for row in P):
            raise DomainError(f"jump matrix must be {K}x{K}")
        for i, row in enumerate(P):
            if abs(sum(row) - 1.0) > _ROW_SUM_TOL:
                raise DomainError(f"jump matrix row {i} sums to {sum(row)!r}, expected 1")
            if row[i] != 0.0:
                raise DomainError(f"jump matrix diagonal entry ({i},{i}) must be exactly 0")
            for j, p in enumerate(row):
                if j != i and not p > 0.0:
                    raise DomainError(f"jump matrix entry ({i},{j}) must be > 0, got {p}")
        if self.letters is None:
            object.__setattr__(self, "letters", tuple(f"a{i+1}" for i in range(K)))
        else:
            object.__setattr__(self, "letters", tuple(str(s) for s in self.letters))
            if len(self.letters) != K:
                raise DomainError("letters must have one label per alphabet entry")

    @property
    def K(self) -> int:
        return len(self.alphas)

    @property
    def is_walk(self) -> bool:
        """Whether the model carries +-1 walk semantics (two letters)."""
        return self.K == 2

    def jump_array(self) -> np.ndarray:
        return np.array(self.jump_matrix, dtype=float)

    def walk_value(self, letter: int) -> int:
        """+-1 increment attached to a letter (two-letter models only)."""
        if not self.is_walk:
            raise DomainError("walk increments are only defined for two-letter models")
        return -1 if letter == MINUS else 1

    def check_state(self, state: ChainState) -> None:
        if not 0 <= state.letter < self.K:
            raise DomainError(f"letter index {state.letter} outside 0..{self.K - 1}")


def two_letter_spec(
    alpha_minus: AlphaSequence,
    alpha_plus: AlphaSequence,
    letters: tuple[str, str] = ("-1", "+1"),
) -> ModelSpec:
    """Standard walk model: two letters, forced antidiagonal jump matrix."""
    return ModelSpec(
        alphas=(alpha_minus, alpha_plus),
        jump_matrix=((0.0, 1.0), (1.0, 0.0)),
        letters=letters,
    )
