"""Comb context trees and their dictionary with the letter/memory chain.

A comb tree attaches a Bernoulli law to every context "run of n equal
letters broken by the other one" plus the infinite-run leaves.  Because
contexts only depend on the trailing run, a left-infinite word is summarised
by (last letter, run length), and the chain over words is in one-to-one
correspondence with the letter/memory chain: the switch probability after a
run of n zeros is the memory-n switch probability of letter 0, and so on.

The stationary measure of the double comb is evaluated on arbitrary finite
cylinders, covering the reducible trees (infinite leaves that never break)
as mixtures of point masses at the constant words and a regular part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .alphas import AlphaSequence
from .errors import DomainError, NoInvariantMeasureError
from .invariant import stationary_measure, survivals, theta_of_sequence
from .model import INFINITE_MEMORY, MINUS, PLUS, ModelSpec, two_letter_spec

__all__ = [
    "CombContext",
    "CombTree",
    "WordState",
    "prefix",
    "vlmc_step",
    "comb_from_model",
    "model_from_comb",
    "CombStationaryMeasure",
    "double_comb_stationary",
    "consistency_nu_pi",
]

#: Default saturation cap for run lengths (runs longer than this keep the
#: cap and set the saturated flag; only explicitly infinite states reach the
#: infinite leaves).
RUN_CAP = 2**31 - 1


@dataclass(frozen=True)
class CombContext:
    """A comb context: trailing-run letter and run length.

    ``run`` may be infinite (the infinite leaves) or None for the simple
    comb's bare "1" context, which absorbs every word ending in 1.
    """

    letter: int
    run: int | float | None

    @property
    def label(self) -> str:
        if self.run is None:
            return str(self.letter)
        if self.run == INFINITE_MEMORY:
            return f"{self.letter}^inf"
        return str(self.letter) * int(self.run) + str(1 - self.letter)


@dataclass(frozen=True)
class CombTree:
    """Probabilized simple or double infinite comb.

    ``switch_after_zeros.value_at(n)`` is the probability that a run of n
    zeros breaks (the context tree's q_{0^n 1}(1)); symmetrically for ones.
    The infinite leaves carry plain switch probabilities in the closed
    interval [0, 1]; a zero there marks a reducible tree.
    """

    kind: str
    switch_after_zeros: AlphaSequence
    switch_after_ones: AlphaSequence
    q0inf_switch: float
    q1inf_switch: float

    def __post_init__(self):
        if self.kind not in ("simple", "double"):
            raise DomainError(f"comb kind must be 'simple' or 'double', got {self.kind!r}")
        for name, q in (("q0inf_switch", self.q0inf_switch), ("q1inf_switch", self.q1inf_switch)):
            if not 0.0 <= q <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {q}")
        if self.kind == "simple" and not self.switch_after_ones.is_constant:
            raise DomainError("the simple comb needs a constant switch rule after ones")
        # the leaf values are authoritative; keep the embedded sequences in
        # step with them so dictionary round trips are exact on parameters
        if 0.0 < self.q0inf_switch < 1.0 and self.switch_after_zeros.alpha_inf != self.q0inf_switch:
            object.__setattr__(
                self, "switch_after_zeros", replace(self.switch_after_zeros, alpha_inf=self.q0inf_switch)
            )
        if 0.0 < self.q1inf_switch < 1.0 and self.switch_after_ones.alpha_inf != self.q1inf_switch:
            object.__setattr__(
                self, "switch_after_ones", replace(self.switch_after_ones, alpha_inf=self.q1inf_switch)
            )

    @property
    def reducible_zero(self) -> bool:
        return self.q0inf_switch == 0.0

    @property
    def reducible_one(self) -> bool:
        return self.q1inf_switch == 0.0

    def switch_probability(self, ctx: CombContext) -> float:
        """Probability that the next letter differs from the trailing run."""
        if ctx.run is None:
            return self.switch_after_ones.value_at(1)
        if ctx.run == INFINITE_MEMORY:
            return self.q0inf_switch if ctx.letter == 0 else self.q1inf_switch
        seq = self.switch_after_zeros if ctx.letter == 0 else self.switch_after_ones
        return seq.value_at(ctx.run)

    def next_letter_probs(self, ctx: CombContext) -> tuple[float, float]:
        """(q(0), q(1)) of the context."""
        a = self.switch_probability(ctx)
        stay_letter = 1 if ctx.run is None else ctx.letter
        if stay_letter == 0:
            return 1.0 - a, a
        return a, 1.0 - a


@dataclass(frozen=True)
class WordState:
    """Sufficient statistic of a left-infinite word: trailing run only.

    An optional bounded history (most recent letter last) can be retained
    for audit; it never feeds the dynamics.
    """

    letter: int
    run: int | float
    saturated: bool = False
    history: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.letter not in (0, 1):
            raise DomainError(f"letter must be 0 or 1, got {self.letter}")
        ok = self.run == INFINITE_MEMORY or (isinstance(self.run, (int, np.integer)) and self.run >= 1)
        if not ok:
            raise DomainError(f"run must be an integer >= 1 or infinite, got {self.run!r}")


def prefix(tree: CombTree, state: WordState) -> CombContext:
    """Context selected by a word: its trailing run, comb-shape aware.

    On the simple comb every word ending in 1 maps to the bare "1" context;
    otherwise the context is the trailing run and the letter that broke it.
    """
    if tree.kind == "simple" and state.letter == 1:
        return CombContext(1, None)
    return CombContext(state.letter, state.run)


def vlmc_step(
    tree: CombTree,
    state: WordState,
    rng: np.random.Generator,
    history_cap: int = 64,
) -> WordState:
    """Append one letter according to the context's Bernoulli law."""
    a = tree.switch_probability(prefix(tree, state))
    switch = rng.random() < a
    letter = (1 - state.letter) if switch else state.letter
    if switch:
        run, saturated = 1, False
    elif state.run == INFINITE_MEMORY:
        run, saturated = INFINITE_MEMORY, state.saturated
    elif state.run >= RUN_CAP:
        run, saturated = RUN_CAP, True
    else:
        run, saturated = state.run + 1, state.saturated
    history = None
    if state.history is not None:
        history = (state.history + (letter,))[-history_cap:]
    return WordState(letter=letter, run=run, saturated=saturated, history=history)


def comb_from_model(spec: ModelSpec, kind: str = "double") -> CombTree:
    """Comb tree of a two-letter model (identity on parameters).

    Letter 0 plays the word letter "0".  The simple comb additionally
    requires a constant switch rule for letter 1.
    """
    if not spec.is_walk:
        raise DomainError("the comb dictionary requires a two-letter model")
    return CombTree(
        kind=kind,
        switch_after_zeros=spec.alphas[MINUS],
        switch_after_ones=spec.alphas[PLUS],
        q0inf_switch=spec.alphas[MINUS].alpha_inf,
        q1inf_switch=spec.alphas[PLUS].alpha_inf,
    )


def model_from_comb(tree: CombTree) -> ModelSpec:
    """Two-letter model of a comb tree (identity on parameters).

    Reducible trees have no chain counterpart: the chain's infinite-run
    switch probabilities live in the open interval.
    """
    if tree.reducible_zero or tree.reducible_one or tree.q0inf_switch == 1.0 or tree.q1inf_switch == 1.0:
        raise DomainError("reducible combs (boundary infinite-leaf values) have no chain model")
    zeros = tree.switch_after_zeros
    if zeros.alpha_inf != tree.q0inf_switch:
        zeros = replace(zeros, alpha_inf=tree.q0inf_switch)
    ones = tree.switch_after_ones
    if ones.alpha_inf != tree.q1inf_switch:
        ones = replace(ones, alpha_inf=tree.q1inf_switch)
    return two_letter_spec(zeros, ones)


def _blocks(word) -> list[tuple[int, int]]:
    """Split a 0/1 word (oldest letter first) into (letter, run) blocks."""
    if isinstance(word, str):
        if any(c not in "01" for c in word):
            raise DomainError(f"word must consist of 0s and 1s, got {word!r}")
        seq = [int(c) for c in word]
    else:
        seq = [int(x) for x in word]
        if any(x not in (0, 1) for x in seq):
            raise DomainError("word must consist of 0s and 1s")
    blocks: list[tuple[int, int]] = []
    for x in seq:
        if blocks and blocks[-1][0] == x:
            blocks[-1] = (x, blocks[-1][1] + 1)
        else:
            blocks.append((x, 1))
    return blocks


@dataclass(frozen=True)
class CombStationaryMeasure:
    """Evaluator of a stationary cylinder measure of the double comb.

    ``pi(w)`` is the stationary mass of all left-infinite words ending with
    the finite word ``w`` (written oldest letter first).  The measure is the
    mixture ``mass0 * delta_{0^inf} + mass1 * delta_{1^inf} + regular part``
    where the regular part is proportional to the run survivals and carries
    weight ``pi10`` on the cylinder "10".
    """

    tree: CombTree
    branch: str
    theta_zero: float
    theta_one: float
    mass_zero_inf: float
    mass_one_inf: float
    pi10: float

    def _survival(self, letter: int, n: int) -> float:
        seq = self.tree.switch_after_zeros if letter == 0 else self.tree.switch_after_ones
        if n == 1:
            return 1.0
        return float(survivals(seq, n)[-1])

    def _run_tail(self, letter: int, n: int) -> float:
        """sum_{m >= n} P_letter(m) = Theta_letter - partial sum."""
        th = self.theta_zero if letter == 0 else self.theta_one
        seq = self.tree.switch_after_zeros if letter == 0 else self.tree.switch_after_ones
        head = float(np.sum(survivals(seq, n - 1))) if n > 1 else 0.0
        return max(0.0, th - head)

    def pi(self, word) -> float:
        """Stationary mass of the cylinder of words ending with ``word``."""
        blocks = _blocks(word)
        if not blocks:
            return 1.0
        if len(blocks) == 1:
            letter, n = blocks[0]
            point = self.mass_zero_inf if letter == 0 else self.mass_one_inf
            if self.pi10 == 0.0:
                return point
            return point + self.pi10 * self._run_tail(letter, n)
        if self.pi10 == 0.0:
            return 0.0
        first_letter, first_run = blocks[0]
        last_letter, last_run = blocks[-1]
        out = self.pi10 * self._survival(first_letter, first_run) * self._survival(last_letter, last_run)
        for letter, n in blocks[1:-1]:
            seq = self.tree.switch_after_zeros if letter == 0 else self.tree.switch_after_ones
            out *= self._survival(letter, n) * seq.value_at(n)
        return out

    def partition_gap(self) -> float:
        """Defect of the leaf-cylinder partition identity.

        In every branch, ``1 - pi(0^inf) - pi(1^inf)`` must equal
        ``pi10 * (Theta_0 + Theta_1)`` (both sides vanish when the regular
        part is absent).
        """
        lhs = 1.0 - self.mass_zero_inf - self.mass_one_inf
        if self.pi10 == 0.0:
            return abs(lhs)
        return abs(lhs - self.pi10 * (self.theta_zero + self.theta_one))


def double_comb_stationary(
    tree: CombTree,
    a: float | None = None,
    b: float | None = None,
) -> CombStationaryMeasure:
    """Stationary measure(s) of a double comb, all reducibility branches.

    ``a`` and ``b`` select the masses at the constant words ``0^inf`` and
    ``1^inf`` whenever the corresponding infinite leaf is absorbing; they
    are rejected when the branch determines those masses.
    """
    if tree.kind != "double":
        raise DomainError("stationary cylinder measures are defined for the double comb")
    t0 = theta_of_sequence(tree.switch_after_zeros)
    t1 = theta_of_sequence(tree.switch_after_ones)
    finite = not (t0.diverged or t1.diverged)
    red0, red1 = tree.reducible_zero, tree.reducible_one

    def check_unit(name: str, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"parameter {name} must lie in [0, 1], got {value}")
        return float(value)

    def reject(name: str, value) -> None:
        if value is not None:
            raise DomainError(f"parameter {name} is not free in this branch")

    if not red0 and not red1:
        reject("a", a)
        reject("b", b)
        if not finite:
            raise NoInvariantMeasureError(
                "irreducible double comb: some expected run length diverges, "
                "no stationary probability exists"
            )
        return CombStationaryMeasure(
            tree=tree, branch="irreducible", theta_zero=t0.value, theta_one=t1.value,
            mass_zero_inf=0.0, mass_one_inf=0.0, pi10=1.0 / (t0.value + t1.value),
        )
    if red0 and not red1:
        reject("b", b)
        if not finite:
            reject("a", a)
            return CombStationaryMeasure(
                tree=tree, branch="reducible:trivial-0", theta_zero=math.inf,
                theta_one=math.inf, mass_zero_inf=1.0, mass_one_inf=0.0, pi10=0.0,
            )
        if a is None:
            raise DomainError("this branch is a one-parameter family: give a = pi(0^inf)")
        a = check_unit("a", a)
        return CombStationaryMeasure(
            tree=tree, branch="reducible:family-0", theta_zero=t0.value, theta_one=t1.value,
            mass_zero_inf=a, mass_one_inf=0.0, pi10=(1.0 - a) / (t0.value + t1.value),
        )
    if red1 and not red0:
        reject("a", a)
        if not finite:
            reject("b", b)
            return CombStationaryMeasure(
                tree=tree, branch="reducible:trivial-1", theta_zero=math.inf,
                theta_one=math.inf, mass_zero_inf=0.0, mass_one_inf=1.0, pi10=0.0,
            )
        if b is None:
            raise DomainError("this branch is a one-parameter family: give b = pi(1^inf)")
        b = check_unit("b", b)
        return CombStationaryMeasure(
            tree=tree, branch="reducible:family-1", theta_zero=t0.value, theta_one=t1.value,
            mass_zero_inf=0.0, mass_one_inf=b, pi10=(1.0 - b) / (t0.value + t1.value),
        )
    # both infinite leaves absorbing
    if not finite:
        reject("b", b)
        if a is None:
            raise DomainError("this branch is a one-parameter family: give a = pi(0^inf)")
        a = check_unit("a", a)
        return CombStationaryMeasure(
            tree=tree, branch="reducible:constant-words", theta_zero=math.inf,
            theta_one=math.inf, mass_zero_inf=a, mass_one_inf=1.0 - a, pi10=0.0,
        )
    if a is None or b is None:
        raise DomainError("this branch is a two-parameter family: give a and b")
    a, b = check_unit("a", a), check_unit("b", b)
    if a + b > 1.0:
        raise DomainError(f"need a + b <= 1 (the '10' cylinder would get mass {1 - a - b})")
    return CombStationaryMeasure(
        tree=tree, branch="reducible:two-parameter", theta_zero=t0.value, theta_one=t1.value,
        mass_zero_inf=a, mass_one_inf=b, pi10=(1.0 - a - b) / (t0.value + t1.value),
    )


@dataclass(frozen=True)
class ConsistencyEntry:
    comb_kind: str
    nu_value: float
    pi_value: float

    @property
    def gap(self) -> float:
        return abs(self.nu_value - self.pi_value)


def consistency_nu_pi(spec: ModelSpec) -> list[ConsistencyEntry]:
    """Cross-check the chain and word-measure pipelines.

    Compares the stationary letter-1 mass computed from the tabulated
    invariant measure of the chain against the comb stationary measure:
    ``Theta_1 / (Theta_0 + Theta_1)`` for the double comb and, when the
    ones-rule is constant, ``1 / (1 + alpha * Theta_0)`` for the simple one.
    """
    if not spec.is_walk:
        raise DomainError("the comb dictionary requires a two-letter model")
    measure = stationary_measure(spec)
    nu_plus = float(measure.nu_x()[PLUS])
    entries = []
    tree = comb_from_model(spec, "double")
    pi_measure = double_comb_stationary(tree)
    pi_plus = pi_measure.theta_one / (pi_measure.theta_zero + pi_measure.theta_one)
    entries.append(ConsistencyEntry("double", nu_plus, pi_plus))
    if spec.alphas[PLUS].is_constant:
        simple = comb_from_model(spec, "simple")
        t0 = theta_of_sequence(simple.switch_after_zeros).require_finite()
        alpha = simple.switch_after_ones.value_at(1)
        entries.append(ConsistencyEntry("simple", nu_plus, 1.0 / (1.0 + alpha * t0)))
    return entries
