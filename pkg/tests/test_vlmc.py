import math

import numpy as np
import pytest

from persistwalk import chain, invariant, vlmc
from persistwalk.alphas import ConstantAlpha, CustomAlpha, PoissonLikeAlpha, TableAlpha
from persistwalk.errors import DomainError, NoInvariantMeasureError
from persistwalk.model import INFINITE_MEMORY, MINUS, PLUS, ChainState, two_letter_spec
from persistwalk.rng import make_rng


def double_tree(q0switch=0.5, q1switch=0.5):
    return vlmc.CombTree(
        kind="double",
        switch_after_zeros=PoissonLikeAlpha(0.8),
        switch_after_ones=ConstantAlpha(0.25),
        q0inf_switch=q0switch,
        q1inf_switch=q1switch,
    )


# ---------------------------------------------------------------- prefix
def test_prefix_trailing_zero_run():
    tree = double_tree()
    ctx = vlmc.prefix(tree, vlmc.WordState(letter=0, run=3))
    assert ctx.label == "0001"


def test_prefix_simple_comb_collapses_ones():
    spec = two_letter_spec(PoissonLikeAlpha(0.8), ConstantAlpha(0.25))
    tree = vlmc.comb_from_model(spec, "simple")
    for run in (1, 4, 77):
        assert vlmc.prefix(tree, vlmc.WordState(letter=1, run=run)).label == "1"
    assert vlmc.prefix(tree, vlmc.WordState(letter=0, run=2)).label == "001"


def test_prefix_matches_suffix_scan():
    tree = double_tree()
    rng = make_rng(3)
    for _ in range(30):
        length = int(rng.integers(2, 60))
        word = rng.integers(0, 2, size=length)
        run = 1
        while run < length and word[-run - 1] == word[-1]:
            run += 1
        ctx = vlmc.prefix(tree, vlmc.WordState(letter=int(word[-1]), run=run))
        assert ctx.label == str(word[-1]) * run + str(1 - word[-1])


def test_prefix_infinite_runs():
    tree = double_tree()
    assert vlmc.prefix(tree, vlmc.WordState(letter=0, run=INFINITE_MEMORY)).label == "0^inf"


# ---------------------------------------------------------------- stepping
def test_vlmc_step_run_update(rng):
    tree = double_tree()
    state = vlmc.WordState(letter=1, run=2, history=(1, 1))
    for _ in range(50):
        nxt = vlmc.vlmc_step(tree, state, rng)
        if nxt.letter == 1:
            assert nxt.run == 3
        else:
            assert nxt.run == 1
        assert nxt.history[-1] == nxt.letter


def test_vlmc_step_saturation(rng):
    tree = double_tree()
    state = vlmc.WordState(letter=1, run=vlmc.RUN_CAP)
    for _ in range(20):
        nxt = vlmc.vlmc_step(tree, state, rng)
        if nxt.letter == 1:
            assert nxt.run == vlmc.RUN_CAP and nxt.saturated
            break


def test_vlmc_switch_rate_from_ones(rng):
    spec = two_letter_spec(PoissonLikeAlpha(0.8), ConstantAlpha(0.25))
    tree = vlmc.comb_from_model(spec, "simple")
    draws = 200_000
    state = vlmc.WordState(letter=1, run=6)
    switches = sum(vlmc.vlmc_step(tree, state, rng).letter == 0 for _ in range(draws))
    sigma = math.sqrt(0.25 * 0.75 / draws)
    assert abs(switches / draws - 0.25) < 3 * sigma


def test_vlmc_windows_match_chain_windows():
    # letter windows generated by the word chain and by the letter/memory
    # chain from matched starts must share their law; total variation over
    # all windows is compared against a 3-sigma-style budget sqrt(C/(2N))
    spec = two_letter_spec(PoissonLikeAlpha(0.8), ConstantAlpha(0.25))
    tree = vlmc.comb_from_model(spec, "double")
    width, n_samples = 6, 60_000
    rng1, rng2 = make_rng(21), make_rng(22)
    counts_w = {}
    counts_c = {}
    for _ in range(n_samples):
        ws = vlmc.WordState(letter=1, run=1)
        window = []
        for _ in range(width):
            ws = vlmc.vlmc_step(tree, ws, rng1)
            window.append(ws.letter)
        key = tuple(window)
        counts_w[key] = counts_w.get(key, 0) + 1
        st = ChainState(PLUS, 1)
        window = []
        for _ in range(width):
            st = chain.kernel_step(spec, st, rng2)
            window.append(st.letter)
        key = tuple(window)
        counts_c[key] = counts_c.get(key, 0) + 1
    keys = set(counts_w) | set(counts_c)
    tv = 0.5 * sum(
        abs(counts_w.get(k, 0) - counts_c.get(k, 0)) / n_samples for k in keys
    )
    assert tv < 3.0 * math.sqrt(2**width / (2.0 * n_samples))


# ---------------------------------------------------------------- dictionary
def test_round_trip_model_comb_model(poisson_spec):
    tree = vlmc.comb_from_model(poisson_spec, "double")
    assert vlmc.model_from_comb(tree) == poisson_spec


def test_round_trip_comb_model_comb():
    tree = double_tree(q0switch=0.3, q1switch=0.7)
    spec = vlmc.model_from_comb(tree)
    assert vlmc.comb_from_model(spec, "double") == tree


def test_dictionary_values():
    spec = two_letter_spec(PoissonLikeAlpha(0.8), ConstantAlpha(0.25))
    double = vlmc.comb_from_model(spec, "double")
    # breaking a run of three zeros has the letter-0 memory-3 probability
    ctx = vlmc.CombContext(letter=0, run=3)
    assert double.switch_probability(ctx) == pytest.approx(1 - 0.8 / 3)
    simple = vlmc.comb_from_model(spec, "simple")
    assert simple.switch_probability(vlmc.CombContext(letter=1, run=None)) == 0.25


def test_simple_comb_requires_constant_ones_rule(poisson_spec):
    with pytest.raises(DomainError):
        vlmc.comb_from_model(poisson_spec, "simple")


def test_model_from_reducible_comb_rejected():
    with pytest.raises(DomainError):
        vlmc.model_from_comb(double_tree(q0switch=0.0))


# ---------------------------------------------------------------- stationary measures
def test_irreducible_measure_symmetric_half():
    tree = vlmc.CombTree(
        kind="double",
        switch_after_zeros=ConstantAlpha(0.3),
        switch_after_ones=ConstantAlpha(0.3),
        q0inf_switch=0.5,
        q1inf_switch=0.5,
    )
    pi = vlmc.double_comb_stationary(tree)
    assert pi.pi("0") == pytest.approx(0.5, abs=1e-12)
    assert pi.branch == "irreducible"


def test_irreducible_requires_finite_theta():
    tree = vlmc.CombTree(
        kind="double",
        switch_after_zeros=CustomAlpha(fn=lambda n: 1.0 / (n + 1)),
        switch_after_ones=ConstantAlpha(0.3),
        q0inf_switch=0.5,
        q1inf_switch=0.5,
    )
    with pytest.raises(NoInvariantMeasureError):
        vlmc.double_comb_stationary(tree)


def test_irreducible_cylinder_identities(poisson_spec):
    tree = vlmc.comb_from_model(poisson_spec, "double")
    pi = vlmc.double_comb_stationary(tree)
    t0, t1 = pi.theta_zero, pi.theta_one
    assert pi.pi("0") == pytest.approx(t0 / (t0 + t1), abs=1e-12)
    assert pi.pi("10") == pytest.approx(1.0 / (t0 + t1), abs=1e-12)
    assert pi.pi("10") == pytest.approx(pi.pi("01"), abs=1e-15)
    # run cylinders carry the survivals
    from persistwalk.invariant import survivals

    P1 = survivals(tree.switch_after_zeros, 8)
    for n in range(1, 9):
        assert pi.pi("1" + "0" * n) == pytest.approx(pi.pi("10") * P1[n - 1], rel=1e-12)
    # disjoint-union identity on internal nodes
    for n in range(1, 8):
        lhs = pi.pi("0" * n)
        rhs = pi.pi("0" * (n + 1)) + pi.pi("1" + "0" * n)
        assert lhs == pytest.approx(rhs, abs=1e-13)
    assert pi.pi("") == 1.0
    assert pi.partition_gap() < 1e-12


def test_general_cylinder_block_product(poisson_spec):
    tree = vlmc.comb_from_model(poisson_spec, "double")
    pi = vlmc.double_comb_stationary(tree)
    from persistwalk.invariant import survivals

    P1 = survivals(tree.switch_after_zeros, 4)
    P2 = survivals(tree.switch_after_ones, 4)
    a1 = tree.switch_after_zeros
    a2 = tree.switch_after_ones
    # word 100110: blocks 1 | 00 | 11 | 0
    expected = (
        pi.pi10 * P2[0] * (P1[1] * a1.value_at(2)) * (P2[1] * a2.value_at(2)) * P1[0]
    )
    assert pi.pi("100110") == pytest.approx(expected, rel=1e-13)


def _stationary_window_probability(spec, measure, word):
    """P(next len(word) letters spell word) under the invariant chain law.

    Independent route: evolve the truncated invariant table through the
    kernel, keeping only the transitions that emit the word.
    """
    width = measure.truncation + len(word) + 1
    dist = np.zeros((2, width))
    dist[:, : measure.truncation] = measure.nu_table
    for ch in word:
        c = int(ch)
        o = 1 - c
        alpha_c = spec.alphas[c].values_upto(width - 1)
        alpha_o = spec.alphas[o].values_upto(width)
        new = np.zeros_like(dist)
        new[c, 1:] = dist[c, :-1] * (1.0 - alpha_c)
        new[c, 0] = float(np.sum(dist[o] * alpha_o[:width]))  # antidiagonal jumps
        dist = new
    return float(dist.sum())


def test_pi_matches_stationary_chain_windows(poisson_spec):
    from persistwalk.invariant import stationary_measure

    tree = vlmc.comb_from_model(poisson_spec, "double")
    pi = vlmc.double_comb_stationary(tree)
    measure = stationary_measure(poisson_spec)
    for word in ("0", "1", "10", "0001", "0110", "100110", "11", "010"):
        chain_value = _stationary_window_probability(poisson_spec, measure, word)
        assert pi.pi(word) == pytest.approx(chain_value, abs=1e-11)


def test_reducible_trivial_branch():
    tree = vlmc.CombTree(
        kind="double",
        switch_after_zeros=CustomAlpha(fn=lambda n: 1.0 / (n + 1)),
        switch_after_ones=ConstantAlpha(0.3),
        q0inf_switch=0.0,
        q1inf_switch=0.5,
    )
    pi = vlmc.double_comb_stationary(tree)
    assert pi.branch == "reducible:trivial-0"
    assert pi.mass_zero_inf == 1.0
    assert pi.pi("0" * 5) == 1.0
    assert pi.pi("10") == 0.0
    assert pi.partition_gap() == 0.0


def test_reducible_one_parameter_family():
    tree = double_tree(q0switch=0.0)
    pi = vlmc.double_comb_stationary(tree, a=0.3)
    t0, t1 = pi.theta_zero, pi.theta_one
    assert pi.pi("0") == pytest.approx((0.3 * t1 + t0) / (t0 + t1), rel=1e-12)
    assert pi.pi10 == pytest.approx(0.7 / (t0 + t1), rel=1e-12)
    assert pi.partition_gap() < 1e-12
    with pytest.raises(DomainError):
        vlmc.double_comb_stationary(tree)  # parameter required
    with pytest.raises(DomainError):
        vlmc.double_comb_stationary(tree, a=1.4)


def test_reducible_mirror_family():
    tree = double_tree(q1switch=0.0)
    pi = vlmc.double_comb_stationary(tree, b=0.25)
    assert pi.branch == "reducible:family-1"
    assert pi.mass_one_inf == 0.25
    assert pi.partition_gap() < 1e-12


def test_reducible_constant_words_branch():
    tree = vlmc.CombTree(
        kind="double",
        switch_after_zeros=CustomAlpha(fn=lambda n: 1.0 / (n + 1)),
        switch_after_ones=CustomAlpha(fn=lambda n: 1.0 / (n + 1)),
        q0inf_switch=0.0,
        q1inf_switch=0.0,
    )
    pi = vlmc.double_comb_stationary(tree, a=0.6)
    assert pi.branch == "reducible:constant-words"
    for n in (1, 3, 10):
        assert pi.pi("0" * n) == 0.6
        assert pi.pi("1" * n) == pytest.approx(0.4)
    assert pi.pi("01") == 0.0
    assert pi.partition_gap() == 0.0


def test_reducible_two_parameter_family():
    tree = double_tree(q0switch=0.0, q1switch=0.0)
    pi = vlmc.double_comb_stationary(tree, a=0.2, b=0.3)
    t0, t1 = pi.theta_zero, pi.theta_one
    assert pi.pi("0") == pytest.approx((0.2 * t1 + 0.7 * t0) / (t0 + t1), rel=1e-12)
    assert pi.pi10 == pytest.approx(0.5 / (t0 + t1), rel=1e-12)
    assert pi.partition_gap() < 1e-12
    with pytest.raises(DomainError):
        vlmc.double_comb_stationary(tree, a=0.7, b=0.5)
    # boundary a + b = 1 concentrates on the two constant words
    edge = vlmc.double_comb_stationary(tree, a=0.6, b=0.4)
    assert edge.pi10 == 0.0
    assert edge.pi("10") == 0.0


def test_branch_selector_is_total():
    finite = ConstantAlpha(0.3)
    divergent = CustomAlpha(fn=lambda n: 1.0 / (n + 1))
    for q0 in (0.0, 0.5):
        for q1 in (0.0, 0.5):
            for zeros in (finite, divergent):
                tree = vlmc.CombTree(
                    kind="double",
                    switch_after_zeros=zeros,
                    switch_after_ones=finite,
                    q0inf_switch=q0,
                    q1inf_switch=q1,
                )
                kwargs = {}
                if q0 == 0.0 and zeros is finite:
                    kwargs["a"] = 0.5
                if q1 == 0.0 and zeros is finite:
                    kwargs["b"] = 0.25 if q0 == 0.0 else 0.5
                if q0 == 0.0 and q1 == 0.0 and zeros is divergent:
                    kwargs["a"] = 0.5
                try:
                    pi = vlmc.double_comb_stationary(tree, **kwargs)
                    assert pi.branch
                except NoInvariantMeasureError:
                    assert (q0, q1) == (0.5, 0.5) and zeros is divergent


# ---------------------------------------------------------------- consistency
def test_consistency_simple_comb_half():
    spec = two_letter_spec(ConstantAlpha(0.5), ConstantAlpha(0.5))
    entries = vlmc.consistency_nu_pi(spec)
    for e in entries:
        assert e.nu_value == pytest.approx(0.5, abs=1e-12)
        assert e.pi_value == pytest.approx(0.5, abs=1e-12)


def test_consistency_simple_comb_closed_form():
    spec = two_letter_spec(PoissonLikeAlpha(0.8), ConstantAlpha(0.25))
    entries = {e.comb_kind: e for e in vlmc.consistency_nu_pi(spec)}
    expected = 1.0 / (1.0 + 0.25 * math.exp(0.8))
    assert entries["simple"].pi_value == pytest.approx(expected, abs=1e-12)
    assert entries["simple"].gap < 1e-10


def test_consistency_double_poisson(poisson_spec):
    entries = {e.comb_kind: e for e in vlmc.consistency_nu_pi(poisson_spec)}
    assert entries["double"].gap < 1e-10
