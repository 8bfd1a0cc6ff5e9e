import numpy as np
import pytest

from persistwalk import chain
from persistwalk.alphas import ConstantAlpha
from persistwalk.errors import DomainError
from persistwalk.exact import ExactLawEngine
from persistwalk.model import (
    INFINITE_MEMORY,
    MINUS,
    PLUS,
    ChainState,
    ModelSpec,
    two_letter_spec,
)
from persistwalk.rng import make_rng, split_rngs


def test_jump_matrix_validation():
    a = ConstantAlpha(0.5)
    with pytest.raises(DomainError):
        ModelSpec(alphas=(a, a), jump_matrix=((0.0, 0.9), (1.0, 0.0)))
    with pytest.raises(DomainError):
        ModelSpec(alphas=(a, a), jump_matrix=((0.1, 0.9), (1.0, 0.0)))
    with pytest.raises(DomainError):
        ModelSpec(
            alphas=(a, a, a),
            jump_matrix=((0.0, 1.0, 0.0), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)),
        )
    with pytest.raises(DomainError):
        ModelSpec(alphas=(a,), jump_matrix=((1.0,),))


def test_letters_default_and_mismatch():
    a = ConstantAlpha(0.5)
    spec = ModelSpec(
        alphas=(a, a, a),
        jump_matrix=((0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)),
    )
    assert spec.letters == ("a1", "a2", "a3")
    with pytest.raises(DomainError):
        two_letter_spec(a, a, letters=("only-one",))


def test_chain_state_memory_validation():
    ChainState(0, 1)
    ChainState(0, INFINITE_MEMORY)
    with pytest.raises(DomainError):
        ChainState(0, 0)
    with pytest.raises(DomainError):
        ChainState(0, 2.5)


def test_walk_semantics_only_for_two_letters():
    a = ConstantAlpha(0.5)
    spec3 = ModelSpec(
        alphas=(a, a, a),
        jump_matrix=((0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)),
    )
    traj = chain.simulate_path(spec3, ChainState(0, 1), 50, seed=4)
    assert set(np.unique(traj.letters)) <= {0, 1, 2}
    with pytest.raises(DomainError):
        traj.sums
    with pytest.raises(DomainError):
        ExactLawEngine(spec3, 5)


def test_three_letter_csv_has_empty_walk_column(tmp_path):
    a = ConstantAlpha(0.5)
    spec3 = ModelSpec(
        alphas=(a, a, a),
        jump_matrix=((0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)),
    )
    traj = chain.simulate_path(spec3, ChainState(2, 1), 5, seed=4)
    out = tmp_path / "k3.csv"
    traj.to_csv(out)
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert rows[0][1] == "a3"
    assert all(r[3] == "" for r in rows)


def test_split_rngs_are_deterministic_and_distinct():
    streams_a = split_rngs(99, 4)
    streams_b = split_rngs(99, 4)
    draws_a = [r.random(3).tolist() for r in streams_a]
    draws_b = [r.random(3).tolist() for r in streams_b]
    assert draws_a == draws_b
    flat = [tuple(d) for d in draws_a]
    assert len(set(flat)) == 4


def test_make_rng_reproducible():
    assert make_rng(5).random(4).tolist() == make_rng(5).random(4).tolist()
