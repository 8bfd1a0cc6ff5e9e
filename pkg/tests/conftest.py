import pytest

from persistwalk.alphas import ConstantAlpha, PoissonLikeAlpha, TableAlpha
from persistwalk.model import ModelSpec, two_letter_spec
from persistwalk.rng import make_rng


def constant_model():
    return two_letter_spec(ConstantAlpha(0.5), ConstantAlpha(0.25))


def poisson_model():
    """Poisson-like switch rules with a table override at run length 1."""
    return two_letter_spec(
        TableAlpha(values=(0.2,), tail=PoissonLikeAlpha(0.8)),
        TableAlpha(values=(0.4,), tail=PoissonLikeAlpha(0.6)),
    )


def table_model():
    """Explicit ten-entry switch tables with last-value tails."""
    minus = (0.42, 0.13, 0.55, 0.31, 0.62, 0.21, 0.47, 0.36, 0.5, 0.29)
    plus = (0.18, 0.51, 0.24, 0.65, 0.33, 0.44, 0.27, 0.58, 0.39, 0.22)
    return two_letter_spec(
        TableAlpha(values=minus, hold_last=True),
        TableAlpha(values=plus, hold_last=True),
    )


def three_letter_model():
    return ModelSpec(
        alphas=(ConstantAlpha(0.3), PoissonLikeAlpha(0.5), ConstantAlpha(0.6)),
        jump_matrix=((0.0, 0.4, 0.6), (0.5, 0.0, 0.5), (0.25, 0.75, 0.0)),
    )


WALK_MODELS = {
    "constant": constant_model,
    "poisson": poisson_model,
    "table": table_model,
}


@pytest.fixture
def const_spec():
    return constant_model()


@pytest.fixture
def poisson_spec():
    return poisson_model()


@pytest.fixture
def table_spec():
    return table_model()


@pytest.fixture
def k3_spec():
    return three_letter_model()


@pytest.fixture
def rng():
    return make_rng(20240817)
