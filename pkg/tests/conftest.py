import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qgends.graphspec import (ChainWithAttachments, FiniteGraph, FullLinePath,
                              HalfLinePath, RadialTree)
from qgends.sequences import Constant, Geometric


def geometric(a, num, den=1):
    return Geometric(F(a), F(num, den))


@pytest.fixture
def binary_tree_finite_volume():
    """b = 2, ell = 4^-n: volume 4, length 4/3."""
    return RadialTree(b=Constant(F(2)), ell=geometric(1, 1, 4), name="binary-quarter")


@pytest.fixture
def binary_tree_infinite_volume():
    """b = 2, ell = 2^-n: volume diverges, length 2."""
    return RadialTree(b=Constant(F(2)), ell=geometric(1, 1, 2), name="binary-half")


@pytest.fixture
def half_line_summable():
    return HalfLinePath(ell=geometric(1, 1, 2), name="half-summable")


@pytest.fixture
def half_line_unit():
    return HalfLinePath(ell=Constant(F(1)), name="half-unit")


@pytest.fixture
def full_line_both_summable():
    return FullLinePath(ell_pos=geometric(1, 1, 2), ell_neg=geometric(1, 1, 3),
                        name="line-both")


@pytest.fixture
def full_line_one_summable():
    return FullLinePath(ell_pos=geometric(1, 1, 2), ell_neg=Constant(F(1)),
                        name="line-one")


@pytest.fixture
def figure_one_chain():
    """Unit chain with shrinking two-ended attachments."""
    attachment = FullLinePath(ell_pos=geometric(1, 1, 2), ell_neg=geometric(1, 1, 2))
    return ChainWithAttachments(ell=Constant(F(1)), attachment=attachment,
                                scaling=geometric(1, 1, 2), name="figure-one")


@pytest.fixture
def three_star():
    return FiniteGraph(edges=(("c", "l1", F(1)), ("c", "l2", F(1)),
                              ("c", "l3", F(1))), root="c")
