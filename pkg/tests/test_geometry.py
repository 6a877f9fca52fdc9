import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtmf.errors import RankDeficiencyError
from mtmf.expr import Const, Var, parse
from mtmf.geometry import distance, gram_matrix, gram_schmidt, inner_product, norm, project
from mtmf.indexset import IndexSet
from mtmf.quadrature import QuadratureSpec
from mtmf.taylor import from_coefficients, trivial_rep

UNIT = QuadratureSpec(((0, 1),))
SYM = QuadratureSpec(((-1, 1),))


def test_trivial_one():
    assert inner_product(trivial_rep("1", 1), trivial_rep("1", 1), UNIT) == pytest.approx(1.0, abs=1e-13)


def test_trivial_x():
    assert inner_product(trivial_rep("x1", 1), trivial_rep("x1", 1), UNIT) == pytest.approx(1 / 3, abs=1e-13)


def test_disjoint_index_sets():
    f1 = from_coefficients([Const(1)], Var(0), IndexSet.finite([0]))
    f2 = from_coefficients([Const(0), Const(1)], Var(0), IndexSet.finite([1]))
    assert inner_product(f1, f2, UNIT) == 0.0


def test_norms():
    assert norm(trivial_rep("1", 1), UNIT) == pytest.approx(1.0, abs=1e-13)
    assert norm(trivial_rep("0", 1), UNIT) == 0.0
    assert norm(trivial_rep("x1", 1), UNIT) == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_distance_between_constants():
    assert distance(trivial_rep("0", 1), trivial_rep("1", 1), UNIT) == pytest.approx(1.0, abs=1e-12)


def test_representation_dependence():
    # exp(x) as a series versus its trivial form: same function, different norms
    series = from_coefficients([Const(1)] * 30, Var(0), IndexSet.range(29))
    flat = trivial_rep("exp(x1)", 1)
    assert abs(series(0.5) - flat(0.5)) <= 1e-12
    assert abs(norm(series, UNIT) - norm(flat, UNIT)) > 1e-3


def test_gram_schmidt_legendre():
    fs = [trivial_rep(t, 1) for t in ("1", "x1", "x1^2")]
    es = gram_schmidt(fs, SYM)
    G = gram_matrix(es, SYM)
    assert np.max(np.abs(G - np.eye(3))) <= 1e-10
    # normalised Legendre: sqrt((2n+1)/2) P_n
    xs = np.linspace(-1, 1, 7)
    ref = [np.full_like(xs, math.sqrt(0.5)), math.sqrt(1.5) * xs, math.sqrt(2.5) * (3 * xs ** 2 - 1) / 2]
    for e, r in zip(es, ref):
        vals = e.evaluate_many(xs.reshape(-1, 1))[0]
        assert np.max(np.abs(np.abs(vals) - np.abs(r))) <= 1e-10
        assert np.max(np.abs(vals - np.sign(vals[-1] * r[-1]) * r)) <= 1e-10


def test_gram_schmidt_unit_input_unchanged():
    (e,) = gram_schmidt([trivial_rep("1", 1)], UNIT)
    assert abs(abs(e(0.3)) - 1.0) <= 1e-12


def test_gram_schmidt_duplicate():
    f = trivial_rep("x1", 1)
    with pytest.raises(RankDeficiencyError) as info:
        gram_schmidt([trivial_rep("1", 1), f, trivial_rep("x1", 1)], UNIT)
    assert info.value.index == 2


def test_project_in_span():
    basis = gram_schmidt([trivial_rep(t, 1) for t in ("1", "x1", "x1^2")], SYM)
    proj = project(trivial_rep("x1^2", 1), basis, SYM)
    assert proj.residual <= 1e-6


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_positivity(c0, c1, c2):
    f = from_coefficients([Const(c0), Const(c1), Const(c2)], parse("x1 + 0.5", 1), IndexSet.range(2))
    assert norm(f, UNIT) >= 0.0
    if max(abs(c0), abs(c1), abs(c2)) > 1e-3:
        assert norm(f, UNIT) > 0.0
