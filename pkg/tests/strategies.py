"""Hypothesis strategies shared by the property tests."""
from __future__ import annotations

from hypothesis import strategies as st

from mtmf.expr import Add, Const, Func, Mul, Neg, Pow, Var
from mtmf.indexset import IndexSet


def smooth_exprs(arity: int = 2, max_leaves: int = 8):
    """Random smooth trees (no division, log or sqrt) over ``x1..x_arity``."""
    leaves = st.one_of(
        st.integers(0, arity - 1).map(Var),
        st.integers(-3, 3).map(Const),
        st.sampled_from([0.5, -1.25, 2.0]).map(Const),
    )

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda ab: Add(ab)),
            st.tuples(children, children).map(lambda ab: Mul(ab)),
            children.map(Neg),
            st.tuples(children, st.integers(2, 3)).map(lambda be: Pow(be[0], Const(be[1]))),
            st.tuples(st.sampled_from(["sin", "cos"]), children).map(lambda fa: Func(*fa)),
            children.map(lambda c: Func("exp", Mul((Const(0.5), Func("sin", c))))),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


naturals = st.integers(0, 12)
small_sets = st.frozensets(naturals, max_size=6)

index_sets = st.one_of(
    small_sets.map(IndexSet.finite),
    st.integers(-1, 10).map(IndexSet.range),
    st.just(IndexSet.all()),
    st.just(IndexSet.positive()),
    small_sets.map(IndexSet.cofinite),
)
