import pytest
from hypothesis import given

from mtmf.indexset import IndexSet

from strategies import index_sets


def test_contains_examples():
    assert not IndexSet.positive().contains(0)
    assert IndexSet.range(3).contains(3)
    assert not IndexSet.cofinite([2]).contains(2)


def test_enumerate_examples():
    assert IndexSet.cofinite([1, 3]).enumerate_up_to(5) == [0, 2, 4, 5]
    assert IndexSet.all().enumerate_up_to(2) == [0, 1, 2]
    assert IndexSet.finite([7]).enumerate_up_to(5) == []


def test_intersect_examples():
    assert IndexSet.range(3).intersect(IndexSet.positive()).enumerate_up_to(10) == [1, 2, 3]
    B = IndexSet.cofinite([4])
    assert IndexSet.all().intersect(B).enumerate_up_to(20) == B.enumerate_up_to(20)
    assert IndexSet.finite([1, 2]).intersect(IndexSet.finite([2, 9])).enumerate_up_to(20) == [2]


@pytest.mark.parametrize("text, members", [
    ("{1,4}", [1, 4]), ("0..3", [0, 1, 2, 3]), ("N", list(range(8))),
    ("N+", list(range(1, 8))), ("N\\{2,5}", [0, 1, 3, 4, 6, 7]), ("{}", []),
])
def test_text_forms_roundtrip(text, members):
    B = IndexSet.parse(text)
    assert B.enumerate_up_to(7) == members
    assert IndexSet.parse(B.to_text()).enumerate_up_to(7) == members


def test_malformed_text():
    with pytest.raises(ValueError):
        IndexSet.parse("{1,,2")


def test_shift():
    assert IndexSet.finite([0, 2, 5]).shift(2).enumerate_up_to(10) == [0, 3]
    assert IndexSet.range(4).shift(1).enumerate_up_to(10) == [0, 1, 2, 3]
    assert IndexSet.positive().shift(1).enumerate_up_to(3) == [0, 1, 2, 3]


@given(index_sets)
def test_contains_agrees_with_enumeration(B):
    listed = set(B.enumerate_up_to(64))
    assert all(B.contains(n) == (n in listed) for n in range(65))
    seq = B.enumerate_up_to(64)
    assert all(a < b for a, b in zip(seq, seq[1:]))


@given(index_sets, index_sets)
def test_intersect_commutative_idempotent(A, B):
    lim = 128
    assert A.intersect(B).enumerate_up_to(lim) == B.intersect(A).enumerate_up_to(lim)
    assert A.intersect(A).enumerate_up_to(lim) == A.enumerate_up_to(lim)
    both = [n for n in range(lim + 1) if A.contains(n) and B.contains(n)]
    assert A.intersect(B).enumerate_up_to(lim) == both
