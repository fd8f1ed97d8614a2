from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qdscalc.exact import (
    ONE,
    ZERO,
    AmbientMismatch,
    EchelonBuilder,
    ExactMatrix,
    I_UNIT,
    NotASubspace,
    Scalar,
    Subspace,
    as_scalar,
    kernel,
    rref,
    sparse_add,
    span,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
scalars = st.builds(Scalar, rationals, rationals)


@given(scalars, scalars, scalars)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ZERO
    if a:
        assert a * a.inverse() == ONE
        assert (b / a) * a == b


@given(scalars)
def test_conjugation_and_serialisation(a):
    assert a.conjugate().conjugate() == a
    assert (a * a.conjugate()).is_real()
    assert Scalar.parse(a.to_json()) == a


def test_small_literals():
    assert I_UNIT * I_UNIT == -ONE
    assert as_scalar(Fraction(1, 3)).to_json() == "1/3"
    assert as_scalar(complex(2, -1)).to_json() == "2|-1"
    with pytest.raises(TypeError):
        as_scalar(0.5)


def test_sparse_add_keeps_no_zero_entries():
    acc = {"a": ONE}
    sparse_add(acc, {"a": ONE, "b": ONE}, -ONE)
    assert acc == {"b": -ONE}


small_ints = st.integers(-3, 3)
matrices = st.integers(1, 5).flatmap(
    lambda rows: st.integers(1, 6).flatmap(
        lambda cols: st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)))


def _sympy_rref(data):
    reduced, pivots = sympy.Matrix(data).rref()
    rows = [[as_scalar(Fraction(int(x.p), int(x.q))) for x in reduced.row(i)] for i in range(len(pivots))]
    return rows, tuple(pivots)


@given(matrices)
def test_rref_matches_sympy(data):
    reduced, pivots = rref(ExactMatrix.from_rows(data))
    rows, expected_pivots = _sympy_rref(data)
    assert pivots == expected_pivots
    assert reduced.to_lists()[:len(pivots)] == rows


@given(matrices)
def test_kernel_is_annihilated_and_has_complementary_dimension(data):
    m = ExactMatrix.from_rows(data)
    ker = kernel(m)
    cols = len(data[0])
    assert ker.dim + len(rref(m)[1]) == cols
    for vec in ker.basis.row_dicts():
        for row in data:
            assert sum((as_scalar(row[j]) * v for j, v in vec.items()), ZERO) == ZERO


vectors = st.lists(st.dictionaries(st.integers(0, 5), small_ints.filter(bool), max_size=4), max_size=5)


@given(vectors, vectors)
def test_subspace_dimension_formula(u, v):
    a = span(6, [{k: as_scalar(x) for k, x in d.items()} for d in u])
    b = span(6, [{k: as_scalar(x) for k, x in d.items()} for d in v])
    assert a.sum(b).dim + a.intersect(b).dim == a.dim + b.dim
    assert a.sum(b).contains(a) and a.contains(a.intersect(b))
    assert a.sum(b).quotient_dim(a) == a.sum(b).dim - a.dim


def test_subspace_errors():
    with pytest.raises(AmbientMismatch):
        Subspace.zero(2).sum(Subspace.zero(3))
    with pytest.raises(NotASubspace):
        Subspace.zero(2).quotient_dim(Subspace.full(2))


@given(vectors)
def test_echelon_builder_membership(u):
    eb = EchelonBuilder()
    inserted = 0
    for d in u:
        vec = {k: as_scalar(x) for k, x in d.items()}
        inserted += eb.insert(vec)
        assert eb.contains(vec)
    assert inserted == len(eb) == span(6, [{k: as_scalar(x) for k, x in d.items()} for d in u]).dim


def test_coordinates_recover_combination():
    s = Subspace.spanned_by(3, [{0: ONE, 1: ONE}, {1: ONE, 2: ONE}])
    coords = s.coordinates({0: ONE, 1: as_scalar(3), 2: as_scalar(2)})
    rebuilt: dict = {}
    for c, row in zip(coords, s.basis.row_dicts()):
        sparse_add(rebuilt, row, c)
    assert rebuilt == {0: ONE, 1: as_scalar(3), 2: as_scalar(2)}
