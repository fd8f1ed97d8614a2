from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdscalc.triple import (
    BudgetTooSmall,
    check_conditions,
    circle_triple,
    doubled,
    grading_report,
    make_triple,
    point_triple,
    qds_of,
    spanning_set,
)


def test_spanning_set_sizes():
    assert len(spanning_set(point_triple(), 1)) == 1
    assert len(spanning_set(circle_triple(8, 1), 3)) == 7
    # weight of z^k is ceil(|k| / g): with g = 2 and budget 2, |k| <= 4
    assert len(spanning_set(circle_triple(8, 2), 2)) == 9
    # Laurent shifts of degree |d| <= m, then inner elements times m^2 matrix units
    assert len(spanning_set(qds_of(point_triple(), 3), 1)) == 7 + 9
    assert len(spanning_set(qds_of(circle_triple(6, 1), 3), 2)) == 7 + 5 * 9
    assert len(spanning_set(doubled(circle_triple(4, 1)), 2)) == 5


@pytest.mark.parametrize("t", [circle_triple(5, 2), qds_of(point_triple(), 3), qds_of(circle_triple(4, 1), 2),
                               doubled(circle_triple(4, 1)), qds_of(doubled(point_triple()), 2)])
def test_spanning_set_is_adjoint_closed_unit_first(t):
    elems = spanning_set(t, 2)
    assert elems[0].op == t.layer.identity()
    ops = {e.op for e in elems}
    assert all(e.op.adjoint() in ops for e in elems)
    assert len({e.label for e in elems}) == len(elems)


def test_budget_floor():
    with pytest.raises(BudgetTooSmall):
        spanning_set(circle_triple(4, 1), 0)


descriptors = st.recursive(
    st.one_of(st.just(("point",)), st.builds(lambda w, g: ("circle", w, g), st.integers(1, 6), st.integers(1, 2))),
    lambda inner: st.one_of(st.builds(lambda t, m: ("qds", t, m), inner, st.integers(2, 4)),
                            st.builds(lambda t: ("doubled", t), inner)),
    max_leaves=3,
)


@given(descriptors)
def test_descriptor_round_trip(desc):
    t = make_triple(desc)
    assert t.descriptor() == desc
    assert make_triple(t.descriptor()).layer is t.layer


def test_named_constructor_forms():
    assert make_triple("circle", 8, 1).descriptor() == ("circle", 8, 1)
    assert make_triple("qds_of", ("point",), 3).descriptor() == ("qds", ("point",), 3)
    with pytest.raises(ValueError):
        make_triple("torus")


def test_default_mode_follows_the_base():
    assert qds_of(qds_of(point_triple(), 3), 2).default_mode == "bounded"
    assert qds_of(circle_triple(4, 1), 2).default_mode == "calkin"
    assert qds_of(qds_of(point_triple(), 3), 2).depth == 2


@pytest.mark.parametrize("t", [circle_triple(6, 1), qds_of(circle_triple(6, 1), 4),
                               qds_of(qds_of(point_triple(), 4), 4), doubled(circle_triple(4, 1))])
def test_condition_A_holds(t):
    report = check_conditions(t)
    assert report.condition_A
    assert all(w["compact"] for w in report.witnesses)


def test_sign_image_meets_algebra_only_when_F_is_not_scalar():
    # on the circle and on a Pauli double F A meets A in 0; on the suspended
    # point F = 1, so F A = A
    assert check_conditions(circle_triple(4, 1), 2).f_intersection_trivial
    assert check_conditions(doubled(point_triple())).f_intersection_trivial
    toeplitz = check_conditions(qds_of(point_triple(), 3))
    assert not toeplitz.f_intersection_trivial
    assert toeplitz.f_intersection_dim == 16


def test_grading_of_pauli_double():
    report = grading_report(doubled(circle_triple(4, 1)), 2)
    assert report == {"commutes_with_algebra": True, "anticommutes_with_F": True,
                      "anticommutes_with_commutators": True}
    with pytest.raises(ValueError):
        grading_report(circle_triple(4, 1))
