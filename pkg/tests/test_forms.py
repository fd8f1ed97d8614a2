from __future__ import annotations

import itertools
from math import ceil

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdscalc.exact import ONE, as_scalar
from qdscalc.forms import (
    BudgetExceeded,
    FormExpr,
    circle_omega,
    expected_circle_value,
    form_space,
    matrix_zeta,
    omega_d,
    stabilize,
    universal_d,
    universal_product,
    verify_decomposition,
    verify_doubling,
    verify_qds_theorem,
    witness_suite,
)
from qdscalc.oper import CutoffTooSmall, commutator_D
from qdscalc.triple import FINITE, UNIT, circle_triple, doubled, point_triple, qds_of

TOEPLITZ3 = qds_of(point_triple(), 3)


def monomial_count(window: int, g: int, budget: int, degree: int) -> int:
    """Distinct total exponents of z^k0 dz^k1 ... dz^kn with total weight <= budget."""
    weight = lambda k: ceil(abs(k) / g)  # noqa: E731
    ks = range(-window, window + 1)
    totals = set()
    for word in itertools.product(ks, repeat=degree + 1):
        if any(k == 0 for k in word[1:]):
            continue
        if sum(weight(k) for k in word) <= budget and abs(sum(word)) <= window:
            totals.add(sum(word))
    return len(totals)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_finite_matrix_forms(m):
    t = qds_of(point_triple(), m)
    assert [omega_d(t, n, 1, "bounded", "finite").quotient_dim for n in range(4)] == [m * m, m * m, 0, 0]


def test_two_by_two_truncation_has_no_room_for_junk():
    # killing degree-two forms uses matrix units with a third index
    t = qds_of(point_triple(), 2)
    assert [omega_d(t, n, 1, "bounded", "finite").quotient_dim for n in range(4)] == [4, 4, 4, 4]


@pytest.mark.parametrize("m", [2, 3, 4])
def test_laurent_forms_modulo_compacts(m):
    t = qds_of(point_triple(), m)
    assert [omega_d(t, n, 1, "calkin", "laurent").quotient_dim for n in range(3)] == [2 * m + 1, 2 * m + 1, 0]


@pytest.mark.parametrize("window,g,budget", [(8, 1, 3), (5, 1, 2), (6, 2, 2)])
def test_circle_forms_against_monomial_count(window, g, budget):
    t = circle_triple(window, g)
    dims = [omega_d(t, n, budget).quotient_dim for n in range(3)]
    assert dims == [monomial_count(window, g, budget, 0), monomial_count(window, g, budget, 1), 0]


def test_circle_dims_stabilise_in_the_budget():
    dims, stable = stabilize(circle_triple(8, 1), 2, "calkin", max_budget=4)
    assert dims == [0, 0, 0] and stable


def test_point_has_only_scalars():
    assert [omega_d(point_triple(), n, 1).quotient_dim for n in range(3)] == [1, 0, 0]


def _finite_words(space, degree):
    idx = [i for i, e in enumerate(space.basis) if e.tag in (FINITE, UNIT)]
    slots = [i for i in idx if i]
    return st.tuples(st.sampled_from(idx), *[st.sampled_from(slots)] * degree)


def _forms(space, degree):
    return st.lists(st.tuples(_finite_words(space, degree), st.integers(-2, 2).filter(bool)),
                    min_size=1, max_size=3).map(
        lambda ws: sum((FormExpr.word(*w, coeff=as_scalar(c)) for w, c in ws), FormExpr(degree, {})))


SPACE3 = form_space(TOEPLITZ3, 1, "bounded")


@given(_forms(SPACE3, 1), _forms(SPACE3, 1))
def test_pi_is_multiplicative(x, y):
    prod = SPACE3.pi_terms(universal_product(SPACE3, x, y))
    assert prod == SPACE3.mul(SPACE3.pi_terms(x), SPACE3.pi_terms(y))


@given(_forms(SPACE3, 1))
def test_universal_differential_squares_to_zero(x):
    assert not universal_d(universal_d(x))


@given(st.sampled_from(range(len(SPACE3.basis))))
def test_pi_of_da_is_the_commutator(i):
    da = FormExpr.word(0, i)
    assert SPACE3.pi_terms(da) == commutator_D(SPACE3.basis[i].op).terms


def test_products_leaving_the_span_are_reported():
    l3 = SPACE3.index_of("l^3")
    l1 = SPACE3.index_of("l^1")
    with pytest.raises(BudgetExceeded):
        universal_product(SPACE3, FormExpr.word(l3), FormExpr.word(l1))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_matrix_witnesses(n):
    r = witness_suite(qds_of(point_triple(), 6), "matrix_zeta", n)
    assert r["pi_zero"] and r["d_nonzero"]


def test_matrix_witness_needs_room():
    with pytest.raises(CutoffTooSmall):
        matrix_zeta(form_space(qds_of(point_triple(), 4), 1, "bounded"), 5)


@pytest.mark.parametrize("n,value", [(1, -2), (2, -4), (3, 2), (4, 4), (5, -2)])
def test_laurent_witness_values(n, value):
    assert expected_circle_value(n) == value
    r = witness_suite(qds_of(point_triple(), 6), "circle_omega", n)
    assert r["pi_zero"] and r["scalar"]
    assert r["value"] == as_scalar(value)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_the_other_shift_flips_even_degrees(n):
    r = witness_suite(qds_of(point_triple(), 6), "circle_omega", n, xi="shift")
    expected = expected_circle_value(n) * (-1 if n % 2 == 0 else 1)
    assert r["value"] == as_scalar(expected)


def test_circle_witness_is_a_sum_of_words():
    space = form_space(qds_of(point_triple(), 3), 1, "calkin")
    w = circle_omega(space, 1)
    assert w.degree == 1 and len(w.terms) == 2
    with pytest.raises(ValueError):
        circle_omega(space, 1, xi="both")


@pytest.mark.parametrize("t,budget", [(qds_of(point_triple(), 4), 1), (qds_of(circle_triple(4, 1), 2), 2)])
@pytest.mark.parametrize("n", [1, 2])
def test_decomposition_into_matrix_and_laurent_parts(t, budget, n):
    r = verify_decomposition(t, n, budget)
    assert r["sum_equal"] and r["direct"] and r["graded_equal"]
    assert r["intersection_dim"] == 0


@pytest.mark.parametrize("base,m,budget", [(point_triple(), 4, 1), (circle_triple(4, 1), 3, 2),
                                           (doubled(point_triple()), 3, 1)])
def test_single_suspension(base, m, budget):
    r1 = verify_qds_theorem(base, 1, m, budget)
    assert r1["dim_identity"] and r1["section_bijective"]
    assert r1["delta0_formula"] and r1["delta1_kills_algebra"] and r1["chain_property"]
    base_dim = omega_d(base, 1, budget).quotient_dim
    span_size = len(form_space(qds_of(base, m), budget).basis)
    assert r1["qds_dim"] == base_dim * m * m + span_size
    r2 = verify_qds_theorem(base, 2, m, budget)
    assert r2["dim_identity"]
    assert r2["qds_dim"] == omega_d(base, 2, budget).quotient_dim * m * m


def test_doubling_preserves_dimensions():
    r = verify_doubling(circle_triple(4, 1), 2)
    assert r["dims"] == r["doubled_dims"] == [5, 5, 0]
    assert r["f_intersection_trivial"]


def test_omega_json_is_canonical():
    a = omega_d(qds_of(point_triple(), 2), 1, 1).to_json()
    b = omega_d(qds_of(point_triple(), 2), 1, 1).to_json()
    assert a == b and a["quotient_dim"] == len(a["basis"])
    assert all(isinstance(c, str) for row in a["basis"] for _, c in row)


def test_unit_words_are_dropped():
    assert not FormExpr.word(1, 0)
    assert FormExpr.word(0, 1, coeff=ONE).degree == 1
