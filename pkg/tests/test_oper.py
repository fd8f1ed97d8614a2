from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import dense
from qdscalc.exact import ONE, as_scalar
from qdscalc.oper import (
    BOUNDED,
    CALKIN,
    CutoffTooSmall,
    LaurentPoly,
    LayerMismatch,
    Operator,
    UnboundedCommutator,
    WindowOverflow,
    circle,
    commutator_D,
    coords,
    doubled_scalar_lift,
    elementary,
    is_compact,
    layer_from_descriptor,
    lift,
    mul_F,
    mul_F_right,
    op_mul,
    pauli_double,
    point,
    qds_lift,
    shift,
)

CIRCLE = circle(8, 1)
TOEPLITZ = qds_lift(point(), 3)
SUSP_CIRCLE = qds_lift(CIRCLE, 3)
DOUBLED = pauli_double(CIRCLE)

circle_keys = st.one_of(
    st.tuples(st.just("z"), st.integers(-3, 3), st.integers(0, 1)),
    st.tuples(st.just("E"), st.integers(-3, 3), st.integers(-3, 3)),
)
coeffs = st.integers(-3, 3).filter(bool)


def ops(keys, layer, max_terms=3):
    return st.dictionaries(keys, coeffs, min_size=0, max_size=max_terms).map(lambda d: Operator(layer, d))


toeplitz_keys = st.one_of(
    st.tuples(st.just("e"), st.integers(0, 2), st.integers(0, 2), st.just(())),
    st.tuples(st.just("l"), st.integers(-3, 3), st.just(())),
)
susp_circle_keys = st.one_of(
    st.tuples(st.just("e"), st.integers(0, 2), st.integers(0, 2), circle_keys),
    # band coefficients that commute with F: functions of F only
    st.tuples(st.just("l"), st.integers(-3, 3), st.sampled_from([("z", 0, 0), ("z", 0, 1)])),
)
doubled_keys = st.tuples(st.just("P"), st.integers(0, 1), st.integers(0, 1), circle_keys)


def agree(layer, engine: Operator, model: dict) -> bool:
    return dense.restrict(layer, dense.to_dense(engine)) == dense.restrict(layer, model)


@pytest.mark.parametrize(
    "layer,keys",
    [(CIRCLE, circle_keys), (TOEPLITZ, toeplitz_keys), (SUSP_CIRCLE, susp_circle_keys), (DOUBLED, doubled_keys)],
    ids=["circle", "toeplitz", "suspended-circle", "doubled-circle"],
)
@given(data=st.data())
def test_products_match_dense_model(layer, keys, data):
    a = data.draw(ops(keys, layer))
    b = data.draw(ops(keys, layer))
    assert agree(layer, op_mul(a, b), dense.matmul(dense.to_dense(a), dense.to_dense(b)))


@pytest.mark.parametrize(
    "layer,keys",
    [(CIRCLE, circle_keys), (TOEPLITZ, toeplitz_keys), (SUSP_CIRCLE, susp_circle_keys)],
    ids=["circle", "toeplitz", "suspended-circle"],
)
@given(data=st.data())
def test_commutator_with_dirac_matches_dense_model(layer, keys, data):
    a = data.draw(ops(keys, layer))
    x = dense.to_dense(a)
    d = dense.dirac(layer)
    assert agree(layer, commutator_D(a), dense.sub(dense.matmul(d, x), dense.matmul(x, d)))


@given(ops(circle_keys, CIRCLE))
def test_doubled_commutator_of_scalar_lift(a):
    x = doubled_scalar_lift(a, DOUBLED)
    d = dense.dirac(DOUBLED)
    m = dense.to_dense(x)
    assert agree(DOUBLED, commutator_D(x), dense.sub(dense.matmul(d, m), dense.matmul(m, d)))


@pytest.mark.parametrize(
    "layer,keys",
    [(CIRCLE, circle_keys), (TOEPLITZ, toeplitz_keys), (SUSP_CIRCLE, susp_circle_keys), (DOUBLED, doubled_keys)],
    ids=["circle", "toeplitz", "suspended-circle", "doubled-circle"],
)
@given(data=st.data())
def test_sign_multiplication_and_adjoint_match_dense_model(layer, keys, data):
    a = data.draw(ops(keys, layer))
    x = dense.to_dense(a)
    f = dense.sign(layer)
    assert agree(layer, mul_F(a), dense.matmul(f, x))
    assert agree(layer, mul_F_right(a), dense.matmul(x, f))
    assert agree(layer, a.adjoint(), {(c, r): v for (r, c), v in x.items()})


@given(ops(circle_keys, CIRCLE), ops(circle_keys, CIRCLE), ops(circle_keys, CIRCLE))
def test_product_is_associative_and_adjoint_reverses(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert (a * b).adjoint() == b.adjoint() * a.adjoint()
    assert a.adjoint().adjoint() == a


@given(ops(circle_keys, CIRCLE), ops(circle_keys, CIRCLE))
def test_commutator_is_a_derivation(a, b):
    assert commutator_D(a * b) == commutator_D(a) * b + a * commutator_D(b)


@given(ops(toeplitz_keys, TOEPLITZ), ops(toeplitz_keys, TOEPLITZ))
def test_calkin_product_is_product_modulo_compacts(a, b):
    full = op_mul(a, b, BOUNDED)
    reduced = op_mul(a, b, CALKIN)
    assert reduced == full.calkin()
    assert is_compact(full - reduced)


def test_shift_relations_on_the_half_line():
    l1, l1s = shift(TOEPLITZ, 1), shift(TOEPLITZ, -1)
    one = TOEPLITZ.identity()
    assert l1 * l1s == one
    assert l1s * l1 == one - elementary(TOEPLITZ, 0, 0)
    assert is_compact(l1s * l1 - one)


def test_circle_sign_defect_is_finite_rank():
    z = Operator(CIRCLE, {("z", 1, 0): 1})
    defect = mul_F(z) - mul_F_right(z)
    assert defect == Operator(CIRCLE, {("E", 0, -1): 2})
    assert is_compact(defect)


def test_band_coefficient_must_commute_with_sign():
    band = Operator(SUSP_CIRCLE, {("l", 1, ("z", 1, 0)): 1})
    with pytest.raises(UnboundedCommutator):
        commutator_D(band)


def test_layer_errors():
    with pytest.raises(CutoffTooSmall):
        qds_lift(point(), 1)
    with pytest.raises(LayerMismatch):
        _ = CIRCLE.identity() + TOEPLITZ.identity()
    with pytest.raises(WindowOverflow):
        coords(Operator(CIRCLE, {("z", 9, 0): 1}))
    assert coords(Operator(CIRCLE, {("E", 1, 1): 1}), CALKIN) == {}


def test_layers_are_interned_and_descriptors_round_trip():
    assert qds_lift(CIRCLE, 3) is SUSP_CIRCLE
    for layer in (CIRCLE, TOEPLITZ, SUSP_CIRCLE, DOUBLED, pauli_double(point())):
        assert layer_from_descriptor(layer.descriptor()) is layer


def test_doubled_identity_spans_both_blocks():
    ident = pauli_double(point()).identity()
    assert set(ident.terms) == {("P", 0, 0, ()), ("P", 1, 1, ())}
    susp = qds_lift(pauli_double(point()), 2)
    assert shift(susp, 1) * shift(susp, -1) == susp.identity()


def test_lift_places_inner_operator_in_a_matrix_corner():
    z = Operator(CIRCLE, {("z", 2, 0): 3})
    assert lift(z, SUSP_CIRCLE, 1, 2).terms == {("e", 1, 2, ("z", 2, 0)): as_scalar(3)}


@given(st.dictionaries(st.integers(-3, 3), st.integers(-3, 3)))
def test_laurent_symbol_round_trip_and_derivative(coeffs_):
    f = LaurentPoly(coeffs_)
    op = f.to_operator(TOEPLITZ)
    assert LaurentPoly.symbol_of(op) == f
    # [N, sigma(f)] has symbol f' under l e_n = e_{n-1}
    comm = commutator_D(op)
    assert LaurentPoly.symbol_of(comm) == f.derivative()


def test_pretty_uses_requested_index_base():
    e = elementary(TOEPLITZ, 0, 1, ONE)
    assert "e[0,1]" in e.pretty()
    assert "e[1,2]" in e.pretty(one_based=True)
