"""Spectral-triple descriptors: a layer, adjoint-closed generators and a weighted spanning filtration."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Sequence

from .exact import ONE, EchelonBuilder
from .oper import (
    BOUNDED,
    CALKIN,
    CircleLayer,
    DoubledLayer,
    Layer,
    Operator,
    QdsLayer,
    circle,
    commutator_D,
    doubled_scalar_lift,
    is_compact,
    lift,
    mul_F,
    pauli_double,
    point,
    qds_lift,
    shift,
)

__all__ = [
    "BudgetTooSmall",
    "SpanElement",
    "TripleDescriptor",
    "ConditionReport",
    "make_triple",
    "point_triple",
    "circle_triple",
    "qds_of",
    "doubled",
    "spanning_set",
    "check_conditions",
    "grading_report",
]

# tags of spanning elements, used to select word families
UNIT = "unit"
LAURENT = "laurent"
FINITE = "finite"
BASE = "base"


class BudgetTooSmall(ValueError):
    """The word budget is below the minimum the filtration accepts."""


@dataclass(frozen=True)
class SpanElement:
    """One element of a spanning set, with its filtration weight and family tag."""

    op: Operator
    weight: int
    tag: str
    label: str

    def __repr__(self):
        return f"SpanElement({self.label}, w={self.weight})"


@dataclass(eq=False)
class TripleDescriptor:
    kind: str
    layer: Layer
    generators: tuple
    unital: bool = True
    inner: "TripleDescriptor | None" = None
    params: tuple = ()
    _span_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        adjoints = {g.adjoint() for g in self.generators}
        if adjoints != set(self.generators):
            raise ValueError("generators must be closed under adjoint")

    def descriptor(self) -> tuple:
        if self.inner is None:
            return (self.kind,) + self.params
        return (self.kind, self.inner.descriptor()) + self.params

    @property
    def default_mode(self) -> str:
        """Bounded for towers over the point, Calkin for towers over the circle."""
        t = self
        while t.inner is not None:
            t = t.inner
        return BOUNDED if t.kind == "point" else CALKIN

    @property
    def depth(self) -> int:
        """Number of suspensions above the base."""
        t, k = self, 0
        while t.inner is not None:
            k += t.kind == "qds"
            t = t.inner
        return k

    def spanning_set(self, budget: int) -> list[SpanElement]:
        return spanning_set(self, budget)

    def __repr__(self):
        return f"TripleDescriptor{self.descriptor()}"


# ---------------------------------------------------------------------------
# constructors


def point_triple() -> TripleDescriptor:
    return TripleDescriptor("point", point(), (), True)


def circle_triple(window: int, gen_degree: int = 1) -> TripleDescriptor:
    layer = circle(window, gen_degree)
    gens = []
    for j in range(1, gen_degree + 1):
        gens.append(Operator(layer, {("z", j, 0): ONE}))
        gens.append(Operator(layer, {("z", -j, 0): ONE}))
    return TripleDescriptor("circle", layer, tuple(gens), True, None, (window, gen_degree))


def qds_of(inner: TripleDescriptor, cutoff: int) -> TripleDescriptor:
    """Suspension triple generated by g (x) u for inner generators g and 1, plus the shift and its adjoint."""
    layer = qds_lift(inner.layer, cutoff)
    gens = [lift(g, layer, 0, 0) for g in inner.generators]
    gens.append(lift(inner.layer.identity(), layer, 0, 0))
    gens.append(shift(layer, 1))
    gens.append(shift(layer, -1))
    return TripleDescriptor("qds", layer, tuple(gens), True, inner, (cutoff,))


def doubled(inner: TripleDescriptor) -> TripleDescriptor:
    layer = pauli_double(inner.layer)
    gens = tuple(doubled_scalar_lift(g, layer) for g in inner.generators)
    return TripleDescriptor("doubled", layer, gens, inner.unital, inner, ())


def make_triple(kind, *args) -> TripleDescriptor:
    """Build a triple from a kind name and its parameters.

    ``make_triple("point")``, ``make_triple("circle", W, g)``,
    ``make_triple("qds_of", inner, m)``, ``make_triple("doubled", inner)``.
    A nested descriptor tuple such as ``("qds", ("circle", 8, 1), 6)`` is
    accepted as well.
    """
    if isinstance(kind, tuple):
        return _from_descriptor(kind)
    if kind == "point":
        return point_triple()
    if kind == "circle":
        return circle_triple(*args)
    if kind in ("qds", "qds_of"):
        inner, m = args
        if isinstance(inner, tuple):
            inner = _from_descriptor(inner)
        return qds_of(inner, m)
    if kind == "doubled":
        inner = args[0]
        if isinstance(inner, tuple):
            inner = _from_descriptor(inner)
        return doubled(inner)
    raise ValueError(f"unknown triple kind {kind!r}")


def _from_descriptor(desc: tuple) -> TripleDescriptor:
    kind = desc[0]
    if kind == "point":
        return point_triple()
    if kind == "circle":
        return circle_triple(int(desc[1]), int(desc[2]))
    if kind == "qds":
        return qds_of(_from_descriptor(desc[1]), int(desc[2]))
    if kind == "doubled":
        return doubled(_from_descriptor(desc[1]))
    raise ValueError(f"unknown triple descriptor {desc!r}")


# ---------------------------------------------------------------------------
# spanning filtration


def _laurent_order(bound: int):
    yield 0
    for d in range(1, bound + 1):
        yield d
        yield -d


def spanning_set(t: TripleDescriptor, budget: int) -> list[SpanElement]:
    """Linearly independent, adjoint-closed spanning set of weight at most ``budget``.

    The unit comes first.  Weights: a circle monomial z^k weighs
    ceil(|k| / g); shifts and matrix units weigh nothing, so on a suspension
    the budget only limits the Fourier degree of the coefficients.
    """
    if budget < 1:
        raise BudgetTooSmall(f"word budget must be at least 1, got {budget}")
    cached = t._span_cache.get(budget)
    if cached is not None:
        return cached
    layer = t.layer
    out: list[SpanElement] = []
    if t.kind == "point":
        out.append(SpanElement(layer.identity(), 0, UNIT, "1"))
    elif t.kind == "circle":
        g = layer.gen_degree
        out.append(SpanElement(layer.identity(), 0, UNIT, "1"))
        k = 1
        while ceil(k / g) <= budget:
            for s in (k, -k):
                out.append(SpanElement(Operator(layer, {("z", s, 0): ONE}), ceil(k / g), BASE, f"z^{s}"))
            k += 1
    elif t.kind == "qds":
        m = layer.cutoff
        for d in _laurent_order(m):
            tag = UNIT if d == 0 else LAURENT
            label = "1" if d == 0 else (f"l^{d}" if d > 0 else f"l*^{-d}")
            out.append(SpanElement(shift(layer, d), 0, tag, label))
        for el in spanning_set(t.inner, budget):
            for p in range(m):
                for q in range(m):
                    out.append(SpanElement(lift(el.op, layer, p, q), el.weight, FINITE,
                                           f"{el.label}(x)e[{p},{q}]"))
    elif t.kind == "doubled":
        for el in spanning_set(t.inner, budget):
            out.append(SpanElement(doubled_scalar_lift(el.op, layer), el.weight, el.tag, f"{el.label}(x)I2"))
    else:
        raise ValueError(f"unknown triple kind {t.kind!r}")
    t._span_cache[budget] = out
    return out


# ---------------------------------------------------------------------------
# hypotheses


@dataclass
class ConditionReport:
    condition_A: bool
    witnesses: list
    f_intersection_trivial: bool
    f_intersection_dim: int
    notes: list

    def to_json(self) -> dict:
        return {
            "condition_A": self.condition_A,
            "witnesses": self.witnesses,
            "f_intersection_trivial": self.f_intersection_trivial,
            "f_intersection_dim": self.f_intersection_dim,
            "notes": list(self.notes),
        }


def _dirac_sign_defect(g: Operator) -> Operator:
    """[D, g] F - F [D, g]."""
    layer = g.layer
    x = commutator_D(g)
    return Operator._raw(layer, _sub(layer.f_right_terms(x.terms), layer.f_left_terms(x.terms)))


def _sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k)
        nv = -v if nv is None else nv - v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def check_conditions(t: TripleDescriptor, budget: int = 1) -> ConditionReport:
    """Compactness of [D,g]F - F[D,g] per generator, and triviality of span(F A) meet span(A)."""
    witnesses = []
    ok = True
    for g in t.generators:
        defect = _dirac_sign_defect(g)
        compact = is_compact(defect)
        ok = ok and compact
        witnesses.append({"generator": g.pretty(), "defect": defect.pretty(), "compact": compact})
    elems = spanning_set(t, budget)
    inter = _intersection_dim([e.op.terms for e in elems], [mul_F(e.op).terms for e in elems])
    notes = ["Condition (B) is a structural declaration of the layer grammar, not a checked predicate"]
    return ConditionReport(ok, witnesses, inter == 0, inter, notes)


def _intersection_dim(first: Sequence[dict], second: Sequence[dict]) -> int:
    """dim(span(first) meet span(second)) in full bounded coordinates."""
    a = EchelonBuilder(order=_key_order)
    for v in first:
        a.insert(v)
    b = EchelonBuilder(order=_key_order)
    for v in second:
        b.insert(v)
    total = EchelonBuilder(order=_key_order)
    for v in list(a.rows.values()) + list(b.rows.values()):
        total.insert(v)
    return len(a) + len(b) - len(total)


def _key_order(key):
    return repr(key)


def grading_report(t: TripleDescriptor, budget: int = 1) -> dict:
    """For a doubled triple: the grading commutes with the algebra and anticommutes with F and commutators."""
    layer = t.layer
    if not isinstance(layer, DoubledLayer):
        raise ValueError("grading exists only on doubled triples")
    gamma = layer.grading()
    sign_op = layer.sign_operator()
    commutes = all(gamma * e.op == e.op * gamma for e in spanning_set(t, budget))
    anti_f = gamma * sign_op == -(sign_op * gamma)
    anti_d = all(
        gamma * commutator_D(e.op) == -(commutator_D(e.op) * gamma) for e in spanning_set(t, budget)
    )
    return {"commutes_with_algebra": commutes, "anticommutes_with_F": anti_f,
            "anticommutes_with_commutators": anti_d}
