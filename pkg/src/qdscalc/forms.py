"""Universal forms over a spanning filtration, their operator images, junk, and the quotient calculus.

Computational model
-------------------
A degree-n word is a tuple (i0, i1, ..., in) of spanning-set indices whose
weights add up to at most the budget; it stands for b_{i0} db_{i1} ... db_{in}
and is represented by the operator b_{i0} [D, b_{i1}] ... [D, b_{in}].

Spans are assembled level by level.  ``products[n]`` holds linearly
independent operators [D, b_{i1}] ... [D, b_{in}] (with the word producing
each one), inserted in order of increasing weight so that anything dependent
is a combination of lighter or equally heavy survivors.  Every degree-n
image is then a combination of b_{i0} y with y a survivor.

The image of the exact junk d(ker pi) in degree n comes from the pairs
(b y, [D, b] y) for survivors y of degree n - 1: the pairs span the graph of
omega -> (pi(omega), pi(d omega)), so eliminating the first component leaves
exactly the image of d restricted to the kernel.

Every span is kept twice over: in full coordinates, and intersected with the
coordinate window of the layer.  Columns outside the window are ordered
first, so the rows of a reduced echelon form whose pivot lies inside the
window span the intersection.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exact import ONE, ZERO, EchelonBuilder, Scalar, Subspace, as_scalar, sparse_add
from .oper import BOUNDED, CALKIN, MODES, Operator, WindowOverflow, coords
from .triple import FINITE, LAURENT, UNIT, TripleDescriptor, spanning_set

__all__ = [
    "BudgetExceeded",
    "NotWellDefined",
    "FormExpr",
    "FormSpace",
    "OmegaSpace",
    "form_space",
    "pi_eval",
    "universal_d",
    "universal_product",
    "omega_span",
    "junk_span",
    "omega_d",
    "induced_differential",
    "stabilize",
    "check_well_defined",
    "matrix_zeta",
    "circle_omega",
    "expected_circle_value",
    "witness_suite",
    "verify_decomposition",
    "verify_qds_theorem",
    "verify_corollary",
    "verify_doubling",
    "FAMILIES",
]

FULL = "full"
FAMILIES = (FULL, "finite", "laurent")


class BudgetExceeded(ValueError):
    """A product of spanning elements left the truncated filtration."""


class NotWellDefined(ValueError):
    """The induced differential does not preserve junk at this truncation."""


# ---------------------------------------------------------------------------
# formal expressions


@dataclass(frozen=True)
class FormExpr:
    """Element of the reduced universal algebra: words of spanning indices with coefficients.

    Index 0 is the unit; it never occurs in slots 1..k, where d1 = 0.
    """

    degree: int
    terms: Mapping[tuple, Scalar] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for w, c in self.terms.items():
            if len(w) != self.degree + 1:
                raise ValueError(f"word {w} does not have degree {self.degree}")
            c = as_scalar(c)
            if c and 0 not in w[1:]:
                clean[tuple(w)] = clean.get(tuple(w), ZERO) + c
        object.__setattr__(self, "terms", {w: c for w, c in clean.items() if c})

    @classmethod
    def word(cls, *indices: int, coeff=ONE) -> "FormExpr":
        return cls(len(indices) - 1, {tuple(indices): as_scalar(coeff)})

    def __add__(self, other: "FormExpr") -> "FormExpr":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        return FormExpr(self.degree, sparse_add(dict(self.terms), other.terms))

    def __sub__(self, other: "FormExpr") -> "FormExpr":
        return self + other * (-ONE)

    def __neg__(self):
        return self * (-ONE)

    def __mul__(self, c) -> "FormExpr":
        c = as_scalar(c)
        return FormExpr(self.degree, {w: v * c for w, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, FormExpr) and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.degree, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "terms": [[list(w), self.terms[w].to_json()] for w in sorted(self.terms)]}


def universal_d(w: FormExpr) -> FormExpr:
    """d(a0 da1 ... dak) = 1 da0 da1 ... dak; words starting with the unit vanish."""
    return FormExpr(w.degree + 1, {(0,) + word: c for word, c in w.terms.items() if word[0] != 0})


# ---------------------------------------------------------------------------
# the working context


def _tag_order(label):
    if type(label) is _Tag:
        return (1, label.i)
    return (0, label)


class _Tag:
    """Auxiliary column label used to track linear combinations during elimination."""

    __slots__ = ("i",)

    def __init__(self, i):
        self.i = i

    def __eq__(self, other):
        return type(other) is _Tag and other.i == self.i

    def __hash__(self):
        return hash(("tag", self.i))

    def __repr__(self):
        return f"#{self.i}"


@dataclass
class _Survivor:
    vec: dict
    weight: int
    word: tuple  # slots 1..n


class FormSpace:
    """Spanning set, operator data and memoised spans for one (triple, budget, mode)."""

    def __init__(self, t: TripleDescriptor, budget: int, mode: str | None = None):
        mode = mode or t.default_mode
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.t = t
        self.budget = budget
        self.mode = mode
        self.layer = t.layer
        self.basis = spanning_set(t, budget)
        if not self.basis or self.basis[0].tag != UNIT:
            raise ValueError("spanning set must start with the unit")
        layer = self.layer
        self.weights = [e.weight for e in self.basis]
        self.elems = [self._reduce_mode(e.op.terms) for e in self.basis]
        self.comms = [self._reduce_mode(layer.comm_terms(e.op.terms)) for e in self.basis]
        self._products: dict = {}
        self._pi: dict = {}
        self._junk: dict = {}
        self._omega: dict = {}
        self._expander = None
        self._mulcache: dict = {}
        self._order_cache: dict = {}

    # helpers ----------------------------------------------------------------
    def _reduce_mode(self, terms: Mapping) -> dict:
        return self.layer.calkin_terms(terms) if self.mode == CALKIN else dict(terms)

    def mul(self, a: Mapping, b: Mapping) -> dict:
        return self.layer.mul_terms(a, b, self.mode)

    def window_rank(self, key) -> int:
        """0 for keys outside the coordinate window, 1 inside."""
        try:
            return self._order_cache[key]
        except KeyError:
            r = 1 if self.layer.in_window(key) else 0
            self._order_cache[key] = r
            return r

    def _order(self, key):
        return (self.window_rank(key), key)

    def index_of(self, label: str) -> int:
        for i, e in enumerate(self.basis):
            if e.label == label:
                return i
        raise KeyError(label)

    def families(self, family: str, degree: int) -> tuple[list, list]:
        """(allowed a0 indices, allowed slot indices) for a word family."""
        tags = [e.tag for e in self.basis]
        n = len(tags)
        if family == FULL:
            return list(range(n)), [i for i in range(n) if tags[i] != UNIT]
        if family == "finite":
            slots = [i for i in range(n) if tags[i] == FINITE]
            if not slots:
                raise ValueError("the finite family needs a suspension triple")
            a0 = slots if degree == 0 else [0] + slots
            return a0, slots
        if family == "laurent":
            slots = [i for i in range(n) if tags[i] == LAURENT]
            if not slots:
                raise ValueError("the Laurent family needs a suspension triple")
            return [0] + slots, slots
        raise ValueError(f"unknown word family {family!r}")

    # operator images --------------------------------------------------------
    def pi_terms(self, w: FormExpr) -> dict:
        """pi(w) as operator terms (reduced modulo compacts in Calkin mode)."""
        out: dict = {}
        for word, c in w.terms.items():
            vec = self.elems[word[0]]
            for i in word[1:]:
                if not vec:
                    break
                vec = self.mul(vec, self.comms[i])
            sparse_add(out, vec, c)
        return out

    def pi_operator(self, w: FormExpr) -> Operator:
        return Operator(self.layer, self.pi_terms(w))

    # product expansion --------------------------------------------------------
    def expand(self, terms: Mapping) -> dict:
        """Coefficients of an operator in the spanning set (exact, bounded coordinates)."""
        if self._expander is None:
            eb = EchelonBuilder(order=_tag_order)
            for i, e in enumerate(self.basis):
                row = dict(e.op.terms)
                row[_Tag(i)] = ONE
                eb.insert(row)
            self._expander = eb
        res = self._expander.reduce(terms)
        out = {}
        for k, v in res.items():
            if type(k) is not _Tag:
                raise BudgetExceeded(
                    "a product of spanning elements is not in the spanning set; raise the budget or cutoff"
                )
            out[k.i] = -v
        return out

    def product_indices(self, i: int, j: int) -> dict:
        """b_i b_j expanded in the spanning set."""
        key = (i, j)
        hit = self._mulcache.get(key)
        if hit is None:
            a = self.basis[i].op
            b = self.basis[j].op
            hit = self.expand(self.layer.mul_terms(a.terms, b.terms, BOUNDED))
            self._mulcache[key] = hit
        return hit

    # spans ------------------------------------------------------------------
    def survivors(self, n: int, family: str = FULL) -> list[_Survivor]:
        key = (n, family)
        if key in self._products:
            return self._products[key]
        if n == 0:
            ident = self._reduce_mode(self.layer.identity().terms)
            out = [_Survivor(ident, 0, ())] if ident else []
        else:
            prev = self.survivors(n - 1, family)
            _, slots = self.families(family, n)
            cands = []
            for y in prev:
                for s in slots:
                    w = y.weight + self.weights[s]
                    if w <= self.budget:
                        cands.append((w, y.word + (s,), y, s))
            cands.sort(key=lambda c: (c[0], c[1]))
            eb = EchelonBuilder()
            out = []
            for w, word, y, s in cands:
                vec = self.mul(y.vec, self.comms[s])
                if vec and eb.insert(vec):
                    out.append(_Survivor(vec, w, word))
        self._products[key] = out
        return out

    def pi_span(self, n: int, family: str = FULL) -> "_Span":
        key = (n, family)
        if key not in self._pi:
            a0s, _ = self.families(family, n)
            eb = EchelonBuilder(order=self._order)
            originals = []
            for y in self.survivors(n, family):
                for i in a0s:
                    if y.weight + self.weights[i] > self.budget:
                        continue
                    vec = self.mul(self.elems[i], y.vec)
                    if vec and eb.insert(vec):
                        originals.append(((i,) + y.word, vec, y.vec))
            self._pi[key] = _Span(self, eb, originals)
        return self._pi[key]

    def junk_span(self, n: int, family: str = FULL) -> "_Span":
        key = (n, family)
        if key not in self._junk:
            eb = EchelonBuilder(order=_pair_order(self))
            if n >= 1:
                a0s, _ = self.families(family, n - 1)
                for y in self.survivors(n - 1, family):
                    for i in a0s:
                        if y.weight + self.weights[i] > self.budget:
                            continue
                        first = self.mul(self.elems[i], y.vec)
                        second = self.mul(self.comms[i], y.vec) if i != 0 else {}
                        if not first and not second:
                            continue
                        row = {(0, k): v for k, v in first.items()}
                        for k, v in second.items():
                            row[(1, k)] = v
                        eb.insert(row)
            out = EchelonBuilder(order=self._order)
            for p, row in eb.rows.items():
                if p[0] == 1:
                    out.insert({k[1]: v for k, v in row.items()})
            self._junk[key] = _Span(self, out, [])
        return self._junk[key]

    def omega(self, n: int, family: str = FULL) -> "OmegaSpace":
        key = (n, family)
        if key not in self._omega:
            self._omega[key] = OmegaSpace(self, n, family)
        return self._omega[key]


def _pair_order(space: FormSpace):
    def order(label):
        block, key = label
        if block == 0:
            return (0, key)
        return (1 + space.window_rank(key), key)
    return order


class _Span:
    """A span in full coordinates with its windowed part, plus optional word preimages."""

    def __init__(self, space: FormSpace, builder: EchelonBuilder, originals: list):
        self.space = space
        self.builder = builder
        self.originals = originals
        self._tagged = None

    @property
    def dim_full(self) -> int:
        return len(self.builder)

    def window_rows(self) -> list[dict]:
        s = self.space
        return [self.builder.rows[p] for p in self.builder.pivots() if s.window_rank(p) == 1]

    @property
    def dim(self) -> int:
        s = self.space
        return sum(1 for p in self.builder.rows if s.window_rank(p) == 1)

    def contains(self, vec: Mapping) -> bool:
        return self.builder.contains(vec)

    def preimage(self, vec: Mapping) -> dict:
        """Coefficients on ``originals`` reproducing ``vec`` exactly."""
        if self._tagged is None:
            eb = EchelonBuilder(order=lambda k: (1, k.i) if type(k) is _Tag else (0,) + self.space._order(k))
            for j, (_, v, _) in enumerate(self.originals):
                row = dict(v)
                row[_Tag(j)] = ONE
                eb.insert(row)
            self._tagged = eb
        res = self._tagged.reduce(vec)
        out = {}
        for k, v in res.items():
            if type(k) is not _Tag:
                raise ValueError("vector is not in the span")
            out[k.i] = -v
        return out

    def subspace(self, frame: Sequence) -> Subspace:
        """Windowed part as a canonical :class:`Subspace` over an explicit key frame."""
        index = {k: j for j, k in enumerate(frame)}
        rows = [{index[k]: v for k, v in r.items()} for r in self.window_rows()]
        return Subspace.spanned_by(len(frame), rows)


# ---------------------------------------------------------------------------
# the quotient


class OmegaSpace:
    """Omega_D^n at one truncation: (image of forms meet window) / (image of junk meet window)."""

    def __init__(self, space: FormSpace, n: int, family: str = FULL):
        if n < 0:
            raise ValueError("degree must be non-negative")
        self.space = space
        self.degree = n
        self.family = family
        self.mode = space.mode
        self.budget = space.budget
        self.pi = space.pi_span(n, family)
        self.junk = space.junk_span(n, family)
        for row in self.junk.builder.rows.values():
            if not self.pi.contains(row):
                raise AssertionError("junk image escaped the form image")
        section = EchelonBuilder(order=space._order)
        for p in self.pi.builder.pivots():
            res = self.junk.builder.reduce(self.pi.builder.rows[p])
            if res:
                section.insert(res)
        self.section = section
        self.dim_full = len(section)
        self.quotient_dim = sum(1 for p in section.rows if space.window_rank(p) == 1)
        if self.quotient_dim != self.pi.dim - self.junk.dim:
            raise AssertionError("windowed quotient dimension is inconsistent")

    # classes ------------------------------------------------------------------
    def class_pivots(self) -> list:
        return self.section.pivots()

    def window_pivots(self) -> list:
        s = self.space
        return [p for p in self.section.pivots() if s.window_rank(p) == 1]

    def residual(self, vec: Mapping) -> dict:
        return self.junk.builder.reduce(vec)

    def class_coords(self, vec: Mapping) -> dict:
        """Coordinates of the class of ``vec`` (which must lie in the form image) on the section pivots."""
        if not self.pi.contains(vec):
            raise ValueError("vector is not in the image of forms at this truncation")
        res = self.residual(vec)
        rows = self.section.rows
        return {p: res[p] for p in rows if p in res}

    def is_zero_class(self, vec: Mapping) -> bool:
        return not self.residual(vec)

    def in_window(self, vec: Mapping) -> bool:
        return all(self.space.window_rank(k) == 1 for k in vec)

    def basis_vectors(self) -> list[dict]:
        """Canonical section: one representative per windowed class, in pivot order."""
        return [self.section.rows[p] for p in self.window_pivots()]

    def subspaces(self) -> tuple[Subspace, Subspace, list]:
        frame = sorted({k for r in self.pi.window_rows() for k in r})
        return self.pi.subspace(frame), self.junk.subspace(frame), frame

    def summary(self) -> dict:
        return {
            "degree": self.degree,
            "family": self.family,
            "mode": self.mode,
            "budget": self.budget,
            "pi_dim": self.pi.dim,
            "junk_dim": self.junk.dim,
            "quotient_dim": self.quotient_dim,
            "pi_dim_full": self.pi.dim_full,
            "junk_dim_full": self.junk.dim_full,
            "quotient_dim_full": self.dim_full,
        }

    def to_json(self, one_based: bool = False) -> dict:
        layer = self.space.layer
        basis = []
        for row in self.basis_vectors():
            basis.append([[layer.render_key(k, one_based), row[k].to_json()] for k in sorted(row)])
        words = [list(w) for w, v, _ in self.pi.originals if self.in_window(v)]
        out = self.summary()
        out["basis"] = basis
        out["preimage_words"] = words
        return out


# ---------------------------------------------------------------------------
# differential


def induced_differential(lower: OmegaSpace, upper: OmegaSpace, vec: Mapping) -> dict:
    """Image under the induced differential of the class of ``vec``, as a representative in degree n+1.

    ``vec`` is written in the stored word preimages of the lower form image;
    d of each word b_{i0} db_{i1}... is evaluated as [D, b_{i0}] [D, b_{i1}] ...
    """
    if upper.degree != lower.degree + 1 or upper.space is not lower.space:
        raise ValueError("differential needs consecutive degrees of one form space")
    space = lower.space
    coeffs = lower.pi.preimage(vec)
    out: dict = {}
    for j, c in coeffs.items():
        word, _, tail = lower.pi.originals[j]
        if word[0] == 0:
            continue
        sparse_add(out, space.mul(space.comms[word[0]], tail), c)
    return out


def check_well_defined(lower: OmegaSpace, upper: OmegaSpace) -> None:
    """The induced differential must send junk of degree n into junk of degree n+1."""
    for p, row in lower.junk.builder.rows.items():
        image = induced_differential(lower, upper, row)
        if not upper.is_zero_class(image):
            raise NotWellDefined(
                f"junk vector with pivot {lower.space.layer.render_key(p)} maps outside junk; raise the budget"
            )


# ---------------------------------------------------------------------------
# module-level API


_SPACES: dict = {}


def form_space(t: TripleDescriptor, budget: int, mode: str | None = None) -> FormSpace:
    """Memoised :class:`FormSpace` for a triple, budget and mode."""
    mode = mode or t.default_mode
    key = (t.descriptor(), budget, mode)
    hit = _SPACES.get(key)
    if hit is None:
        hit = FormSpace(t, budget, mode)
        _SPACES[key] = hit
    return hit


def clear_cache() -> None:
    _SPACES.clear()


def pi_eval(t: TripleDescriptor, w: FormExpr, budget: int, mode: str | None = None) -> dict:
    """Coordinates of pi(w); raises WindowOverflow when the image leaves the window."""
    space = form_space(t, budget, mode)
    return coords(space.pi_operator(w), space.mode)


def universal_product(space: FormSpace, x: FormExpr, y: FormExpr) -> FormExpr:
    """Graded product of the reduced universal algebra, re-expanded in the spanning set."""
    out: dict = {}
    for xw, xc in x.terms.items():
        for yw, yc in y.terms.items():
            head = _mul_right(space, xw, yw[0])
            tail = yw[1:]
            for w, c in head.items():
                sparse_add(out, {w + tail: c * xc * yc})
    return FormExpr(x.degree + y.degree, out)


def _mul_right(space: FormSpace, word: tuple, b: int) -> dict:
    """(b_{w0} db_{w1} ... db_{wm}) b_b as {word: coefficient}."""
    key = ("mr", word, b)
    hit = space._mulcache.get(key)
    if hit is not None:
        return hit
    if len(word) == 1:
        hit = {(i,): c for i, c in space.product_indices(word[0], b).items()}
    else:
        prefix, last = word[:-1], word[-1]
        hit = {}
        # (W' da) b = W' d(ab) - (W' a) db
        for i, c in space.product_indices(last, b).items():
            if i != 0:
                sparse_add(hit, {prefix + (i,): c})
        if b != 0:
            for w, c in _mul_right(space, prefix, last).items():
                sparse_add(hit, {w + (b,): -c})
    space._mulcache[key] = hit
    return hit


def omega_span(t: TripleDescriptor, n: int, budget: int, mode: str | None = None, family: str = FULL):
    return form_space(t, budget, mode).pi_span(n, family)


def junk_span(t: TripleDescriptor, n: int, budget: int, mode: str | None = None, family: str = FULL):
    if n < 1:
        raise ValueError("junk is defined from degree 1 on")
    return form_space(t, budget, mode).junk_span(n, family)


def omega_d(t: TripleDescriptor, n: int, budget: int, mode: str | None = None, family: str = FULL) -> OmegaSpace:
    return form_space(t, budget, mode).omega(n, family)


def stabilize(t: TripleDescriptor, n: int, mode: str | None = None, max_budget: int = 4,
              family: str = FULL, oracle=None) -> tuple[list, bool]:
    """Quotient dims for budgets 2..max_budget; stable when the last two agree (and match ``oracle``)."""
    if max_budget < 2:
        raise ValueError("max_budget must be at least 2")
    dims = []
    for p in range(2, max_budget + 1):
        dims.append(omega_d(t, n, p, mode, family).quotient_dim)
    stable = len(dims) >= 2 and dims[-1] == dims[-2]
    if oracle is not None:
        stable = stable and all(d == oracle(p) for d, p in zip(dims, range(2, max_budget + 1)))
    return dims, stable


# ---------------------------------------------------------------------------
# explicit witnesses


def _require_toeplitz(t: TripleDescriptor):
    if t.kind != "qds" or t.inner.kind != "point":
        raise ValueError("witnesses live on the suspension of the point")


def matrix_zeta(space: FormSpace, n: int) -> FormExpr:
    """Degree-n form in the kernel of pi built from matrix units; its differential is nonzero.

    Matrix units are written with 1-based indices below, e(i, j) being the
    spanning element e[i-1, j-1].
    """
    from .oper import CutoffTooSmall

    if n < 1:
        raise ValueError("matrix witnesses start in degree 1")
    m = space.layer.cutoff
    top = 3 if n <= 2 else (4 if n == 3 else n + 1)
    if m < top:
        raise CutoffTooSmall(f"degree {n} witness needs cutoff at least {top}, got {m}")

    def e(i, j):
        return space.index_of(f"1(x)e[{i - 1},{j - 1}]")

    def dform(i, j, c):
        return FormExpr.word(0, e(i, j), coeff=c)

    q = as_scalar
    if n <= 3:
        core = FormExpr.word(e(2, 3), e(3, 1), coeff=q(1) / q(2)) - FormExpr.word(e(2, 2), e(2, 1))
    else:
        core = FormExpr.word(e(2, n + 1), e(n + 1, 1), coeff=q(1) / q(n)) - FormExpr.word(e(2, 2), e(2, 1))
    form = core
    if n >= 2:
        form = universal_product(space, form, dform(1, 4, -q(1) / q(3)))
    if n == 3:
        form = universal_product(space, form, dform(4, 2, q(1) / q(2)))
    if n >= 4:
        for j in range(4, n + 1):
            form = universal_product(space, form, dform(j, j + 1, -ONE))
        form = universal_product(space, form, dform(n + 1, 2, q(1) / q(n - 1)))
    if form.degree != n:
        raise AssertionError("witness has the wrong degree")
    return form


def circle_omega(space: FormSpace, n: int, xi: str = "adjoint") -> FormExpr:
    """Degree-n Laurent form with zero image modulo compacts and a scalar differential.

    ``xi`` selects which shift plays the role of the variable with
    [N, xi] = +xi: ``"adjoint"`` takes l* (the literal identity under
    l e_k = e_{k-1}); ``"shift"`` takes l, which flips the sign of the
    even-degree values.
    """
    if n < 1:
        raise ValueError("circle witnesses start in degree 1")
    if xi == "adjoint":
        x, y, x2, y2 = (space.index_of(s) for s in ("l*^1", "l^1", "l*^2", "l^2"))
    elif xi == "shift":
        x, y, x2, y2 = (space.index_of(s) for s in ("l^1", "l*^1", "l^2", "l*^2"))
    else:
        raise ValueError("xi must be 'adjoint' or 'shift'")
    pair = FormExpr.word(0, x, y)

    def power(form, r):
        for _ in range(r):
            form = universal_product(space, form, pair)
        return form

    if n == 1:
        return FormExpr.word(x, y) + FormExpr.word(y, x)
    if n % 2:
        r = (n - 1) // 2
        return power(FormExpr.word(x, y), r) + power(FormExpr.word(y, x), r)
    r = (n - 2) // 2
    return power(FormExpr.word(x2, y, y, coeff=-ONE), r) + power(FormExpr.word(y2, x, x), r)


def expected_circle_value(n: int) -> int:
    """Scalar value of pi(d omega) for the Laurent witness of degree n."""
    if n == 1:
        return -2
    if n % 2:
        return -2 * (-1) ** ((n - 1) // 2)
    return -4 * (-1) ** ((n - 2) // 2)


def witness_suite(t: TripleDescriptor, family: str, n: int, xi: str = "adjoint") -> dict:
    """Build a witness, confirm it lies in ker pi, and return pi of its differential."""
    _require_toeplitz(t)
    if family == "matrix_zeta":
        space = form_space(t, 1, BOUNDED)
        w = matrix_zeta(space, n)
        pi_w = space.pi_terms(w)
        pi_dw = space.pi_terms(universal_d(w))
        op = Operator(space.layer, pi_dw)
        return {"family": family, "degree": n, "mode": BOUNDED, "pi_zero": not pi_w,
                "d_nonzero": bool(pi_dw), "value": op.pretty(one_based=True), "terms": pi_dw}
    if family == "circle_omega":
        space = form_space(t, 1, CALKIN)
        w = circle_omega(space, n, xi)
        pi_w = space.pi_terms(w)
        pi_dw = space.pi_terms(universal_d(w))
        unit = space.layer.unit_key
        scalar = set(pi_dw) <= {unit}
        value = pi_dw.get(unit, ZERO) if scalar else None
        bounded = form_space(t, 1, BOUNDED)
        bounded_dw = Operator(bounded.layer, bounded.pi_terms(universal_d(w)))
        return {"family": family, "degree": n, "mode": CALKIN, "pi_zero": not pi_w,
                "d_nonzero": bool(pi_dw), "scalar": scalar, "value": value,
                "bounded_value": bounded_dw.pretty(one_based=True), "terms": pi_dw}
    raise ValueError(f"unknown witness family {family!r}")


# ---------------------------------------------------------------------------
# structural checks on suspensions


def _window_span(space: FormSpace, vectors: Iterable[Mapping]) -> EchelonBuilder:
    eb = EchelonBuilder(order=space._order)
    for v in vectors:
        if v:
            eb.insert(v)
    return eb


def _window_rows(space: FormSpace, eb: EchelonBuilder) -> list[dict]:
    return [eb.rows[p] for p in eb.pivots() if space.window_rank(p) == 1]


def _rank(space: FormSpace, vectors: Iterable[Mapping]) -> int:
    eb = EchelonBuilder()
    n = 0
    for v in vectors:
        if v and eb.insert(v):
            n += 1
    return n


def _lift_matrix_units(terms: Mapping, m: int) -> list[dict]:
    return [{("e", p, q, k): c for k, c in terms.items()} for p in range(m) for q in range(m)]


def _apply_sign(layer, terms: Mapping, times: int) -> dict:
    for _ in range(times):
        terms = layer.f_left_terms(terms)
    return dict(terms)


def verify_decomposition(t: TripleDescriptor, n: int, budget: int, mode: str | None = None) -> dict:
    """Split the degree-n form image of a suspension into matrix and Laurent parts.

    Checks, inside the coordinate window: the image of all forms is the sum of
    the image of forms over A (x) S and the band lift of the Laurent image;
    the two pieces meet in zero; and the image over A (x) S equals
    sum_r F^r pi(Omega^{n-r}(A)) (x) S.
    """
    if t.kind != "qds":
        raise ValueError("decomposition needs a suspension triple")
    space = form_space(t, budget, mode)
    layer = space.layer
    m = layer.cutoff
    whole = _window_rows(space, space.pi_span(n, FULL).builder)
    matrix_part = _window_rows(space, space.pi_span(n, "finite").builder)
    laurent_rows = space.pi_span(n, "laurent").builder.rows.values()
    band = _window_span(space, ({k: v for k, v in r.items() if k[0] == "l"} for r in laurent_rows))
    band_rows = _window_rows(space, band)
    dim_whole, dim_s, dim_l = len(whole), len(matrix_part), len(band_rows)
    joint = _rank(space, matrix_part + band_rows)
    whole_eb = space.pi_span(n, FULL).builder
    contained = all(whole_eb.contains(r) for r in matrix_part + band_rows)
    # graded decomposition of the matrix part through the base calculus
    base = form_space(t.inner, budget, space.mode)
    graded = []
    for r in range(n + 1):
        for row in base.pi_span(n - r, FULL).builder.rows.values():
            graded.extend(space._reduce_mode(v) for v in
                          _lift_matrix_units(_apply_sign(t.inner.layer, row, r), m))
    graded_rows = _window_rows(space, _window_span(space, graded))
    s_eb = _window_span(space, matrix_part)
    graded_equal = len(graded_rows) == dim_s and all(s_eb.contains(v) for v in graded_rows)
    return {
        "degree": n,
        "mode": space.mode,
        "dim_total": dim_whole,
        "dim_matrix_part": dim_s,
        "dim_laurent_part": dim_l,
        "sum_equal": contained and joint == dim_whole,
        "direct": joint == dim_s + dim_l,
        "intersection_dim": dim_s + dim_l - joint,
        "graded_dim": len(graded_rows),
        "graded_equal": graded_equal,
        "quotient_dim_total": space.omega(n, FULL).quotient_dim,
        "laurent_quotient_rank": _class_rank(space.omega(n, FULL), band_rows),
        "notes": ["coordinate projections stand in for linear functionals on B(H)"],
    }


def _class_rank(omega: OmegaSpace, vectors: Sequence[Mapping]) -> int:
    return _rank(omega.space, [omega.residual(v) for v in vectors])


def verify_qds_theorem(t_base: TripleDescriptor, n: int, cutoff: int, budget: int,
                       mode: str | None = None) -> dict:
    """Dimension identities, section maps and differentials for one suspension."""
    from .oper import number_commutator_matrix, LaurentPoly
    from .triple import qds_of

    t = qds_of(t_base, cutoff)
    mode = mode or t.default_mode
    space = form_space(t, budget, mode)
    base = form_space(t_base, budget, mode)
    layer = space.layer
    inner = t_base.layer
    m = cutoff
    span_size = len(space.basis)
    base_dim = base.omega(n).quotient_dim
    qds_dim = space.omega(n).quotient_dim
    expected = base_dim * m * m + (span_size if n == 1 else 0)
    report = {
        "degree": n, "cutoff": m, "budget": budget, "mode": mode,
        "base_dim": base_dim, "qds_dim": qds_dim, "span_size": span_size,
        "expected_dim": expected, "dim_identity": qds_dim == expected,
    }
    if n != 1:
        return report
    omega1 = space.omega(1)
    omega0 = space.omega(0)
    omega2 = space.omega(2)
    # section maps: base classes tensor matrix units, and F times the algebra
    phi = []
    for row in base.omega(1).basis_vectors():
        phi.extend(_lift_matrix_units(row, m))
    iota = [space._reduce_mode(layer.f_left_terms(e)) for e in space.elems]
    images = phi + iota
    in_image = all(omega1.pi.contains(v) and omega1.in_window(v) for v in images)
    rank = _class_rank(omega1, images) if in_image else -1
    report["section_images"] = len(images)
    report["section_rank"] = rank
    report["section_bijective"] = in_image and rank == len(images) == omega1.quotient_dim
    # degree-zero differential against the explicit formula
    formula_ok = True
    for el, vec in zip(space.basis, space.elems):
        lhs = induced_differential(omega0, omega1, vec)
        op = el.op
        if el.tag == FINITE:
            _, p, q, _ = next(iter(op.terms))
            coeff = {k[3]: c for k, c in op.terms.items()}
            rhs = {("e", p, q, k): c for k, c in inner.comm_terms(coeff).items()}
            for (pp, qq), s in number_commutator_matrix({(p, q): ONE}).items():
                for k, c in inner.f_left_terms(coeff).items():
                    sparse_add(rhs, {("e", pp, qq, k): c * s})
        else:
            degree = next(iter(op.terms))[1]
            symbol = LaurentPoly({degree: ONE}).derivative()
            band = {("l", d, k): c * v for d, c in symbol.coeffs.items()
                    for k, v in inner.identity().terms.items()}
            rhs = layer.f_left_terms(band)
        rhs = space._reduce_mode(rhs)
        if omega1.residual(lhs) != omega1.residual(rhs):
            formula_ok = False
    report["delta0_formula"] = formula_ok
    # the first differential kills F times the algebra, and differentials compose to zero
    check_well_defined(omega1, omega2)
    kills = all(omega2.is_zero_class(induced_differential(omega1, omega2, v)) for v in iota)
    chain = all(
        omega2.is_zero_class(induced_differential(omega1, omega2, induced_differential(omega0, omega1, v)))
        for v in space.elems
    )
    report["delta1_kills_algebra"] = kills
    report["chain_property"] = chain
    return report


def verify_corollary(t_base: TripleDescriptor, cutoffs: Sequence[int], budget: int,
                     mode: str | None = None) -> dict:
    """Two suspensions: the top degree vanishes and degree one splits into three pieces.

    The three pieces are base classes (x) S (x) S, F (Sigma^2 A) (x) S and
    F (Sigma^4 A); the check records each rank, the rank of their union and
    the quotient dimension.
    """
    from .triple import qds_of

    m1, m2 = cutoffs
    t2 = qds_of(t_base, m1)
    t4 = qds_of(t2, m2)
    mode = mode or t4.default_mode
    space4 = form_space(t4, budget, mode)
    space2 = form_space(t2, budget, mode)
    base = form_space(t_base, budget, mode)
    omega1 = space4.omega(1)
    first = []
    for row in base.omega(1).basis_vectors():
        for v in _lift_matrix_units(row, m1):
            first.extend(_lift_matrix_units(v, m2))
    second = []
    for e in space2.elems:
        second.extend(_lift_matrix_units(space2._reduce_mode(t2.layer.f_left_terms(e)), m2))
    third = [space4._reduce_mode(t4.layer.f_left_terms(e)) for e in space4.elems]
    pieces = [first, second, third]
    ranks = [_class_rank(omega1, p) for p in pieces]
    union = _class_rank(omega1, first + second + third)
    predicted = base.omega(1).quotient_dim * (m1 * m1) * (m2 * m2) + len(space2.elems) * m2 * m2 + len(space4.elems)
    top_dim = space4.omega(2).quotient_dim
    base_top = base.omega(2).quotient_dim
    return {
        "cutoffs": [m1, m2], "budget": budget, "mode": mode,
        "omega2_dim": top_dim, "omega2_expected": base_top * (m1 * m1) * (m2 * m2),
        "omega2_ok": top_dim == base_top * (m1 * m1) * (m2 * m2),
        "omega1_dim": omega1.quotient_dim, "predicted_omega1_dim": predicted,
        "piece_ranks": ranks, "union_rank": union,
        "pieces_direct": union == sum(ranks) and all(r == len(p) for r, p in zip(ranks, pieces)),
        "pieces_span": union == omega1.quotient_dim,
        "overlap_dim": sum(ranks) - union,
        "splitting_ok": union == sum(ranks) == omega1.quotient_dim == predicted,
    }


def verify_doubling(t: TripleDescriptor, budget: int, degrees: Sequence[int] = (0, 1, 2),
                    mode: str | None = None) -> dict:
    """Quotient dimensions agree for a triple and its Pauli double."""
    from .triple import doubled, check_conditions

    td = doubled(t)
    mode = mode or t.default_mode
    plain = [omega_d(t, n, budget, mode).quotient_dim for n in degrees]
    double = [omega_d(td, n, budget, mode).quotient_dim for n in degrees]
    cond = check_conditions(td, budget)
    return {"degrees": list(degrees), "dims": plain, "doubled_dims": double,
            "dims_equal": plain == double, "f_intersection_trivial": cond.f_intersection_trivial}
