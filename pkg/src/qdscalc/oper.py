"""Layered exact operators: point, circle, quantum double suspension and Pauli doubling.

An operator is a finite linear combination of *basis keys*, one key space per
layer:

* point layer: the single key ``()`` (the identity of C).
* circle layer on l2(Z) with D = diag(n) and F = sign(D):
  ``("z", k, f)`` is multiplication by e^{ik theta} followed by F^f, and
  ``("E", m, n)`` is the matrix unit sending the Fourier mode n to m.
* suspension layer on H (x) l2(N): ``("e", p, q, x)`` is x (x) e_pq and
  ``("l", d, x)`` is x (x) l^d, where a negative degree d stands for the
  adjoint shift (l*)^{|d|}.  The shift lowers indices: l e_n = e_{n-1}.
* doubled layer on H (x) C^2: ``("P", a, b, x)`` is x (x) E_ab.

Products of basis keys are finite and memoised per layer, so an operator
never has to be materialised as a matrix.  Corrections such as
l* l = 1 - e_00 or F z - z F (a finite matrix on the circle) appear as
ordinary finite-part keys.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Mapping

from .exact import ONE, ZERO, I_UNIT, Scalar, as_scalar, sparse_add

__all__ = [
    "LayerMismatch",
    "WindowOverflow",
    "CutoffTooSmall",
    "UnboundedCommutator",
    "Layer",
    "PointLayer",
    "CircleLayer",
    "QdsLayer",
    "DoubledLayer",
    "point",
    "circle",
    "qds_lift",
    "pauli_double",
    "layer_from_descriptor",
    "Operator",
    "LaurentPoly",
    "op_mul",
    "commutator_D",
    "mul_F",
    "is_compact",
    "coords",
    "sign",
]

BOUNDED = "bounded"
CALKIN = "calkin"
MODES = (BOUNDED, CALKIN)

TWO = as_scalar(2)
HALF = ONE / TWO


class LayerMismatch(ValueError):
    """Operands belong to different layers."""


class WindowOverflow(ValueError):
    """An operator has support outside the coordinate window of its layer."""


class CutoffTooSmall(ValueError):
    """A suspension cutoff or witness index exceeds the allowed truncation."""


class UnboundedCommutator(ValueError):
    """The commutator with D would leave the bounded operators."""


def sign(n: int) -> int:
    """Sign with the convention sign(0) = +1."""
    return 1 if n >= 0 else -1


def _mul_terms(layer: "Layer", a: Mapping, b: Mapping, table) -> dict:
    acc: dict = {}
    get = acc.get
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            prod = table(k1, k2)
            if not prod:
                continue
            c = c1 * c2
            for k, x in prod:
                v = c if x is None else c * x
                old = get(k)
                acc[k] = v if old is None else old + v
    return {k: v for k, v in acc.items() if v}


class Layer:
    """Common machinery; subclasses provide the key-level rules."""

    kind = "abstract"

    def __init__(self):
        self._mul_cache: dict = {}
        self._qmul_cache: dict = {}
        self._comm_cache: dict = {}
        self._fl_cache: dict = {}
        self._fr_cache: dict = {}
        self._adj_cache: dict = {}
        self._compact_cache: dict = {}

    # identity ---------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Layer) and self.descriptor() == other.descriptor()

    def __hash__(self):
        return hash(self.descriptor())

    def __repr__(self):
        return f"{type(self).__name__}{self.descriptor()[1:]}"

    def descriptor(self) -> tuple:
        raise NotImplementedError

    # key-level rules (overridden) ---------------------------------------
    unit_key: object = None

    def _mul(self, k1, k2) -> tuple:
        raise NotImplementedError

    def _comm(self, key) -> dict:
        raise NotImplementedError

    def _f_left(self, key) -> dict:
        raise NotImplementedError

    def _f_right(self, key) -> dict:
        raise NotImplementedError

    def _adjoint(self, key) -> dict:
        raise NotImplementedError

    def _compact(self, key) -> bool:
        raise NotImplementedError

    def in_window(self, key) -> bool:
        raise NotImplementedError

    def has_dirac(self) -> bool:
        """False only when D vanishes identically on this layer."""
        return True

    # memoised wrappers --------------------------------------------------
    def mul_keys(self, k1, k2) -> tuple:
        try:
            return self._mul_cache[(k1, k2)]
        except KeyError:
            res = self._mul(k1, k2)
            self._mul_cache[(k1, k2)] = res
            return res

    def mul_keys_calkin(self, k1, k2) -> tuple:
        """Product followed by dropping compact keys (the Calkin quotient)."""
        try:
            return self._qmul_cache[(k1, k2)]
        except KeyError:
            res = tuple((k, x) for k, x in self.mul_keys(k1, k2) if not self.is_compact_key(k))
            self._qmul_cache[(k1, k2)] = res
            return res

    def is_compact_key(self, key) -> bool:
        try:
            return self._compact_cache[key]
        except KeyError:
            res = self._compact(key)
            self._compact_cache[key] = res
            return res

    def _cached(self, cache, fn, key):
        try:
            return cache[key]
        except KeyError:
            res = fn(key)
            cache[key] = res
            return res

    # operator-level rules -------------------------------------------------
    def mul_terms(self, a: Mapping, b: Mapping, mode: str = BOUNDED) -> dict:
        table = self.mul_keys if mode == BOUNDED else self.mul_keys_calkin
        return _mul_terms(self, a, b, table)

    def comm_terms(self, terms: Mapping) -> dict:
        """Coefficients of [D, x] for x given by ``terms``."""
        out: dict = {}
        for key, c in terms.items():
            sparse_add(out, self._cached(self._comm_cache, self._comm, key), c)
        return out

    def f_left_terms(self, terms: Mapping) -> dict:
        out: dict = {}
        for key, c in terms.items():
            sparse_add(out, self._cached(self._fl_cache, self._f_left, key), c)
        return out

    def f_right_terms(self, terms: Mapping) -> dict:
        out: dict = {}
        for key, c in terms.items():
            sparse_add(out, self._cached(self._fr_cache, self._f_right, key), c)
        return out

    def adjoint_terms(self, terms: Mapping) -> dict:
        out: dict = {}
        for key, c in terms.items():
            sparse_add(out, self._cached(self._adj_cache, self._adjoint, key), c.conjugate())
        return out

    def calkin_terms(self, terms: Mapping) -> dict:
        return {k: v for k, v in terms.items() if not self.is_compact_key(k)}

    # constructors -----------------------------------------------------------
    def identity_terms(self) -> dict:
        """Terms of the identity; a single key except on doubled layers."""
        return {self.unit_key: ONE}

    def identity(self) -> "Operator":
        return Operator(self, self.identity_terms())

    def zero(self) -> "Operator":
        return Operator(self, {})

    def sign_operator(self) -> "Operator":
        return Operator(self, self.f_left_terms(self.identity_terms()))

    def render_key(self, key, one_based: bool = False) -> str:
        return str(key)


# ---------------------------------------------------------------------------
# point


class PointLayer(Layer):
    """The one-dimensional Hilbert space C with D = 0 and F = sign(0) = 1."""

    kind = "point"
    unit_key = ()

    def descriptor(self):
        return ("point",)

    def _mul(self, k1, k2):
        return (((), None),)

    def _comm(self, key):
        return {}

    def _f_left(self, key):
        return {(): ONE}

    _f_right = _f_left

    def _adjoint(self, key):
        return {(): ONE}

    def _compact(self, key):
        # every operator on a finite-dimensional space is compact
        return True

    def in_window(self, key):
        return True

    def has_dirac(self):
        return False

    def render_key(self, key, one_based=False):
        return "1"


# ---------------------------------------------------------------------------
# circle


class CircleLayer(Layer):
    """Trigonometric polynomials on l2(Z) with D = diag(n), F = sign(D).

    ``window`` bounds the Fourier degrees accepted by :func:`coords`;
    ``gen_degree`` g makes e^{+-ij theta} (1 <= j <= g) the generators.
    """

    kind = "circle"
    unit_key = ("z", 0, 0)

    def __init__(self, window: int, gen_degree: int = 1):
        if window < 1 or gen_degree < 1:
            raise ValueError("circle window and generator degree must be positive")
        super().__init__()
        self.window = window
        self.gen_degree = gen_degree

    def descriptor(self):
        return ("circle", self.window, self.gen_degree)

    @staticmethod
    def sign_correction(k: int) -> dict:
        """Finite matrix F z^k - z^k F."""
        out = {}
        if k > 0:
            for n in range(-k, 0):
                out[("E", n + k, n)] = TWO
        elif k < 0:
            for n in range(0, -k):
                out[("E", n + k, n)] = -TWO
        return out

    def _mul(self, k1, k2):
        if k1[0] == "z":
            _, k, f = k1
            if k2[0] == "z":
                _, j, g = k2
                out = {("z", k + j, (f + g) % 2): ONE}
                if f:
                    # z^k F z^j F^g = z^{k+j} F^{1+g} + z^k C_j F^g
                    for (_, m, n), c in self.sign_correction(j).items():
                        sparse_add(out, {("E", m + k, n): c * (sign(n) if g else 1)})
                return tuple((key, None if c == ONE else c) for key, c in out.items())
            _, m, n = k2
            c = sign(m) if f else 1
            return ((("E", m + k, n), None if c == 1 else as_scalar(c)),)
        _, m, n = k1
        if k2[0] == "z":
            _, k, f = k2
            c = sign(n - k) if f else 1
            return ((("E", m, n - k), None if c == 1 else as_scalar(c)),)
        _, p, q = k2
        return (((("E", m, q), None),) if n == p else ())

    def _comm(self, key):
        if key[0] == "z":
            return {key: as_scalar(key[1])} if key[1] else {}
        diff = key[1] - key[2]
        return {key: as_scalar(diff)} if diff else {}

    def _f_left(self, key):
        if key[0] == "z":
            _, k, f = key
            out = {("z", k, 1 - f): ONE}
            for (_, m, n), c in self.sign_correction(k).items():
                sparse_add(out, {("E", m, n): c * (sign(n) if f else 1)})
            return out
        return {key: as_scalar(sign(key[1]))}

    def _f_right(self, key):
        if key[0] == "z":
            return {("z", key[1], 1 - key[2]): ONE}
        return {key: as_scalar(sign(key[2]))}

    def _adjoint(self, key):
        if key[0] == "z":
            _, k, f = key
            out = {("z", -k, f): ONE}
            if f:
                sparse_add(out, self.sign_correction(-k))
            return out
        return {("E", key[2], key[1]): ONE}

    def _compact(self, key):
        return key[0] == "E"

    def in_window(self, key):
        if key[0] == "z":
            return abs(key[1]) <= self.window
        return abs(key[1]) <= self.window and abs(key[2]) <= self.window

    def render_key(self, key, one_based=False):
        if key[0] == "z":
            base = "1" if key[1] == 0 else f"z^{key[1]}"
            return base + ("F" if key[2] else "")
        return f"E[{key[1]},{key[2]}]"


# ---------------------------------------------------------------------------
# quantum double suspension


def _shift_product(a: int, b: int) -> list:
    """l^a l^b for signed degrees as [(key-part, coefficient)] on l2(N)."""
    out = [(("l", a + b), ONE)]
    if a < 0 < b:
        c = -a
        count = min(b, c)
        dr, dc = max(c - b, 0), max(b - c, 0)
        out.extend((("e", k + dr, k + dc), -ONE) for k in range(count))
    return out


class QdsLayer(Layer):
    """H (x) l2(N) with D' = D (x) 1 + F (x) N and F' = F (x) 1."""

    kind = "qds"

    def __init__(self, inner: Layer, cutoff: int):
        if cutoff < 2:
            raise CutoffTooSmall(f"suspension cutoff must be at least 2, got {cutoff}")
        super().__init__()
        self.inner = inner
        self.cutoff = cutoff
        self.unit_key = None if inner.unit_key is None else ("l", 0, inner.unit_key)

    def identity_terms(self):
        return {("l", 0, k): c for k, c in self.inner.identity_terms().items()}

    def descriptor(self):
        return ("qds", self.inner.descriptor(), self.cutoff)

    def has_dirac(self):
        return True

    def _mul(self, k1, k2):
        inner = self.inner
        if k1[0] == "e":
            _, p, q, x = k1
            if k2[0] == "e":
                _, r, s, y = k2
                if q != r:
                    return ()
                head = ("e", p, s)
            else:
                _, d, y = k2
                if q + d < 0:
                    return ()
                head = ("e", p, q + d)
            return tuple((head + (k,), c) for k, c in inner.mul_keys(x, y))
        _, d, x = k1
        if k2[0] == "e":
            _, p, q, y = k2
            if p - d < 0:
                return ()
            head = ("e", p - d, q)
            return tuple((head + (k,), c) for k, c in inner.mul_keys(x, y))
        _, b, y = k2
        inner_prod = inner.mul_keys(x, y)
        acc: dict = {}
        for head, hc in _shift_product(d, b):
            for k, c in inner_prod:
                v = hc if c is None else hc * c
                sparse_add(acc, {head + (k,): v})
        return tuple((k, None if v == ONE else v) for k, v in acc.items())

    def _comm(self, key):
        inner = self.inner
        out: dict = {}
        if key[0] == "e":
            _, p, q, x = key
            for k, c in inner.comm_terms({x: ONE}).items():
                sparse_add(out, {("e", p, q, k): c})
            if p:
                for k, c in inner.f_left_terms({x: ONE}).items():
                    sparse_add(out, {("e", p, q, k): c * p})
            if q:
                for k, c in inner.f_right_terms({x: ONE}).items():
                    sparse_add(out, {("e", p, q, k): -c * q})
            return out
        raise AssertionError("band keys are handled at operator level")

    def comm_terms(self, terms):
        inner = self.inner
        out: dict = {}
        band: dict = defaultdict(dict)
        blocks: dict = defaultdict(dict)
        for key, c in terms.items():
            if key[0] == "e":
                blocks[(key[1], key[2])][key[3]] = c
            else:
                band[key[1]][key[2]] = c
        for (p, q), coeff in blocks.items():
            # the inner coefficient is passed whole: single keys of a doubled
            # identity have unbounded commutators that cancel only in the sum
            if len(coeff) == 1:
                (x, c), = coeff.items()
                sparse_add(out, self._cached(self._comm_cache, self._comm, ("e", p, q, x)), c)
                continue
            for k, c in inner.comm_terms(coeff).items():
                sparse_add(out, {("e", p, q, k): c})
            if p:
                for k, c in inner.f_left_terms(coeff).items():
                    sparse_add(out, {("e", p, q, k): c * p})
            if q:
                for k, c in inner.f_right_terms(coeff).items():
                    sparse_add(out, {("e", p, q, k): -c * q})
        for d, coeff in band.items():
            if inner.f_left_terms(coeff) != inner.f_right_terms(coeff):
                raise UnboundedCommutator(
                    "band coefficient does not commute with the inner sign operator"
                )
            for k, c in inner.comm_terms(coeff).items():
                sparse_add(out, {("l", d, k): c})
            if d:
                for k, c in inner.f_left_terms(coeff).items():
                    sparse_add(out, {("l", d, k): -c * d})
        return out

    def _f_left(self, key):
        inner = self.inner
        x = key[-1]
        head = key[:-1]
        return {head + (k,): c for k, c in inner.f_left_terms({x: ONE}).items()}

    def _f_right(self, key):
        inner = self.inner
        x = key[-1]
        head = key[:-1]
        return {head + (k,): c for k, c in inner.f_right_terms({x: ONE}).items()}

    def _adjoint(self, key):
        inner = self.inner
        if key[0] == "e":
            _, p, q, x = key
            head = ("e", q, p)
        else:
            _, d, x = key
            head = ("l", -d)
        return {head + (k,): c for k, c in inner.adjoint_terms({x: ONE}).items()}

    def _compact(self, key):
        if key[0] == "e":
            return self.inner.is_compact_key(key[3])
        return False

    def in_window(self, key):
        m = self.cutoff
        if key[0] == "e":
            return key[1] < m and key[2] < m and self.inner.in_window(key[3])
        return abs(key[1]) <= m and self.inner.in_window(key[2])

    def render_key(self, key, one_based=False):
        inner = self.inner.render_key(key[-1], one_based)
        if key[0] == "e":
            off = 1 if one_based else 0
            return f"{inner}(x)e[{key[1] + off},{key[2] + off}]"
        d = key[1]
        shift = "1" if d == 0 else (f"l^{d}" if d > 0 else f"l*^{-d}")
        return f"{inner}(x){shift}"

    # views ------------------------------------------------------------------
    @staticmethod
    def finite_part(op: "Operator") -> dict:
        """(p, q) -> coefficient terms on the inner layer."""
        out: dict = defaultdict(dict)
        for key, c in op.terms.items():
            if key[0] == "e":
                out[(key[1], key[2])][key[3]] = c
        return dict(out)

    @staticmethod
    def band_part(op: "Operator") -> dict:
        """degree -> coefficient terms on the inner layer."""
        out: dict = defaultdict(dict)
        for key, c in op.terms.items():
            if key[0] == "l":
                out[key[1]][key[2]] = c
        return dict(out)


# ---------------------------------------------------------------------------
# Pauli doubling


_SIGMA1_LEFT = {0: 1, 1: 0}


class DoubledLayer(Layer):
    """H (x) C^2 with D~ = D (x) sigma_1, F~ = F (x) sigma_1 and grading 1 (x) sigma_2."""

    kind = "doubled"

    def __init__(self, inner: Layer):
        super().__init__()
        self.inner = inner
        self.unit_key = None  # the identity is x (x) (E_00 + E_11)

    def descriptor(self):
        return ("doubled", self.inner.descriptor())

    def has_dirac(self):
        return self.inner.has_dirac()

    def identity_terms(self):
        return {("P", a, a, k): c for a in (0, 1) for k, c in self.inner.identity_terms().items()}

    def sign_operator(self):
        return Operator(self, self.f_left_terms(self.identity().terms))

    def _mul(self, k1, k2):
        _, a, b, x = k1
        _, c, d, y = k2
        if b != c:
            return ()
        return tuple((("P", a, d, k), v) for k, v in self.inner.mul_keys(x, y))

    def comm_terms(self, terms):
        inner = self.inner
        grouped: dict = defaultdict(dict)
        for (_, a, b, x), c in terms.items():
            grouped[x][(a, b)] = c
        out: dict = {}
        for x, mat in grouped.items():
            plus = {}
            minus_nonzero = False
            for (a, b) in ((0, 0), (0, 1), (1, 0), (1, 1)):
                c1 = mat.get((a, b), ZERO)
                c2 = mat.get((1 - a, 1 - b), ZERO)
                if c1 + c2:
                    plus[(a, b)] = (c1 + c2) * HALF
                if c1 - c2:
                    minus_nonzero = True
            if minus_nonzero and inner.has_dirac():
                raise UnboundedCommutator("doubled commutator needs a sigma_1-commuting matrix part")
            if not plus:
                continue
            dx = inner.comm_terms({x: ONE})
            for (a, b), c in plus.items():
                for k, v in dx.items():
                    sparse_add(out, {("P", _SIGMA1_LEFT[a], b, k): c * v})
        return out

    def _f_left(self, key):
        _, a, b, x = key
        return {("P", 1 - a, b, k): c for k, c in self.inner.f_left_terms({x: ONE}).items()}

    def _f_right(self, key):
        _, a, b, x = key
        return {("P", a, 1 - b, k): c for k, c in self.inner.f_right_terms({x: ONE}).items()}

    def _adjoint(self, key):
        _, a, b, x = key
        return {("P", b, a, k): c for k, c in self.inner.adjoint_terms({x: ONE}).items()}

    def _compact(self, key):
        return self.inner.is_compact_key(key[3])

    def in_window(self, key):
        return self.inner.in_window(key[3])

    def grading(self) -> "Operator":
        one = self.inner.identity_terms()
        out = {("P", 0, 1, k): -I_UNIT * c for k, c in one.items()}
        out.update({("P", 1, 0, k): I_UNIT * c for k, c in one.items()})
        return Operator(self, out)

    def render_key(self, key, one_based=False):
        return f"{self.inner.render_key(key[3], one_based)}(x)E{key[1]}{key[2]}"


# ---------------------------------------------------------------------------
# interned constructors

_LAYERS: dict = {}


def _intern(layer: Layer) -> Layer:
    return _LAYERS.setdefault(layer.descriptor(), layer)


def point() -> PointLayer:
    return _intern(PointLayer())


def circle(window: int, gen_degree: int = 1) -> CircleLayer:
    return _intern(CircleLayer(window, gen_degree))


def qds_lift(layer: Layer, cutoff: int) -> QdsLayer:
    """The suspension layer H (x) l2(N) over ``layer`` at matrix cutoff ``cutoff``."""
    return _intern(QdsLayer(layer, cutoff))


def pauli_double(layer: Layer) -> DoubledLayer:
    return _intern(DoubledLayer(layer))


def layer_from_descriptor(desc) -> Layer:
    kind = desc[0]
    if kind == "point":
        return point()
    if kind == "circle":
        return circle(int(desc[1]), int(desc[2]))
    if kind == "qds":
        return qds_lift(layer_from_descriptor(desc[1]), int(desc[2]))
    if kind == "doubled":
        return pauli_double(layer_from_descriptor(desc[1]))
    raise ValueError(f"unknown layer descriptor {desc!r}")


# ---------------------------------------------------------------------------
# operators


class Operator:
    """Immutable exact operator on a layer."""

    __slots__ = ("layer", "terms")

    def __init__(self, layer: Layer, terms: Mapping | None = None):
        self.layer = layer
        self.terms = {k: as_scalar(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def _raw(cls, layer, terms):
        obj = object.__new__(cls)
        obj.layer = layer
        obj.terms = terms
        return obj

    def _same(self, other: "Operator"):
        if self.layer is not other.layer and self.layer != other.layer:
            raise LayerMismatch(f"{self.layer!r} vs {other.layer!r}")

    def __add__(self, other):
        if not isinstance(other, Operator):
            other = self.layer.identity() * as_scalar(other)
        self._same(other)
        return Operator._raw(self.layer, sparse_add(dict(self.terms), other.terms))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Operator):
            other = self.layer.identity() * as_scalar(other)
        self._same(other)
        return Operator._raw(self.layer, sparse_add(dict(self.terms), other.terms, -ONE))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Operator._raw(self.layer, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Operator):
            return op_mul(self, other)
        c = as_scalar(other)
        if not c:
            return Operator._raw(self.layer, {})
        return Operator._raw(self.layer, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, other):
        c = as_scalar(other)
        if not c:
            return Operator._raw(self.layer, {})
        return Operator._raw(self.layer, {k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return self.layer == other.layer and self.terms == other.terms

    def __hash__(self):
        return hash((self.layer, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Operator({self.pretty()})"

    def pretty(self, one_based: bool = False) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            parts.append(f"({self.terms[k]})*{self.layer.render_key(k, one_based)}")
        return " + ".join(parts)

    def adjoint(self) -> "Operator":
        return Operator._raw(self.layer, self.layer.adjoint_terms(self.terms))

    def calkin(self) -> "Operator":
        return Operator._raw(self.layer, self.layer.calkin_terms(self.terms))

    def to_json(self, one_based: bool = False) -> dict:
        return {
            "layer": list(self.layer.descriptor()),
            "terms": [[_key_json(k), self.terms[k].to_json()] for k in sorted(self.terms)],
        }


def _key_json(key):
    if isinstance(key, tuple):
        return [_key_json(x) for x in key]
    return key


def op_mul(a: Operator, b: Operator, mode: str = BOUNDED) -> Operator:
    a._same(b)
    return Operator._raw(a.layer, a.layer.mul_terms(a.terms, b.terms, mode))


def commutator_D(x: Operator) -> Operator:
    """[D, x] on the layer of ``x``."""
    return Operator._raw(x.layer, x.layer.comm_terms(x.terms))


def mul_F(x: Operator) -> Operator:
    """Left multiplication by the layer's sign operator."""
    return Operator._raw(x.layer, x.layer.f_left_terms(x.terms))


def mul_F_right(x: Operator) -> Operator:
    return Operator._raw(x.layer, x.layer.f_right_terms(x.terms))


def is_compact(x: Operator) -> bool:
    return all(x.layer.is_compact_key(k) for k in x.terms)


def coords(x: Operator, mode: str = BOUNDED) -> dict:
    """Sparse coordinate vector keyed by basis key, in sorted key order.

    In Calkin mode the compact keys are dropped, so the kernel of this map is
    exactly the set of compact operators.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    layer = x.layer
    out = {}
    for k in sorted(x.terms):
        if mode == CALKIN and layer.is_compact_key(k):
            continue
        if not layer.in_window(k):
            raise WindowOverflow(
                f"key {layer.render_key(k)} lies outside the coordinate window; raise the cutoff or window"
            )
        out[k] = x.terms[k]
    return out


# ---------------------------------------------------------------------------
# convenient constructors


def monomial(layer: CircleLayer, k: int) -> Operator:
    """Multiplication by e^{ik theta} on a circle layer."""
    return Operator._raw(layer, {("z", k, 0): ONE})


def lift(x: Operator | Mapping, layer: QdsLayer, p: int, q: int) -> Operator:
    """x (x) e_pq on the suspension layer (0-based indices)."""
    terms = x.terms if isinstance(x, Operator) else x
    return Operator._raw(layer, {("e", p, q, k): c for k, c in terms.items()})


def lift_matrix(x: Operator | Mapping, layer: QdsLayer, matrix: Mapping) -> Operator:
    """x (x) T for a finite matrix given as {(p, q): Scalar}."""
    terms = x.terms if isinstance(x, Operator) else x
    out: dict = {}
    for (p, q), t in matrix.items():
        for k, c in terms.items():
            sparse_add(out, {("e", p, q, k): c * as_scalar(t)})
    return Operator._raw(layer, out)


def elementary(layer: QdsLayer, p: int, q: int, coeff=ONE) -> Operator:
    """coeff * (1 (x) e_pq) with 0-based indices."""
    if not coeff:
        return layer.zero()
    c0 = as_scalar(coeff)
    return Operator._raw(layer, {("e", p, q, k): c0 * c for k, c in layer.inner.identity_terms().items()})


def shift(layer: QdsLayer, degree: int) -> Operator:
    """1 (x) l^degree; negative degree means a power of the adjoint shift."""
    return Operator._raw(layer, {("l", degree, k): c for k, c in layer.inner.identity_terms().items()})


def doubled_scalar_lift(x: Operator, layer: DoubledLayer) -> Operator:
    """x (x) I_2."""
    out = {}
    for k, c in x.terms.items():
        out[("P", 0, 0, k)] = c
        out[("P", 1, 1, k)] = c
    return Operator._raw(layer, out)


def tensor_identity(x: Operator, layer: Layer) -> Operator:
    """Embed an operator of the inner layer as x (x) 1 on a suspension or doubled layer."""
    if isinstance(layer, QdsLayer):
        return Operator._raw(layer, {("l", 0, k): c for k, c in x.terms.items()})
    if isinstance(layer, DoubledLayer):
        return doubled_scalar_lift(x, layer)
    raise LayerMismatch("tensor_identity needs a suspension or doubled layer")


def identity_block(layer: QdsLayer, order: int) -> Operator:
    """Sum of 1 (x) e_pp for p < order: an identity block in the top-left corner."""
    one = layer.inner.identity_terms()
    return Operator._raw(layer, {("e", p, p, k): c for p in range(order) for k, c in one.items()})


def number_commutator_matrix(matrix: Mapping) -> dict:
    """[N, T] for a finite matrix {(p, q): value}: entries (p - q) * T_pq."""
    return {(p, q): as_scalar(v) * (p - q) for (p, q), v in matrix.items() if p != q and v}


class LaurentPoly:
    """Finitely supported Laurent polynomial {degree: Scalar}."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        self.coeffs = {int(d): as_scalar(c) for d, c in (coeffs or {}).items() if as_scalar(c)}

    def __add__(self, other: "LaurentPoly"):
        return LaurentPoly(sparse_add(dict(self.coeffs), other.coeffs))

    def __sub__(self, other: "LaurentPoly"):
        return LaurentPoly(sparse_add(dict(self.coeffs), other.coeffs, -ONE))

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = as_scalar(other)
            return LaurentPoly({d: v * c for d, v in self.coeffs.items()})
        out: dict = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                sparse_add(out, {a + b: x * y})
        return LaurentPoly(out)

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"LaurentPoly({ {d: str(c) for d, c in sorted(self.coeffs.items())} })"

    def derivative(self) -> "LaurentPoly":
        """Symbol of [N, sigma'(f)] under l e_n = e_{n-1}: degree d scales by -d."""
        return LaurentPoly({d: c * (-d) for d, c in self.coeffs.items() if d})

    def to_operator(self, layer: QdsLayer) -> Operator:
        """sigma'(f): degree d >= 0 maps to l^d, degree -d to (l*)^d."""
        one = layer.inner.identity_terms()
        return Operator._raw(layer, {("l", d, k): c * v for d, c in self.coeffs.items() for k, v in one.items()})

    @staticmethod
    def symbol_of(op: Operator) -> "LaurentPoly":
        """Band symbol of an operator on a suspension of the point."""
        layer = op.layer
        if not isinstance(layer, QdsLayer) or layer.inner.kind != "point":
            raise LayerMismatch("scalar symbols exist only on the suspension of the point")
        return LaurentPoly({k[1]: c for k, c in op.terms.items() if k[0] == "l"})
