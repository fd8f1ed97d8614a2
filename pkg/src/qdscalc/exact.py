"""Exact arithmetic over the Gaussian rationals and the linear algebra built on it.

Everything downstream (operator coordinates, spans of differential forms,
quotients by junk) reduces to row reduction over Q(i).  Rationals are
``gmpy2.mpq`` values, which are always kept in lowest terms with a positive
denominator.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from gmpy2 import mpq

__all__ = [
    "Scalar",
    "ZERO",
    "ONE",
    "I_UNIT",
    "as_scalar",
    "ExactMatrix",
    "Subspace",
    "EchelonBuilder",
    "AmbientMismatch",
    "NotASubspace",
    "rref",
    "kernel",
    "subspace_ops",
    "span",
    "sparse_add",
    "sparse_scale",
]

_Q0 = mpq(0)
_Q1 = mpq(1)


class AmbientMismatch(ValueError):
    """Two subspaces live in coordinate spaces of different dimension."""


class NotASubspace(ValueError):
    """A quotient was requested for a pair that is not nested."""


def _to_mpq(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class Scalar:
    """A Gaussian rational ``re + im*i`` with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "Scalar":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Inverse of :meth:`to_json` for the ``"re|im"`` wire form."""
        re, _, im = text.partition("|")
        return cls(mpq(re), mpq(im or "0"))

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if type(other) is not Scalar:
            other = as_scalar(other)
        return Scalar._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not Scalar:
            other = as_scalar(other)
        return Scalar._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __mul__(self, other):
        if type(other) is not Scalar:
            other = as_scalar(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return Scalar._raw(a * c, _Q0)
        return Scalar._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is not Scalar:
            other = as_scalar(other)
        c, d = other.re, other.im
        if not d:
            if not c:
                raise ZeroDivisionError("division by zero Scalar")
            return Scalar._raw(self.re / c, self.im / c)
        norm = c * c + d * d
        a, b = self.re, self.im
        return Scalar._raw((a * c + b * d) / norm, (b * c - a * d) / norm)

    def __rtruediv__(self, other):
        return as_scalar(other) / self

    def __neg__(self):
        return Scalar._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "Scalar":
        return Scalar._raw(self.re, -self.im)

    def inverse(self) -> "Scalar":
        return ONE / self

    # comparisons ------------------------------------------------------
    def __eq__(self, other):
        if type(other) is not Scalar:
            try:
                other = as_scalar(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    # presentation -----------------------------------------------------
    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def to_json(self) -> str:
        """Compact canonical string ``"re"`` or ``"re|im"``."""
        if not self.im:
            return str(self.re)
        return f"{self.re}|{self.im}"


ZERO = Scalar._raw(_Q0, _Q0)
ONE = Scalar._raw(_Q1, _Q0)
I_UNIT = Scalar._raw(_Q0, _Q1)


def as_scalar(x) -> Scalar:
    """Coerce ints, Fractions, mpq values and complex numbers with integral parts."""
    if type(x) is Scalar:
        return x
    if isinstance(x, complex):
        if x.real != int(x.real) or x.imag != int(x.imag):
            raise TypeError("only complex numbers with integral parts are exact")
        return Scalar(int(x.real), int(x.imag))
    if isinstance(x, (int, Fraction)) or type(x) is type(_Q0):
        return Scalar._raw(_to_mpq(x), _Q0)
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


# ---------------------------------------------------------------------------
# sparse vector helpers (dict: label -> Scalar, zero entries never stored)


def sparse_add(acc: dict, vec: Mapping, coef: Scalar = ONE) -> dict:
    """In-place ``acc += coef * vec`` keeping the no-zero-entries invariant."""
    for k, x in vec.items():
        nv = acc.get(k)
        nv = coef * x if nv is None else nv + coef * x
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)
    return acc


def sparse_scale(vec: Mapping, coef: Scalar) -> dict:
    if not coef:
        return {}
    return {k: coef * x for k, x in vec.items()}


# ---------------------------------------------------------------------------
# matrices


class ExactMatrix:
    """Sparse exact matrix: ``entries[(row, col)]`` holds only nonzero values."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Mapping | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.rows = rows
        self.cols = cols
        clean = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError(f"entry {(r, c)} outside {rows}x{cols}")
            v = as_scalar(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean

    @classmethod
    def from_rows(cls, data: Sequence[Sequence], cols: int | None = None) -> "ExactMatrix":
        nrows = len(data)
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        entries = {}
        for r, row in enumerate(data):
            if len(row) != ncols:
                raise ValueError("ragged row data")
            for c, v in enumerate(row):
                entries[(r, c)] = v
        return cls(nrows, ncols, entries)

    @classmethod
    def from_sparse_rows(cls, rows: Sequence[Mapping[int, Scalar]], cols: int) -> "ExactMatrix":
        entries = {}
        for r, row in enumerate(rows):
            for c, v in row.items():
                entries[(r, c)] = v
        return cls(len(rows), cols, entries)

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def to_lists(self) -> list[list[Scalar]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def density(self) -> float:
        cells = self.rows * self.cols
        return len(self.entries) / cells if cells else 0.0

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


DENSE_THRESHOLD = 0.25


def _rref_sparse(rows: list[dict], cols: int) -> tuple[list[dict], list[int]]:
    builder = EchelonBuilder()
    for row in rows:
        builder.insert(row)
    return builder.canonical_rows()


def _rref_dense(rows: list[list[Scalar]], cols: int) -> tuple[list[dict], list[int]]:
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    out = [{c: x for c, x in enumerate(row) if x} for row in m[: len(pivots)]]
    return out, pivots


def rref(m: ExactMatrix) -> tuple[ExactMatrix, tuple[int, ...]]:
    """Canonical reduced row-echelon form and its pivot columns."""
    if m.density() > DENSE_THRESHOLD:
        rows, pivots = _rref_dense(m.to_lists(), m.cols)
    else:
        rows, pivots = _rref_sparse(m.row_dicts(), m.cols)
    return ExactMatrix.from_sparse_rows(rows, m.cols), tuple(pivots)


def kernel(m: ExactMatrix) -> "Subspace":
    """Null space ``{x : m x = 0}`` as a subspace of Q(i)^cols."""
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    rows = reduced.row_dicts()
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = {free: ONE}
        for row, p in zip(rows, pivots):
            x = row.get(free)
            if x:
                vec[p] = -x
        basis.append(vec)
    return Subspace.spanned_by(m.cols, basis)


class Subspace:
    """A subspace of Q(i)^n stored by its canonical RREF basis."""

    __slots__ = ("ambient_dim", "rows", "pivots")

    def __init__(self, ambient_dim: int, rows: Sequence[Mapping[int, Scalar]], pivots: Sequence[int]):
        self.ambient_dim = ambient_dim
        self.rows = tuple(dict(r) for r in rows)
        self.pivots = tuple(pivots)

    @classmethod
    def spanned_by(cls, ambient_dim: int, vectors: Iterable[Mapping[int, Scalar]]) -> "Subspace":
        builder = EchelonBuilder()
        for v in vectors:
            for c in v:
                if not 0 <= c < ambient_dim:
                    raise IndexError(f"coordinate {c} outside ambient dimension {ambient_dim}")
            builder.insert(v)
        rows, pivots = builder.canonical_rows()
        return cls(ambient_dim, rows, pivots)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, (), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, [{i: ONE} for i in range(ambient_dim)], range(ambient_dim))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def basis(self) -> ExactMatrix:
        return ExactMatrix.from_sparse_rows(self.rows, self.ambient_dim)

    def reduce(self, vec: Mapping[int, Scalar]) -> dict:
        """Remainder of ``vec`` after clearing every pivot column."""
        out = dict(vec)
        for row, p in zip(self.rows, self.pivots):
            x = out.get(p)
            if x:
                sparse_add(out, row, -x)
        return out

    def contains_vector(self, vec: Mapping[int, Scalar]) -> bool:
        return not self.reduce(vec)

    def coordinates(self, vec: Mapping[int, Scalar]) -> list[Scalar]:
        """Coefficients of ``vec`` on the RREF basis (vec must lie in the span)."""
        if self.reduce(vec):
            raise NotASubspace("vector is not in the subspace")
        return [vec.get(p, ZERO) for p in self.pivots]

    def _check(self, other: "Subspace"):
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatch(f"ambient dimensions {self.ambient_dim} and {other.ambient_dim} differ")

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.pivots == other.pivots and self.rows == other.rows

    def __hash__(self):
        return hash((self.ambient_dim, self.pivots, len(self.rows)))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.spanned_by(self.ambient_dim, list(self.rows) + list(other.rows))

    def intersect(self, other: "Subspace") -> "Subspace":
        """Zassenhaus: reduce [a | a] over [b | 0]; rows with zero left half give a ∩ b."""
        self._check(other)
        n = self.ambient_dim
        builder = EchelonBuilder()
        for r in self.rows:
            v = dict(r)
            v.update({n + c: x for c, x in r.items()})
            builder.insert(v)
        for r in other.rows:
            builder.insert(dict(r))
        rows, pivots = builder.canonical_rows()
        inter = [{c - n: x for c, x in row.items()} for row, p in zip(rows, pivots) if p >= n]
        return Subspace.spanned_by(n, inter)

    def contains(self, other: "Subspace") -> bool:
        self._check(other)
        return all(self.contains_vector(r) for r in other.rows)

    def quotient_dim(self, other: "Subspace") -> int:
        self._check(other)
        if not self.contains(other):
            raise NotASubspace("quotient requires the second subspace to lie inside the first")
        return self.dim - other.dim


def subspace_ops(a: Subspace, b: Subspace, kind: str):
    """Dispatch ``sum``, ``intersect``, ``contains`` or ``quotient_dim``."""
    if kind == "sum":
        return a.sum(b)
    if kind == "intersect":
        return a.intersect(b)
    if kind == "contains":
        return a.contains(b)
    if kind == "quotient_dim":
        return a.quotient_dim(b)
    raise ValueError(f"unknown subspace operation {kind!r}")


def span(ambient_dim: int, vectors: Iterable[Mapping[int, Scalar]]) -> Subspace:
    return Subspace.spanned_by(ambient_dim, vectors)


class EchelonBuilder:
    """Incremental fully reduced echelon form over arbitrary hashable labels.

    ``order`` maps a label to a sort key; the pivot of a new row is its
    smallest label under that key.  Rows are kept fully reduced, so after
    any sequence of insertions the stored rows are the unique RREF of the
    inserted span for that column order.
    """

    def __init__(self, order: Callable[[Hashable], object] | None = None):
        self.order = order
        self.rows: dict[Hashable, dict] = {}
        self._holders: dict[Hashable, set] = defaultdict(set)

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: Mapping) -> dict:
        out = dict(vec)
        rows = self.rows
        hits = [c for c in out if c in rows]
        for c in hits:
            x = out.get(c)
            if x:
                sparse_add(out, rows[c], -x)
        return out

    def _pivot_of(self, vec: Mapping):
        if self.order is None:
            return min(vec)
        return min(vec, key=self.order)

    def insert(self, vec: Mapping) -> bool:
        """Add ``vec`` to the span; return True when it was independent."""
        res = self.reduce(vec)
        if not res:
            return False
        p = self._pivot_of(res)
        inv = ONE / res[p]
        if inv != ONE:
            res = {k: x * inv for k, x in res.items()}
        holders = self._holders
        for q in list(holders.get(p, ())):
            row = self.rows[q]
            f = row[p]
            before = set(row)
            sparse_add(row, res, -f)
            for k in before - set(row):
                holders[k].discard(q)
            for k in set(row) - before:
                holders[k].add(q)
        self.rows[p] = res
        for k in res:
            holders[k].add(p)
        return True

    def contains(self, vec: Mapping) -> bool:
        return not self.reduce(vec)

    def pivots(self) -> list:
        keys = list(self.rows)
        keys.sort(key=self.order) if self.order is not None else keys.sort()
        return keys

    def canonical_rows(self) -> tuple[list[dict], list]:
        ps = self.pivots()
        return [self.rows[p] for p in ps], ps
