"""Dense truncated-matrix model of the operator layers, used as an independent oracle.

Each layer is realised on an explicit finite basis: the circle on e_n with
|n| <= K, a suspension on inner (x) e_n with 0 <= n < K, a Pauli double on
inner (x) C^2.  Entries are real Fractions.  Products computed here are only
trusted away from the truncation boundary, which :func:`safe` reports.
"""
from __future__ import annotations

from fractions import Fraction

from qdscalc.oper import CircleLayer, DoubledLayer, PointLayer, QdsLayer

CIRCLE_SIZE = 14
QDS_SIZE = 14
MARGIN = 7


def basis(layer):
    if isinstance(layer, PointLayer):
        return [()]
    if isinstance(layer, CircleLayer):
        return list(range(-CIRCLE_SIZE, CIRCLE_SIZE + 1))
    if isinstance(layer, QdsLayer):
        return [(i, n) for i in basis(layer.inner) for n in range(QDS_SIZE)]
    if isinstance(layer, DoubledLayer):
        return [(i, a) for i in basis(layer.inner) for a in (0, 1)]
    raise TypeError(layer)


def safe(layer, index) -> bool:
    if isinstance(layer, PointLayer):
        return True
    if isinstance(layer, CircleLayer):
        return abs(index) <= CIRCLE_SIZE - MARGIN
    if isinstance(layer, QdsLayer):
        return safe(layer.inner, index[0]) and index[1] < QDS_SIZE - MARGIN
    return safe(layer.inner, index[0])


def _sgn(n):
    return 1 if n >= 0 else -1


def key_matrix(layer, key) -> dict:
    """Sparse dense-model matrix {(row, col): Fraction} of one basis key."""
    if isinstance(layer, PointLayer):
        return {((), ()): Fraction(1)}
    if isinstance(layer, CircleLayer):
        rng = range(-CIRCLE_SIZE, CIRCLE_SIZE + 1)
        if key[0] == "z":
            _, k, f = key
            return {(n + k, n): Fraction(_sgn(n) if f else 1) for n in rng if n + k in rng}
        _, m, n = key
        return {(m, n): Fraction(1)}
    if isinstance(layer, QdsLayer):
        x = key_matrix(layer.inner, key[-1])
        if key[0] == "e":
            _, p, q, _ = key
            small = {(p, q): Fraction(1)}
        else:
            d = key[1]
            if d >= 0:
                small = {(n - d, n): Fraction(1) for n in range(d, QDS_SIZE)}
            else:
                small = {(n - d, n): Fraction(1) for n in range(QDS_SIZE) if n - d < QDS_SIZE}
        return tensor(x, small)
    if isinstance(layer, DoubledLayer):
        _, a, b, inner = key
        return tensor(key_matrix(layer.inner, inner), {(a, b): Fraction(1)})
    raise TypeError(layer)


def tensor(x: dict, y: dict) -> dict:
    return {((i, p), (j, q)): u * v for (i, j), u in x.items() for (p, q), v in y.items()}


def to_dense(op) -> dict:
    out: dict = {}
    for key, c in op.terms.items():
        assert c.im == 0, "the dense oracle handles real coefficients only"
        coef = Fraction(int(c.re.numerator), int(c.re.denominator))
        for rc, v in key_matrix(op.layer, key).items():
            out[rc] = out.get(rc, 0) + coef * v
    return {k: v for k, v in out.items() if v}


def matmul(a: dict, b: dict) -> dict:
    by_row: dict = {}
    for (k, c), v in b.items():
        by_row.setdefault(k, []).append((c, v))
    out: dict = {}
    for (r, k), u in a.items():
        for c, v in by_row.get(k, ()):
            out[(r, c)] = out.get((r, c), 0) + u * v
    return {k: v for k, v in out.items() if v}


def sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v
    return {k: v for k, v in out.items() if v}


def dirac(layer) -> dict:
    if isinstance(layer, PointLayer):
        return {}
    if isinstance(layer, CircleLayer):
        return {(n, n): Fraction(n) for n in basis(layer) if n}
    if isinstance(layer, QdsLayer):
        ident = {(n, n): Fraction(1) for n in range(QDS_SIZE)}
        number = {(n, n): Fraction(n) for n in range(1, QDS_SIZE)}
        out = tensor(dirac(layer.inner), ident)
        for k, v in tensor(sign(layer.inner), number).items():
            out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}
    if isinstance(layer, DoubledLayer):
        return tensor(dirac(layer.inner), {(0, 1): Fraction(1), (1, 0): Fraction(1)})
    raise TypeError(layer)


def sign(layer) -> dict:
    if isinstance(layer, PointLayer):
        return {((), ()): Fraction(1)}
    if isinstance(layer, CircleLayer):
        return {(n, n): Fraction(_sgn(n)) for n in basis(layer)}
    if isinstance(layer, QdsLayer):
        return tensor(sign(layer.inner), {(n, n): Fraction(1) for n in range(QDS_SIZE)})
    if isinstance(layer, DoubledLayer):
        return tensor(sign(layer.inner), {(0, 1): Fraction(1), (1, 0): Fraction(1)})
    raise TypeError(layer)


def restrict(layer, m: dict) -> dict:
    """Entries whose row and column both lie in the trusted region."""
    return {(r, c): v for (r, c), v in m.items() if safe(layer, r) and safe(layer, c)}
