"""Hermitian projective modules, compatible connections, curvature and their lift through one suspension.

A module E = p A^n is stored through its projection, with every algebra
element expanded in the spanning set of a :class:`~qdscalc.forms.FormSpace`.
Module-valued forms are n-vectors of :class:`~qdscalc.forms.FormExpr`; the
relation p omega = omega is maintained by construction.

A connection is determined by its values Gamma_k on the columns
eps_k = p e_k of the projection: for xi = sum_k eps_k xi_k,

    nabla xi = sum_k Gamma_k xi_k + p dxi,

and the same formula with form-valued xi_k gives the extension nabla' used
for the curvature nabla' nabla.  The Grassmannian connection has
Gamma_k = p d(eps_k); a perturbation alpha = p alpha p adds alpha eps_k.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exact import I_UNIT, ONE, ZERO, Scalar, as_scalar, sparse_add
from .forms import FormExpr, FormSpace, form_space, universal_d, universal_product
from .oper import Operator
from .triple import FINITE, UNIT, TripleDescriptor, qds_of

__all__ = [
    "NotAProjection",
    "ModuleMismatch",
    "FgpModule",
    "ConnectionData",
    "LiftedModule",
    "make_module",
    "hermitian_inner",
    "form_inner",
    "form_adjoint",
    "grassmannian",
    "perturbed",
    "random_perturbation",
    "apply_connection",
    "extend_connection",
    "curvature",
    "curvature_apply",
    "lift_module",
    "lift_form",
    "lift_connection",
    "prop_formula",
    "psi_map",
    "verify_diagram",
    "connection_suite",
    "bott_projection",
    "corner_projection",
]


class NotAProjection(ValueError):
    """The matrix is not a self-adjoint idempotent; ``residual`` holds the offending data."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class ModuleMismatch(ValueError):
    """Module elements belong to different modules."""


# ---------------------------------------------------------------------------
# algebra helpers on spanning-set expansions


def _alg(x: Mapping) -> FormExpr:
    """Algebra element as a degree-zero form."""
    return FormExpr(0, {(i,): c for i, c in x.items()})


def _d_alg(x: Mapping) -> FormExpr:
    return FormExpr(1, {(0, i): c for i, c in x.items() if i != 0})


def _alg_mul(space: FormSpace, x: Mapping, y: Mapping) -> dict:
    out: dict = {}
    for i, a in x.items():
        for j, b in y.items():
            sparse_add(out, space.product_indices(i, j), a * b)
    return out


def _alg_adjoint(space: FormSpace, x: Mapping) -> dict:
    cache = space.__dict__.setdefault("_adj_index", {})
    out: dict = {}
    for i, c in x.items():
        hit = cache.get(i)
        if hit is None:
            hit = space.expand(space.basis[i].op.adjoint().terms)
            cache[i] = hit
        sparse_add(out, hit, c.conjugate())
    return out


def _as_expansion(space: FormSpace, x) -> dict:
    if isinstance(x, Operator):
        return space.expand(x.terms)
    if isinstance(x, Mapping):
        return {int(i): as_scalar(c) for i, c in x.items() if as_scalar(c)}
    c = as_scalar(x)
    return {0: c} if c else {}


def _zero_forms(n: int, degree: int) -> list:
    return [FormExpr(degree, {}) for _ in range(n)]


def _add_vec(a: list, b: list) -> list:
    return [x + y for x, y in zip(a, b)]


def _scale_vec(a: list, c) -> list:
    return [x * c for x in a]


def form_adjoint(space: FormSpace, w: FormExpr) -> FormExpr:
    """Involution of the universal algebra with (da)* = -d(a*), so that pi(w*) = pi(w)*."""
    out = FormExpr(w.degree, {})
    for word, c in w.terms.items():
        k = len(word) - 1
        acc = FormExpr(0, {(0,): c.conjugate() if k % 2 == 0 else -c.conjugate()})
        for i in reversed(word[1:]):
            acc = universal_product(space, acc, _d_alg(_alg_adjoint(space, {i: ONE})))
        acc = universal_product(space, acc, _alg(_alg_adjoint(space, {word[0]: ONE})))
        out = out + acc
    return out


# ---------------------------------------------------------------------------
# modules


@dataclass(eq=False)
class FgpModule:
    space: FormSpace
    p: tuple  # n x n tuple of expansions

    @property
    def n(self) -> int:
        return len(self.p)

    def element(self, components: Sequence) -> list[dict]:
        """p (a_1, ..., a_n)."""
        a = [_as_expansion(self.space, x) for x in components]
        if len(a) != self.n:
            raise ModuleMismatch("component count differs from the module rank")
        return [self._row_times(i, a) for i in range(self.n)]

    def _row_times(self, i: int, a: Sequence[Mapping]) -> dict:
        out: dict = {}
        for j in range(self.n):
            sparse_add(out, _alg_mul(self.space, self.p[i][j], a[j]))
        return out

    def column(self, k: int) -> list[dict]:
        """eps_k = p e_k."""
        return [dict(self.p[i][k]) for i in range(self.n)]

    def apply_p_forms(self, forms: Sequence[FormExpr]) -> list[FormExpr]:
        sp = self.space
        out = []
        for i in range(self.n):
            acc = FormExpr(forms[0].degree, {})
            for j in range(self.n):
                acc = acc + universal_product(sp, _alg(self.p[i][j]), forms[j])
            out.append(acc)
        return out

    def contains(self, xi: Sequence[Mapping]) -> bool:
        return [self._row_times(i, xi) for i in range(self.n)] == [dict(x) for x in xi]

    def pi_vec(self, forms: Sequence[FormExpr]) -> list[dict]:
        return [self.space.pi_terms(f) for f in forms]


def make_module(space: FormSpace, entries: Sequence[Sequence]) -> FgpModule:
    """Validate a projection matrix (p^2 = p = p*) over the algebra of ``space``."""
    n = len(entries)
    if any(len(row) != n for row in entries):
        raise NotAProjection("projection must be a square matrix")
    p = tuple(tuple(_as_expansion(space, x) for x in row) for row in entries)
    sq_resid = []
    adj_resid = []
    for i in range(n):
        for j in range(n):
            sq: dict = {}
            for k in range(n):
                sparse_add(sq, _alg_mul(space, p[i][k], p[k][j]))
            diff = sparse_add(dict(sq), p[i][j], -ONE)
            if diff:
                sq_resid.append(((i, j), diff))
            adj = sparse_add(_alg_adjoint(space, p[j][i]), p[i][j], -ONE)
            if adj:
                adj_resid.append(((i, j), adj))
    if sq_resid or adj_resid:
        raise NotAProjection("matrix is not a self-adjoint idempotent",
                             {"square": sq_resid, "adjoint": adj_resid})
    return FgpModule(space, p)


def bott_projection(space: FormSpace) -> FgpModule:
    """Rank-one projection [[a, b], [b*, 1 - a]] over the circle with a = (2 + z + z^-1) / 4, b = (z - z^-1) / 4i."""
    if space.t.kind != "circle":
        raise ModuleMismatch("the Bott projection lives over the circle")
    layer = space.layer
    half = ONE / as_scalar(2)
    quarter = half * half
    a = Operator(layer, {("z", 0, 0): half, ("z", 1, 0): quarter, ("z", -1, 0): quarter})
    c = Operator(layer, {("z", 0, 0): half, ("z", 1, 0): -quarter, ("z", -1, 0): -quarter})
    b = Operator(layer, {("z", 1, 0): quarter / I_UNIT, ("z", -1, 0): -quarter / I_UNIT})
    return make_module(space, [[a, b], [b, c]])


def corner_projection(space: FormSpace) -> FgpModule:
    """diag(u, 1 - u) over a suspension, u being the matrix unit in the top corner."""
    if space.t.kind != "qds":
        raise ModuleMismatch("the corner projection lives over a suspension")
    u = space.basis[space.index_of("1(x)e[0,0]")].op
    one = space.layer.identity()
    zero = space.layer.zero()
    return make_module(space, [[u, zero], [zero, one - u]])


def hermitian_inner(m: FgpModule, xi: Sequence[Mapping], eta: Sequence[Mapping]) -> dict:
    """<xi, eta> = sum_j xi_j* eta_j."""
    if len(xi) != m.n or len(eta) != m.n:
        raise ModuleMismatch("elements must have the module rank")
    out: dict = {}
    for a, b in zip(xi, eta):
        sparse_add(out, _alg_mul(m.space, _alg_adjoint(m.space, a), b))
    return out


def form_inner(m: FgpModule, left: Sequence, right: Sequence) -> FormExpr:
    """Form-valued pairing; either argument may be a module element or a vector of forms."""
    sp = m.space
    lf = [x if isinstance(x, FormExpr) else _alg(x) for x in left]
    rf = [x if isinstance(x, FormExpr) else _alg(x) for x in right]
    out = None
    for a, b in zip(lf, rf):
        term = universal_product(sp, form_adjoint(sp, a), b)
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# connections


@dataclass(eq=False)
class ConnectionData:
    module: FgpModule
    gamma: list  # gamma[k] = nabla(eps_k), an n-vector of degree-one forms
    perturbation: list | None = None  # n x n matrix of degree-one forms, or None for Grassmannian

    def to_json(self) -> dict:
        return {"rank": self.module.n,
                "gamma": [[f.to_json() for f in col] for col in self.gamma]}


def grassmannian(m: FgpModule) -> ConnectionData:
    gamma = [m.apply_p_forms([_d_alg(x) for x in m.column(k)]) for k in range(m.n)]
    return ConnectionData(m, gamma, None)


def random_perturbation(m: FgpModule, rng: random.Random, terms: int = 2, max_weight: int = 1) -> list:
    """Self-adjoint alpha = p ((a + a*) / 2) p with a a random matrix of light degree-one words."""
    sp = m.space
    light = _sample_indices(sp, max_weight)
    slots = [i for i in light if i != 0]
    raw = []
    for i in range(m.n):
        row = []
        for j in range(m.n):
            f = FormExpr(1, {})
            for _ in range(terms):
                c = as_scalar(rng.randint(-3, 3)) + as_scalar(rng.randint(-2, 2)) * as_scalar(1j)
                f = f + FormExpr.word(rng.choice(light), rng.choice(slots), coeff=c)
            row.append(f)
        raw.append(row)
    half = ONE / as_scalar(2)
    sym = [[(raw[i][j] + form_adjoint(sp, raw[j][i])) * half for j in range(m.n)] for i in range(m.n)]
    # alpha = p sym p
    left = [[_sum_forms(universal_product(sp, _alg(m.p[i][k]), sym[k][j]) for k in range(m.n))
             for j in range(m.n)] for i in range(m.n)]
    return [[_sum_forms(universal_product(sp, left[i][k], _alg(m.p[k][j])) for k in range(m.n))
             for j in range(m.n)] for i in range(m.n)]


def _sum_forms(forms) -> FormExpr:
    out = None
    for f in forms:
        out = f if out is None else out + f
    return out


def perturbed(base: ConnectionData, alpha: Sequence[Sequence[FormExpr]]) -> ConnectionData:
    """base + alpha with alpha acting by matrix multiplication."""
    m = base.module
    sp = m.space
    gamma = []
    for k in range(m.n):
        eps = m.column(k)
        extra = [_sum_forms(universal_product(sp, alpha[i][j], _alg(eps[j])) for j in range(m.n))
                 for i in range(m.n)]
        gamma.append(_add_vec(base.gamma[k], extra))
    total = alpha if base.perturbation is None else [
        [base.perturbation[i][j] + alpha[i][j] for j in range(m.n)] for i in range(m.n)]
    return ConnectionData(m, gamma, total)


def apply_connection(c: ConnectionData, xi: Sequence[Mapping]) -> list[FormExpr]:
    """nabla xi for a module element xi (with p xi = xi)."""
    m = c.module
    if not m.contains(xi):
        raise ModuleMismatch("element is not in the module")
    return extend_connection(c, [_alg(x) for x in xi])


def extend_connection(c: ConnectionData, eta: Sequence[FormExpr]) -> list[FormExpr]:
    """nabla'(eta) = sum_k Gamma_k eta_k + p d eta for a module-valued form eta."""
    m = c.module
    sp = m.space
    deg = eta[0].degree
    out = m.apply_p_forms([universal_d(f) for f in eta])
    for k in range(m.n):
        if not eta[k]:
            continue
        out = _add_vec(out, [universal_product(sp, c.gamma[k][i], eta[k]) for i in range(m.n)])
    for f in out:
        if f.degree != deg + 1:
            raise AssertionError("degree bookkeeping failed")
    return out


def curvature(c: ConnectionData) -> list[list[FormExpr]]:
    """Matrix of the curvature on the columns: theta[i][j] = (nabla' nabla eps_j)_i."""
    m = c.module
    cols = [extend_connection(c, c.gamma[j]) for j in range(m.n)]
    return [[cols[j][i] for j in range(m.n)] for i in range(m.n)]


def curvature_apply(c: ConnectionData, xi: Sequence[Mapping]) -> list[FormExpr]:
    return extend_connection(c, apply_connection(c, xi))


# ---------------------------------------------------------------------------
# lifting through one suspension


@dataclass(eq=False)
class LiftedModule:
    base: FgpModule
    module: FgpModule
    cutoff: int
    index: dict = field(default_factory=dict)  # (base index, p, q) -> lifted index
    reverse: dict = field(default_factory=dict)

    def lift_index(self, i: int, p: int, q: int) -> int:
        return self.index[(i, p, q)]

    def lift_alg(self, x: Mapping, matrix: Mapping) -> dict:
        """x (x) T as a lifted expansion."""
        out: dict = {}
        for i, c in x.items():
            for (p, q), t in matrix.items():
                sparse_add(out, {self.index[(i, p, q)]: c * as_scalar(t)})
        return out

    def phi(self, xi: Sequence[Mapping], matrix: Mapping) -> list[dict]:
        """pA^n (x) uS -> (p (x) u)(A (x) S)^n: xi (x) uT -> (xi_k (x) uT)_k."""
        ut = {(0, q): t for (p, q), t in matrix.items() if p == 0}
        return [self.lift_alg(x, ut) for x in xi]

    def psi(self, xi_lift: Sequence[Mapping]) -> dict:
        """Inverse of phi: column index q -> base element whose lift sits in row 0, column q."""
        out: dict = {}
        for k, comp in enumerate(xi_lift):
            for j, c in comp.items():
                i, p, q = self.reverse[j]
                if p != 0:
                    raise ModuleMismatch("lifted element has support outside the range of u")
                vec = out.setdefault(q, [dict() for _ in range(self.base.n)])
                sparse_add(vec[k], {i: c})
        return {q: vec for q, vec in sorted(out.items())}


def lift_module(m: FgpModule, cutoff: int) -> LiftedModule:
    """(p (x) u) over the suspension at the same budget and mode."""
    base_space = m.space
    t2 = qds_of(base_space.t, cutoff)
    space2 = form_space(t2, base_space.budget, base_space.mode)
    labels = {e.label: j for j, e in enumerate(space2.basis)}
    index, reverse = {}, {}
    for i, e in enumerate(base_space.basis):
        for p in range(cutoff):
            for q in range(cutoff):
                j = labels[f"{e.label}(x)e[{p},{q}]"]
                index[(i, p, q)] = j
                reverse[j] = (i, p, q)
    lm = LiftedModule(m, None, cutoff, index, reverse)
    unit = {(0, 0): ONE}
    p2 = [[lm.lift_alg(m.p[i][j], unit) for j in range(m.n)] for i in range(m.n)]
    lm.module = make_module(space2, p2)
    return lm


def lift_form(lm: LiftedModule, w: FormExpr, matrix: Mapping) -> FormExpr:
    """(a0 (x) u) d(a1 (x) u) ... d(ak (x) u) (1 (x) uT): the image of w (x) uT."""
    sp2 = lm.module.space
    words = {}
    for word, c in w.terms.items():
        lifted = tuple(lm.index[(i, 0, 0)] for i in word)
        words[lifted] = words.get(lifted, ZERO) + c
    head = FormExpr(w.degree, words)
    ut = {lm.index[(0, 0, q)]: as_scalar(t) for (p, q), t in matrix.items() if p == 0 and t}
    return universal_product(sp2, head, _alg(ut))


def lift_connection(c: ConnectionData, lm: LiftedModule) -> ConnectionData:
    """Lifted connection: its value on (p (x) u) e_k is Gamma_k (x) u."""
    unit = {(0, 0): ONE}
    gamma = [[lift_form(lm, f, unit) for f in col] for col in c.gamma]
    pert = None
    if c.perturbation is not None:
        pert = [[lift_form(lm, f, unit) for f in row] for row in c.perturbation]
    return ConnectionData(lm.module, gamma, pert)


def prop_formula(c: ConnectionData, lm: LiftedModule, a: Sequence[Mapping], mats: Sequence[Mapping]) -> list:
    """Connection on xi~ = (p (x) u)(a_1 (x) T_1, ...) by the extension formula.

    sum_i nabla(p(0, .., a_i, .., 0)) (x) uT_i + (p (x) u)(a_1 (x) delta(uT_1), ...),
    where a (x) delta(uT) is represented by (a (x) u) d(1 (x) uT).
    """
    m = c.module
    sp2 = lm.module.space
    n = m.n
    out = _zero_forms(n, 1)
    for i in range(n):
        vec = [dict() for _ in range(n)]
        vec[i] = a[i]
        xi = m.element(vec)
        nab = apply_connection(c, xi)
        out = _add_vec(out, [lift_form(lm, f, mats[i]) for f in nab])
    for k in range(n):
        acc = FormExpr(1, {})
        for j in range(n):
            coeff = lm.lift_alg(_alg_mul(m.space, m.p[k][j], a[j]), {(0, 0): ONE})
            ut = lm.lift_alg({0: ONE}, {(0, q): t for (p, q), t in mats[j].items() if p == 0})
            acc = acc + universal_product(sp2, _alg(coeff), _d_alg(ut))
        out[k] = out[k] + acc
    return out


def lifted_element(lm: LiftedModule, a: Sequence[Mapping], mats: Sequence[Mapping]) -> list[dict]:
    """(p (x) u)(a_1 (x) T_1, ..., a_n (x) T_n)."""
    comps = [lm.lift_alg(a[j], mats[j]) for j in range(lm.base.n)]
    return lm.module.element(comps)


def psi_map(lm: LiftedModule, theta: Sequence[Sequence[FormExpr]]) -> list[list[FormExpr]]:
    """Induced map on curvature matrices: theta_ij -> theta_ij (x) u."""
    unit = {(0, 0): ONE}
    return [[lift_form(lm, f, unit) for f in row] for row in theta]


# ---------------------------------------------------------------------------
# verification


def _pi_matrix(space: FormSpace, mat) -> list:
    return [[space.pi_terms(f) for f in row] for row in mat]


def _sample_indices(space: FormSpace, max_weight: int, tag: str | None = None) -> list[int]:
    """Light spanning indices; on suspensions only the unit and the matrix part, so products stay in range."""
    has_finite = any(e.tag == FINITE for e in space.basis)
    out = []
    for i, (e, w) in enumerate(zip(space.basis, space.weights)):
        if w > max_weight:
            continue
        if tag is not None and e.tag != tag:
            continue
        if has_finite and e.tag not in (FINITE, UNIT):
            continue
        out.append(i)
    return out


def _random_alg(space: FormSpace, rng: random.Random, max_weight: int = 1, terms: int = 2,
                tag: str | None = None) -> dict:
    light = _sample_indices(space, max_weight, tag)
    out: dict = {}
    for _ in range(terms):
        sparse_add(out, {rng.choice(light): as_scalar(rng.randint(-3, 3))})
    return out


def _random_matrix(rng: random.Random, m: int) -> dict:
    return {(0, rng.randrange(m)): as_scalar(rng.randint(1, 3)), (0, rng.randrange(m)): as_scalar(rng.randint(-2, 2))}


def verify_diagram(c: ConnectionData, lm: LiftedModule) -> dict:
    """curvature(lift(nabla)) against psi(curvature(nabla)) in the image of pi and in Omega^2."""
    route1 = curvature(lift_connection(c, lm))
    route2 = psi_map(lm, curvature(c))
    sp2 = lm.module.space
    ops1 = _pi_matrix(sp2, route1)
    ops2 = _pi_matrix(sp2, route2)
    omega2 = sp2.omega(2)
    classes_equal = all(omega2.is_zero_class(sparse_add(dict(x), y, -ONE))
                        for r1, r2 in zip(ops1, ops2) for x, y in zip(r1, r2))
    degenerate = omega2.quotient_dim == 0 and c.module.space.omega(2).quotient_dim == 0
    nonzero = any(v for row in ops1 for v in row)
    return {"operators_equal": ops1 == ops2, "classes_equal": classes_equal,
            "degenerate": degenerate, "curvature_operator_nonzero": nonzero}


def connection_suite(module: FgpModule, cutoff: int, seed: int = 0, pairs: int = 5) -> dict:
    """All connection checks for one module and its lift."""
    rng = random.Random(seed)
    sp = module.space
    n = module.n
    grass = grassmannian(module)
    alpha = random_perturbation(module, rng)
    conn = perturbed(grass, alpha)
    lm = lift_module(module, cutoff)
    sp2 = lm.module.space
    report: dict = {"rank": n, "cutoff": cutoff, "budget": sp.budget, "mode": sp.mode, "seed": seed}

    # Leibniz and compatibility on the base, for both connections
    def leibniz(cn, mod, xi, a):
        s = mod.space
        xa = [_alg_mul(s, x, a) for x in xi]
        lhs = apply_connection(cn, xa)
        rhs = [universal_product(s, f, _alg(a)) + universal_product(s, _alg(x), _d_alg(a))
               for f, x in zip(apply_connection(cn, xi), xi)]
        return mod.pi_vec(lhs) == mod.pi_vec(rhs)

    def compatible(cn, mod, xi, eta):
        s = mod.space
        lhs = form_inner(mod, xi, apply_connection(cn, eta)) - form_inner(mod, apply_connection(cn, xi), eta)
        rhs = universal_d(_alg(hermitian_inner(mod, xi, eta)))
        return s.pi_terms(lhs) == s.pi_terms(rhs)

    def rand_elem(mod, s):
        return mod.element([_random_alg(s, rng) for _ in range(mod.n)])

    samples = [(rand_elem(module, sp), rand_elem(module, sp), _random_alg(sp, rng)) for _ in range(3)]
    report["leibniz"] = all(leibniz(cn, module, xi, a) for cn in (grass, conn) for xi, _, a in samples)
    report["compatibility"] = all(compatible(cn, module, xi, eta) for cn in (grass, conn) for xi, eta, _ in samples)
    report["curvature_right_linear"] = all(
        module.pi_vec(curvature_apply(conn, [_alg_mul(sp, x, a) for x in xi]))
        == module.pi_vec([universal_product(sp, f, _alg(a)) for f in curvature_apply(conn, xi)])
        for xi, _, a in samples[:2])
    # Grassmannian curvature equals p dp dp
    theta = curvature(grass)
    pdpdp = [[_sum_forms(
        universal_product(sp, universal_product(sp, _alg(module.p[i][k]), _d_alg(module.p[k][l])),
                          _d_alg(module.p[l][j]))
        for k in range(n) for l in range(n)) for j in range(n)] for i in range(n)]
    report["grassmannian_curvature_pdpdp"] = _pi_matrix(sp, theta) == _pi_matrix(sp, pdpdp)

    # lifted connection
    lifted = lift_connection(conn, lm)
    mod2 = lm.module
    lifted_samples = []
    for _ in range(3):
        a = [_random_alg(sp, rng) for _ in range(n)]
        mats = [_random_matrix(rng, cutoff) for _ in range(n)]
        lifted_samples.append((a, mats))
    report["prop_formula_matches"] = all(
        mod2.pi_vec(prop_formula(conn, lm, a, mats)) == mod2.pi_vec(apply_connection(lifted, lifted_element(lm, a, mats)))
        for a, mats in lifted_samples)
    xs = [lifted_element(lm, a, mats) for a, mats in lifted_samples]
    report["lifted_leibniz"] = all(leibniz(lifted, mod2, x, _random_alg(sp2, rng, 1, tag=FINITE)) for x in xs)
    report["lifted_compatibility"] = all(compatible(lifted, mod2, x, y) for x, y in zip(xs, xs[1:] + xs[:1]))
    # Hermitian structure and the module isomorphism
    herm = True
    iso = True
    for xi, eta, _ in samples:
        t_mat = _random_matrix(rng, cutoff)
        s_mat = _random_matrix(rng, cutoff)
        xt = lm.phi(xi, t_mat)
        es = lm.phi(eta, s_mat)
        lhs = hermitian_inner(mod2, xt, es)
        ut = {(0, q): v for (p, q), v in t_mat.items()}
        us = {(0, q): v for (p, q), v in s_mat.items()}
        # (uT)* (uS) = sum over q, q' of conj(T_0q) S_0q' e_{q q'}
        prod = {}
        for (_, q), tv in ut.items():
            for (_, q2), sv in us.items():
                prod[(q, q2)] = prod.get((q, q2), ZERO) + tv.conjugate() * sv
        rhs = lm.lift_alg(hermitian_inner(module, xi, eta), prod)
        herm = herm and lhs == rhs
        back = lm.psi(xt)
        expect = {}
        for (_, q), tv in sorted(ut.items()):
            if tv:
                expect[q] = [{i: c * tv for i, c in x.items()} for x in xi]
        iso = iso and _clean(back) == _clean(expect) and mod2.contains(xt)
    report["hermitian_lift"] = herm
    report["phi_psi_identity"] = iso
    # Grassmannian preservation
    g_lift = lift_connection(grass, lm)
    g2 = grassmannian(mod2)
    report["grassmannian_preserved"] = all(
        mod2.pi_vec(g_lift.gamma[k]) == mod2.pi_vec(g2.gamma[k]) for k in range(n))
    # injectivity on random pairs and affineness
    inj = True
    affine = True
    distinct = 0
    attempts = 0
    while distinct < pairs and attempts < 10 * pairs:
        attempts += 1
        a1 = random_perturbation(module, rng)
        a2 = random_perturbation(module, rng)
        c1, c2 = perturbed(grass, a1), perturbed(grass, a2)
        base_differ = any(module.pi_vec(c1.gamma[k]) != module.pi_vec(c2.gamma[k]) for k in range(n))
        l1, l2 = lift_connection(c1, lm), lift_connection(c2, lm)
        lift_differ = any(mod2.pi_vec(l1.gamma[k]) != mod2.pi_vec(l2.gamma[k]) for k in range(n))
        distinct += base_differ
        inj = inj and (lift_differ or not base_differ)
        psi1 = psi_map(lm, a1)
        via = perturbed(lift_connection(grass, lm), psi1)
        affine = affine and all(mod2.pi_vec(l1.gamma[k]) == mod2.pi_vec(via.gamma[k]) for k in range(n))
    report["injective_pairs"] = inj and distinct == pairs
    report["distinct_pairs"] = distinct
    report["affine"] = affine
    report["diagram"] = verify_diagram(conn, lm)
    report["diagram_grassmannian"] = verify_diagram(grass, lm)
    return report


def _clean(d: Mapping) -> dict:
    return {q: [{i: c for i, c in x.items() if c} for x in vec] for q, vec in d.items()
            if any(any(c for c in x.values()) for x in vec)}
