"""Command-line driver: verification suites, computations and a content-addressed result cache.

Every report is canonical JSON (sorted keys, exact scalars as strings,
0-based matrix indices) so that a fixed configuration always produces the
same bytes, whatever the number of worker processes.  Human-facing lines
go to stderr and use 1-based matrix indices.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from math import ceil
from pathlib import Path
from typing import Callable

from . import __version__
from .conn import (
    ModuleMismatch,
    bott_projection,
    connection_suite,
    corner_projection,
    curvature,
    grassmannian,
    lift_connection,
    lift_module,
    verify_diagram,
)
from .forms import (
    expected_circle_value,
    form_space,
    verify_corollary,
    verify_decomposition,
    verify_doubling,
    verify_qds_theorem,
    witness_suite,
)
from .oper import BOUNDED, CALKIN, MODES, CutoffTooSmall
from .triple import TripleDescriptor, check_conditions, circle_triple, point_triple, qds_of

SUITES = (
    "s_calculus",
    "laurent",
    "base",
    "decomposition",
    "theorem",
    "corollary",
    "doubling",
    "conditions",
    "witnesses",
    "connections",
)
REPORT_SCHEMA = "qdscalc.report/1"
ARTIFACT_SCHEMA = "qdscalc.artifact/1"


class ConfigInvalid(ValueError):
    """A configuration value is missing, malformed or out of range."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    base: str = "circle"
    fourier_window: int = 8
    gen_degree: int = 1
    qds_iterations: int = 1
    cutoffs: list = field(default_factory=lambda: [6])
    word_budget: int = 3
    mode: str | None = None
    suites: list = field(default_factory=lambda: list(SUITES))
    connection_budget: int = 8
    lift_cutoff: int = 2
    seed: int = 0
    cache_dir: str | None = None
    out: str = "-"
    jobs: int = 1

    # fields that do not change any computed value stay out of the hash
    _RUNTIME = ("cache_dir", "out", "jobs")

    def validate(self) -> "RunConfig":
        if self.base not in ("point", "circle"):
            raise ConfigInvalid(f"base must be 'point' or 'circle', got {self.base!r}")
        positive = {
            "fourier_window": self.fourier_window,
            "gen_degree": self.gen_degree,
            "word_budget": self.word_budget,
            "connection_budget": self.connection_budget,
            "lift_cutoff": self.lift_cutoff,
            "jobs": self.jobs,
        }
        for name, value in positive.items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigInvalid(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.qds_iterations, int) or self.qds_iterations < 0:
            raise ConfigInvalid(f"qds_iterations must be a non-negative integer, got {self.qds_iterations!r}")
        if not self.cutoffs or any(not isinstance(m, int) or m < 1 for m in self.cutoffs):
            raise ConfigInvalid(f"cutoffs must be positive integers, got {self.cutoffs!r}")
        if self.mode is not None and self.mode not in MODES:
            raise ConfigInvalid(f"mode must be one of {MODES}, got {self.mode!r}")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigInvalid(f"unknown suites {unknown}; choose from {', '.join(SUITES)}")
        return self

    def cutoff(self, level: int) -> int:
        """Cutoff of the given suspension level (0 is the first); the last entry repeats."""
        return self.cutoffs[min(level, len(self.cutoffs) - 1)]

    def canonical(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in self._RUNTIME}

    def config_hash(self) -> str:
        return sha256_json(self.canonical())

    def base_triple(self) -> TripleDescriptor:
        if self.base == "point":
            return point_triple()
        return circle_triple(self.fourier_window, self.gen_degree)

    def tower(self, levels: int | None = None) -> TripleDescriptor:
        t = self.base_triple()
        for level in range(self.qds_iterations if levels is None else levels):
            t = qds_of(t, self.cutoff(level))
        return t


def config_from_mapping(data: dict) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigInvalid(f"unknown configuration keys {unknown}")
    cfg = RunConfig(**data)
    cfg.cutoffs = list(cfg.cutoffs)
    cfg.suites = list(cfg.suites)
    return cfg.validate()


def canonical_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def sha256_json(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def environment_stamp() -> dict:
    import gmpy2

    return {
        "package": __version__,
        "python": platform.python_version(),
        "gmpy2": gmpy2.version(),
        "arithmetic": "exact Gaussian rationals",
    }


# ---------------------------------------------------------------------------
# records


class _Suite:
    """Collects records for one suite; a failing check is captured, never raised."""

    def __init__(self, name: str):
        self.name = name
        self.records: list[dict] = []
        self.lines: list[str] = []

    def check(self, check_id: str, anchor: str, parameters: dict, expected,
              compute: Callable[[], object], passed: Callable[[object], bool] | None = None,
              human: Callable[[object], str] | None = None) -> None:
        record = {"id": f"{self.name}/{check_id}", "anchor": anchor, "parameters": parameters,
                  "expected": expected}
        try:
            computed = compute()
        except Exception as exc:  # captured per record by design
            record["computed"] = None
            record["error"] = f"{type(exc).__name__}: {exc}"
            record["pass"] = False
        else:
            record["computed"] = computed
            record["pass"] = bool(passed(computed) if passed else computed == expected)
        self.records.append(record)
        text = f"{'PASS' if record['pass'] else 'FAIL'} {record['id']}"
        if "error" in record:
            text += f"  [{record['error']}]"
        elif human is not None:
            text += f"  {human(record['computed'])}"
        self.lines.append(text)


def _flags(report: dict) -> dict:
    return {k: v for k, v in report.items() if isinstance(v, bool)}


def reachable_monomials(window: int, gen_degree: int, budget: int, degree: int) -> int:
    """Number of distinct exponents z^(k0 + ... + kn) over words of total weight at most ``budget``.

    Brute-force enumeration that ignores all operator structure: slots
    beyond the first need k != 0, and the weight of z^k is ceil(|k| / g).
    """
    def weight(k):
        return ceil(abs(k) / gen_degree)

    exps = range(-window, window + 1)
    frontier = {(k, weight(k)) for k in exps if weight(k) <= budget}
    for _ in range(degree):
        frontier = {(s + k, w + weight(k)) for s, w in frontier for k in exps
                    if k != 0 and w + weight(k) <= budget}
    return len({s for s, _ in frontier if abs(s) <= window})


# ---------------------------------------------------------------------------
# suites


def _suite_s_calculus(cfg: RunConfig) -> _Suite:
    su = _Suite("s_calculus")
    m = cfg.cutoff(0)
    t = qds_of(point_triple(), m)
    budgets = [cfg.word_budget, cfg.word_budget + 1]
    params = {"triple": list(t.descriptor()), "family": "finite", "mode": BOUNDED,
              "degrees": [0, 1, 2, 3], "budgets": budgets}

    def dims():
        return [[form_space(t, p, BOUNDED).omega(n, "finite").quotient_dim for n in range(4)] for p in budgets]

    su.check("omega_dims", "finite-matrix forms: Omega^0 = Omega^1 = S (dimension m^2), Omega^n = 0 for n >= 2",
             params, [[m * m, m * m, 0, 0]] * 2, dims, human=lambda c: f"dims {c[0]}")
    return su


def _suite_laurent(cfg: RunConfig) -> _Suite:
    su = _Suite("laurent")
    m = cfg.cutoff(0)
    t = qds_of(point_triple(), m)
    params = {"triple": list(t.descriptor()), "family": "laurent", "mode": CALKIN, "degrees": [0, 1, 2],
              "budget": cfg.word_budget}
    su.check("omega_dims", "Laurent forms modulo compacts: Omega^0 = Omega^1 = C[z, z^-1] in the window, Omega^2 = 0",
             params, [2 * m + 1, 2 * m + 1, 0],
             lambda: [form_space(t, cfg.word_budget, CALKIN).omega(n, "laurent").quotient_dim for n in range(3)],
             human=lambda c: f"dims {c}")
    return su


def _suite_base(cfg: RunConfig) -> _Suite:
    su = _Suite("base")
    t = cfg.base_triple()
    mode = cfg.mode or t.default_mode
    p = cfg.word_budget
    if cfg.base == "circle":
        expected = [reachable_monomials(cfg.fourier_window, cfg.gen_degree, p, 0),
                    reachable_monomials(cfg.fourier_window, cfg.gen_degree, p, 1), 0]
        anchor = "circle forms reproduce de Rham forms: Omega^0, Omega^1 are the reachable monomials, Omega^2 = 0"
    else:
        expected = [1, 0, 0]
        anchor = "the point has Omega^0 = C and no higher forms"
    params = {"triple": list(t.descriptor()), "mode": mode, "budget": p, "degrees": [0, 1, 2]}
    su.check("omega_dims", anchor, params, expected,
             lambda: [form_space(t, p, mode).omega(n).quotient_dim for n in range(3)],
             human=lambda c: f"dims {c}")
    return su


def _suite_decomposition(cfg: RunConfig) -> _Suite:
    su = _Suite("decomposition")
    t = qds_of(cfg.base_triple(), cfg.cutoff(0))
    keys = ("sum_equal", "direct", "graded_equal")
    for n in (1, 2):
        params = {"triple": list(t.descriptor()), "degree": n, "budget": cfg.word_budget, "mode": cfg.mode}

        def run(n=n):
            r = verify_decomposition(t, n, cfg.word_budget, cfg.mode)
            return {k: r[k] for k in keys} | {"intersection_dim": r["intersection_dim"]}

        su.check(f"degree_{n}", "image of forms on the suspension = (A (x) S part) (+) (Laurent part), meeting in 0",
                 params, {k: True for k in keys} | {"intersection_dim": 0}, run)
    return su


def _suite_theorem(cfg: RunConfig) -> _Suite:
    su = _Suite("theorem")
    base = cfg.base_triple()
    m = cfg.cutoff(0)
    for n in (1, 2):
        params = {"base": list(base.descriptor()), "cutoff": m, "degree": n, "budget": cfg.word_budget,
                  "mode": cfg.mode}

        def run(n=n):
            r = verify_qds_theorem(base, n, m, cfg.word_budget, cfg.mode)
            return _flags(r) | {"qds_dim": r["qds_dim"], "expected_dim": r["expected_dim"]}

        su.check(f"degree_{n}",
                 "Omega^1 = Omega^1(A) (x) S (+) F(Sigma^2 A), Omega^2 = Omega^2(A) (x) S, "
                 "delta0 a(x)T = [D,a](x)T (+) (a(x)[N,T] + f'), delta1 kills the suspension summand",
                 params, None, run,
                 passed=lambda c: all(v for k, v in c.items() if isinstance(v, bool))
                 and c["qds_dim"] == c["expected_dim"],
                 human=lambda c: f"dim {c['qds_dim']}")
    return su


def _suite_corollary(cfg: RunConfig) -> _Suite:
    su = _Suite("corollary")
    if cfg.qds_iterations < 2:
        return su
    base = cfg.base_triple()
    cutoffs = [cfg.cutoff(0), cfg.cutoff(1)]
    params = {"base": list(base.descriptor()), "cutoffs": cutoffs, "budget": cfg.word_budget, "mode": cfg.mode}
    cache: dict = {}

    def result():
        if "r" not in cache:
            cache["r"] = verify_corollary(base, cutoffs, cfg.word_budget, cfg.mode)
        return cache["r"]

    def top():
        r = result()
        return {"omega2_dim": r["omega2_dim"], "omega2_expected": r["omega2_expected"]}

    su.check("omega2", "two suspensions: Omega^2 = Omega^2(A) (x) S (x) S", params, None, top,
             passed=lambda c: c["omega2_dim"] == c["omega2_expected"],
             human=lambda c: f"dim {c['omega2_dim']}")

    def split():
        r = result()
        return {k: r[k] for k in ("omega1_dim", "predicted_omega1_dim", "piece_ranks", "union_rank", "overlap_dim")}

    su.check("omega1_splitting",
             "two suspensions: Omega^1 = Omega^1(A) (x) S (x) S (+) F(Sigma^2 A) (x) S (+) F(Sigma^4 A)",
             params, None, split,
             passed=lambda c: c["overlap_dim"] == 0 and c["union_rank"] == c["omega1_dim"] == c["predicted_omega1_dim"],
             human=lambda c: f"dim {c['omega1_dim']} vs {c['predicted_omega1_dim']}, overlap {c['overlap_dim']}")
    return su


def _suite_doubling(cfg: RunConfig) -> _Suite:
    su = _Suite("doubling")
    t = cfg.base_triple()
    params = {"triple": list(t.descriptor()), "budget": cfg.word_budget, "degrees": [0, 1, 2], "mode": cfg.mode}
    cache: dict = {}

    def result():
        if "r" not in cache:
            cache["r"] = verify_doubling(t, cfg.word_budget, (0, 1, 2), cfg.mode)
        return cache["r"]

    su.check("dims", "the Pauli double has the same forms as the original triple", params, None,
             lambda: {"dims": result()["dims"], "doubled_dims": result()["doubled_dims"]},
             passed=lambda c: c["dims"] == c["doubled_dims"], human=lambda c: f"dims {c['dims']}")
    su.check("f_intersection", "F~A~ meets A~ only in 0", params, True,
             lambda: result()["f_intersection_trivial"])
    return su


def _suite_conditions(cfg: RunConfig) -> _Suite:
    su = _Suite("conditions")
    triples = [cfg.base_triple()]
    for level in range(max(cfg.qds_iterations, 1)):
        triples.append(qds_of(triples[-1], cfg.cutoff(level)))
    triples.append(qds_of(qds_of(point_triple(), cfg.cutoff(0)), cfg.cutoff(1)))
    seen = set()
    for t in triples:
        desc = t.descriptor()
        if desc in seen:
            continue
        seen.add(desc)
        su.check(f"condition_A/{_slug(desc)}", "[D,a]F - F[D,a] is compact for every generator a",
                 {"triple": list(desc)}, True, lambda t=t: check_conditions(t).condition_A)
    return su


def _slug(desc) -> str:
    if isinstance(desc, tuple):
        return "(" + ",".join(_slug(x) for x in desc) + ")"
    return str(desc)


def _suite_witnesses(cfg: RunConfig) -> _Suite:
    su = _Suite("witnesses")
    m = cfg.cutoff(0)
    t = qds_of(point_triple(), m)
    for n in range(1, 6):
        params = {"triple": list(t.descriptor()), "degree": n, "mode": BOUNDED}

        def zeta(n=n):
            r = witness_suite(t, "matrix_zeta", n)
            return {"pi_zero": r["pi_zero"], "d_nonzero": r["d_nonzero"],
                    "value": _terms_json(t, r["terms"])}

        su.check(f"matrix_zeta/{n}", "pi(zeta_n) = 0 while pi(d zeta_n) != 0 for finite-matrix witnesses",
                 params, None, zeta, passed=lambda c: c["pi_zero"] and c["d_nonzero"],
                 human=lambda c, n=n: "pi(d zeta) = " + _pretty(t, c["value"]))
    for n in range(1, 6):
        params = {"triple": list(t.descriptor()), "degree": n, "mode": CALKIN}

        def omega(n=n):
            r = witness_suite(t, "circle_omega", n)
            value = r["value"]
            return {"pi_zero": r["pi_zero"], "value": None if value is None else value.to_json()}

        expected = {"pi_zero": True, "value": str(expected_circle_value(n))}
        su.check(f"circle_omega/{n}", "pi(d omega_n) = -2, -4, 2, 4, -2, ... for the Laurent witnesses",
                 params, expected, omega, human=lambda c: f"pi(d omega) = {c['value']}")
    return su


def _terms_json(t: TripleDescriptor, terms: dict) -> list:
    return [[t.layer.render_key(k), terms[k].to_json()] for k in sorted(terms)]


def _pretty(t: TripleDescriptor, value: list) -> str:
    """1-based rendering of a 0-based term list."""
    by_label = {t.layer.render_key(k): k for k in _keys_of(t)}
    parts = []
    for label, coef in value:
        key = by_label.get(label)
        shown = t.layer.render_key(key, one_based=True) if key is not None else label
        parts.append(f"{coef}*{shown}")
    return " + ".join(parts) if parts else "0"


def _keys_of(t: TripleDescriptor):
    m = t.layer.cutoff
    inner = t.inner.layer.unit_key
    for p in range(m):
        for q in range(m):
            yield ("e", p, q, inner)


def _suite_connections(cfg: RunConfig) -> _Suite:
    su = _Suite("connections")
    modules = []
    if cfg.base == "circle":
        modules.append(("bott", lambda: bott_projection(
            form_space(cfg.base_triple(), cfg.connection_budget, CALKIN))))
    toeplitz = qds_of(point_triple(), cfg.cutoff(0))
    modules.append(("corner", lambda: corner_projection(form_space(toeplitz, 1, BOUNDED))))
    names = ("leibniz", "compatibility", "curvature_right_linear", "grassmannian_curvature_pdpdp",
             "prop_formula_matches", "lifted_leibniz", "lifted_compatibility", "hermitian_lift",
             "phi_psi_identity", "grassmannian_preserved", "injective_pairs", "affine")
    for label, build in modules:
        params = {"module": label, "lift_cutoff": cfg.lift_cutoff, "seed": cfg.seed}

        def run(build=build):
            r = connection_suite(build(), cfg.lift_cutoff, seed=cfg.seed)
            out = {k: r[k] for k in names}
            out["distinct_pairs"] = r["distinct_pairs"]
            for which in ("diagram", "diagram_grassmannian"):
                out[which] = r[which]
            return out

        def ok(c):
            diagrams = all(c[w]["operators_equal"] and c[w]["classes_equal"]
                           for w in ("diagram", "diagram_grassmannian"))
            return all(c[k] for k in names) and diagrams

        su.check(label, "connections lift through the suspension and curvature(lift) = psi(curvature)",
                 params, None, run, passed=ok,
                 human=lambda c: "degenerate diagram" if c["diagram"]["degenerate"] else "nondegenerate diagram")
    return su


_SUITE_FUNCS = {
    "s_calculus": _suite_s_calculus,
    "laurent": _suite_laurent,
    "base": _suite_base,
    "decomposition": _suite_decomposition,
    "theorem": _suite_theorem,
    "corollary": _suite_corollary,
    "doubling": _suite_doubling,
    "conditions": _suite_conditions,
    "witnesses": _suite_witnesses,
    "connections": _suite_connections,
}


def _run_one(args: tuple) -> tuple[list, list]:
    name, data = args
    cfg = config_from_mapping(data)
    try:
        su = _SUITE_FUNCS[name](cfg)
    except Exception as exc:  # setup failures become one failing record
        su = _Suite(name)
        su.check("setup", "suite parameters are admissible", {}, None, lambda: _raise(exc))
    return su.records, su.lines


def _raise(exc: Exception):
    raise exc


def run_suite(cfg: RunConfig) -> tuple[dict, list[str]]:
    """Run the configured suites; records keep suite order regardless of ``jobs``."""
    cfg.validate()
    order = [s for s in SUITES if s in cfg.suites]
    data = asdict(cfg)
    tasks = [(name, data) for name in order]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(task) for task in tasks]
    records, lines = [], []
    for recs, text in results:
        records.extend(recs)
        lines.extend(text)
    failed = sum(1 for r in records if not r["pass"])
    report = {
        "schema": REPORT_SCHEMA,
        "index_base": 0,
        "config": cfg.canonical(),
        "config_hash": cfg.config_hash(),
        "environment": environment_stamp(),
        "records": records,
        "summary": {"total": len(records), "passed": len(records) - failed, "failed": failed},
    }
    return report, lines


# ---------------------------------------------------------------------------
# computations


def compute_artifact(cfg: RunConfig, target: str, degree: int = 1, family: str = "full") -> dict:
    """Omega space, junk basis or lifted connection of the configured tower, as 0-based JSON."""
    t = cfg.tower()
    mode = cfg.mode or t.default_mode
    head = {"schema": ARTIFACT_SCHEMA, "index_base": 0, "target": target, "triple": list(t.descriptor()),
            "config_hash": cfg.config_hash()}
    if target == "omega":
        omega = form_space(t, cfg.word_budget, mode).omega(degree, family)
        return head | {"omega": omega.to_json()}
    if target == "junk":
        space = form_space(t, cfg.word_budget, mode)
        junk = space.junk_span(degree, family)
        rows = [[[t.layer.render_key(k), row[k].to_json()] for k in sorted(row)] for row in junk.window_rows()]
        return head | {"junk": {"degree": degree, "family": family, "mode": mode, "dim": junk.dim,
                                "dim_full": junk.dim_full, "basis": rows}}
    if target == "connection-lift":
        return head | {"connection_lift": lift_artifact(cfg, t)}
    raise ConfigInvalid(f"unknown compute target {target!r}")


def lift_artifact(cfg: RunConfig, t: TripleDescriptor | None = None) -> dict:
    """Grassmannian connection of the standard module over ``t`` and its lift, in class coordinates."""
    t = t or cfg.tower()
    if t.kind == "circle":
        module = bott_projection(form_space(t, cfg.connection_budget, CALKIN))
        label = "bott"
    elif t.kind == "qds":
        module = corner_projection(form_space(t, 1 if t.default_mode == BOUNDED else cfg.word_budget,
                                             cfg.mode or t.default_mode))
        label = "corner"
    else:
        raise ModuleMismatch("no standard module over this triple; add a suspension or use the circle")
    conn = grassmannian(module)
    lm = lift_module(module, cfg.lift_cutoff)
    lifted = lift_connection(conn, lm)
    return {
        "module": label,
        "rank": module.n,
        "lift_cutoff": cfg.lift_cutoff,
        "connection": _class_matrix(module.space, [module.pi_vec(col) for col in conn.gamma]),
        "lifted_connection": _class_matrix(lm.module.space, [lm.module.pi_vec(col) for col in lifted.gamma]),
        "curvature": _class_matrix(module.space, [module.pi_vec(row) for row in curvature(conn)], degree=2),
        "diagram": verify_diagram(conn, lm),
    }


def _class_matrix(space, columns, degree: int = 1) -> list:
    omega = space.omega(degree)
    layer = space.layer
    out = []
    for col in columns:
        cells = []
        for vec in col:
            coords = omega.class_coords(vec)
            cells.append([[layer.render_key(k), coords[k].to_json()] for k in sorted(coords)])
        out.append(cells)
    return out


def cached(cfg: RunConfig, request: dict, produce: Callable[[], dict]) -> bytes:
    """Canonical bytes for ``request``, served from ``cfg.cache_dir`` when the key matches."""
    key = sha256_json({"request": request, "config": cfg.canonical()})
    path = Path(cfg.cache_dir) / f"{key}.json" if cfg.cache_dir else None
    if path is not None and path.exists():
        return path.read_bytes()
    data = canonical_bytes(produce())
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)
    return data


# ---------------------------------------------------------------------------
# argument handling


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _suite_list(text: str) -> list[str]:
    if text.strip() == "all":
        return list(SUITES)
    return [s.strip() for s in text.split(",") if s.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file mirroring the run configuration")
    p.add_argument("--base", choices=("point", "circle"))
    p.add_argument("--fourier-window", type=int, dest="fourier_window")
    p.add_argument("--gen-degree", type=int, dest="gen_degree")
    p.add_argument("--qds-iterations", type=int, dest="qds_iterations")
    p.add_argument("--cutoff", type=_int_list, dest="cutoffs", help="cutoff per suspension level, e.g. 6 or 3,3")
    p.add_argument("--word-budget", type=int, dest="word_budget")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--connection-budget", type=int, dest="connection_budget")
    p.add_argument("--lift-cutoff", type=int, dest="lift_cutoff")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file, '-' for stdout")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdscalc", description="Exact noncommutative differential forms "
                                     "on suspension towers of spectral triples.")
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run verification suites and write a JSON report")
    _common(verify)
    verify.add_argument("--suite", type=_suite_list, dest="suites",
                        help=f"comma-separated subset of: {', '.join(SUITES)} (or 'all'; '' for none)")
    compute = sub.add_parser("compute", help="write one computed object as JSON; the tower has no "
                             "suspensions unless --qds-iterations is given")
    compute.add_argument("target", choices=("omega", "junk", "connection-lift"))
    compute.add_argument("--degree", type=int, default=1)
    compute.add_argument("--family", choices=("full", "finite", "laurent"), default="full")
    _common(compute)
    lift = sub.add_parser("lift", help="lift the Grassmannian connection of the standard module one level up")
    _common(lift)
    return parser


_NON_CONFIG = {"command", "config", "target", "degree", "family"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.command in ("compute", "lift"):
        data["qds_iterations"] = 0
    if args.config:
        try:
            data.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config file {args.config}: {exc}") from None
    for key, value in vars(args).items():
        if key not in _NON_CONFIG and value is not None:
            data[key] = value
    return config_from_mapping(data)


def _emit(data: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify":
        report, lines = run_suite(cfg)
        for line in lines:
            print(line, file=sys.stderr)
        _emit(canonical_bytes(report), cfg.out)
        return 1 if report["summary"]["failed"] else 0
    try:
        if args.command == "compute":
            request = {"command": "compute", "target": args.target, "degree": args.degree, "family": args.family}
            data = cached(cfg, request, lambda: compute_artifact(cfg, args.target, args.degree, args.family))
        else:
            data = cached(cfg, {"command": "lift"}, lambda: {"schema": ARTIFACT_SCHEMA, "index_base": 0,
                                                              "config_hash": cfg.config_hash(),
                                                              "connection_lift": lift_artifact(cfg)})
    except (CutoffTooSmall, ModuleMismatch, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}. Raise --cutoff or --word-budget, "
              "or add a suspension level with --qds-iterations.", file=sys.stderr)
        return 1
    _emit(data, cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
