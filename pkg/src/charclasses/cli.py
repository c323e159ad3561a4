"""Scenario-file driver.

A scenario is a YAML document declaring a chart, one algebroid, complexes,
metrics, connections and splittings, followed by an ordered task list.
Indices in files and reports are 1-based.  Exit status: 0 success,
1 violation or task error, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import acyclic, chern, cohomology, reps
from .algebroid import GForm, InvalidAlgebroidError, LieAlgebroid, d_algebroid
from .exactalg import Context, Field, Matrix, ParseError, RatExpr
from .superbundle import (GConnection, GradingError, MatrixGForm, Metric, SuperComplex,
                          adjoint_connection, cov_ext_derivative, curvature, flat_up_to_homotopy,
                          metric_connection, supertrace)

OK, VIOLATION, UNDECIDED, ERROR = "OK", "VIOLATION", "UNDECIDED", "ERROR"


class ScenarioError(Exception):
    """Malformed scenario: bad syntax, unknown task or undeclared name."""


# ---------------------------------------------------------------- serialization

def expr(v: RatExpr) -> str:
    return str(v)


def form_payload(w: GForm) -> dict:
    return {"degree": w.degree,
            "components": [[[i + 1 for i in key], expr(v)] for key, v in w.items()]}


def matrix_payload(m: Matrix) -> list:
    return [[expr(v) for v in row] for row in m.entries]


def matrix_form_payload(w: MatrixGForm) -> dict:
    return {"degree": w.degree,
            "components": [[[i + 1 for i in key], matrix_payload(m)] for key, m in w.items()]}


def parse_form(ctx: Context, decl, where: str) -> GForm:
    if not isinstance(decl, dict) or "degree" not in decl:
        raise ScenarioError(f"{where}: a form needs 'degree' and 'components'")
    comps = {}
    for entry in decl.get("components") or []:
        try:
            idx, text = entry
            key = tuple(int(i) - 1 for i in idx)
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}: components must be [[indices], expr] pairs") from None
        if list(key) != sorted(set(key)) or any(i < 0 for i in key):
            raise ScenarioError(f"{where}: indices {list(idx)} must be increasing and 1-based")
        comps[key] = _parse_expr(ctx, text, where)
    try:
        return GForm(ctx, int(decl["degree"]), comps)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_expr(ctx: Context, text, where: str) -> RatExpr:
    if isinstance(text, bool):
        raise ScenarioError(f"{where}: expected an expression, got {text!r}")
    try:
        return ctx.parse(str(text))
    except ParseError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _sparse(ctx: Context, entries, rows: int, cols: int, where: str) -> Matrix:
    grid = [[ctx.zero] * cols for _ in range(rows)]
    for e in entries or []:
        if not isinstance(e, (list, tuple)) or len(e) != 3:
            raise ScenarioError(f"{where}: sparse entries are [row, col, expr]")
        r, c, text = e
        if not (isinstance(r, int) and isinstance(c, int) and 1 <= r <= rows and 1 <= c <= cols):
            raise ScenarioError(f"{where}: entry ({r}, {c}) outside a {rows}x{cols} matrix")
        grid[r - 1][c - 1] = grid[r - 1][c - 1] + _parse_expr(ctx, text, where)
    return Matrix(ctx, grid, cols)


# ---------------------------------------------------------------- scenario model

@dataclass
class Scenario:
    ctx: Context
    algebroid: LieAlgebroid
    complexes: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    connections: dict = field(default_factory=dict)
    splittings: dict = field(default_factory=dict)
    forms: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)
    build_issues: list = field(default_factory=list)


def load_yaml(text: str, path: str = "<scenario>"):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else path
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError(f"{loc}: {problem}") from None


def _lookup(table: dict, name, kind: str, where: str):
    if name not in table:
        raise ScenarioError(f"{where}: reference to undeclared {kind} {name!r}")
    return table[name]


def build_scenario(doc, field_override: str | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    try:
        fld = Field.parse(field_override or doc.get("field", "Q"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    chart = [str(c) for c in doc.get("chart") or []]
    params = [str(p) for p in doc.get("parameters") or []]
    try:
        ctx = Context(tuple(chart + params), fld)
    except ValueError as exc:
        raise ScenarioError(f"chart: {exc}") from None
    alg = doc.get("algebroid")
    if not isinstance(alg, dict) or "rank" not in alg:
        raise ScenarioError("algebroid: block with 'rank' is required")
    n, m = int(alg["rank"]), len(chart)
    rows = alg.get("anchor") or [["0"] * m for _ in range(n)]
    if len(rows) != n or any(len(r) != m for r in rows):
        raise ScenarioError(f"algebroid.anchor: expected {n} rows of {m} expressions")
    anchor = Matrix(ctx, [[_parse_expr(ctx, e, "algebroid.anchor") for e in r] for r in rows], m)
    triples = []
    for t in alg.get("structure") or []:
        if not isinstance(t, (list, tuple)) or len(t) != 4:
            raise ScenarioError("algebroid.structure: entries are [i, j, k, expr]")
        i, j, k, text = t
        triples.append((i, j, k, _parse_expr(ctx, text, "algebroid.structure")))
    try:
        A = LieAlgebroid.from_triples(ctx, _chart(chart), n, anchor, triples)
    except (ValueError, IndexError) as exc:
        raise ScenarioError(f"algebroid.structure: {exc}") from None
    sc = Scenario(ctx, A)
    valid = not A.violations
    for idx, decl in enumerate(doc.get("complexes") or []):
        where = f"complexes[{idx + 1}]"
        name = _name(decl, where)
        try:
            sc.complexes[name] = _build_complex(sc, decl, where)
        except (GradingError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            sc.build_issues.append((where, str(exc)))
    for idx, decl in enumerate(doc.get("metrics") or []):
        where = f"metrics[{idx + 1}]"
        name = _name(decl, where)
        E = _lookup(sc.complexes, decl.get("complex"), "complex", where)
        H = _sparse(ctx, decl.get("entries"), E.rank, E.rank, where)
        try:
            sc.metrics[name] = Metric(H, E)
        except (GradingError, ValueError) as exc:
            sc.build_issues.append((where, str(exc)))
    for idx, decl in enumerate(doc.get("splittings") or []):
        where = f"splittings[{idx + 1}]"
        sc.splittings[_name(decl, where)] = _build_splitting(sc, decl, where)
    for idx, decl in enumerate(doc.get("forms") or []):
        where = f"forms[{idx + 1}]"
        sc.forms[_name(decl, where)] = parse_form(ctx, decl, where)
    for idx, decl in enumerate(doc.get("connections") or []):
        where = f"connections[{idx + 1}]"
        name = _name(decl, where)
        if not valid:
            continue
        try:
            sc.connections[name] = _build_connection(sc, decl, where)
        except ScenarioError:
            raise
        except (GradingError, ValueError, AssertionError) as exc:
            sc.build_issues.append((where, str(exc)))
    tasks = doc.get("tasks") or []
    if not isinstance(tasks, list):
        raise ScenarioError("tasks: must be a list")
    for idx, t in enumerate(tasks):
        if isinstance(t, str):
            t = {t: {}}
        if not isinstance(t, dict) or len(t) != 1:
            raise ScenarioError(f"tasks[{idx + 1}]: each task is a name or a one-key mapping")
        (kind, params), = t.items()
        if kind not in TASKS:
            raise ScenarioError(f"tasks[{idx + 1}]: unknown task {kind!r}")
        sc.tasks.append((kind, params or {}))
    return sc


def _chart(coords):
    from .algebroid import Chart
    return Chart(tuple(coords))


def _name(decl, where: str) -> str:
    if not isinstance(decl, dict) or "name" not in decl:
        raise ScenarioError(f"{where}: declaration needs a 'name'")
    return str(decl["name"])


def _build_complex(sc: Scenario, decl: dict, where: str) -> SuperComplex:
    ctx, A = sc.ctx, sc.algebroid
    if decl.get("adjoint"):
        if A.violations:
            raise ValueError("adjoint complex of an invalid algebroid")
        return reps.adjoint_complex(A)
    if "ranks" in decl:
        ranks = [int(r) for r in decl["ranks"]]
        r = sum(ranks)
        return SuperComplex.graded(ctx, ranks, _sparse(ctx, decl.get("partial"), r, r, where))
    if "super" in decl:
        r0, r1 = (int(v) for v in decl["super"])
        return SuperComplex.super_pair(ctx, r0, r1, _sparse(ctx, decl.get("partial"), r0 + r1, r0 + r1, where))
    raise ScenarioError(f"{where}: complex needs 'ranks', 'super' or 'adjoint: true'")


def _build_splitting(sc: Scenario, decl: dict, where: str) -> reps.Splitting:
    ctx, A = sc.ctx, sc.algebroid
    n, m = A.rank, A.chart.dim_m
    r = int(decl.get("rank_f", 0))
    F = _sparse(ctx, decl.get("F"), m, r, where + ".F")
    alpha = _sparse(ctx, decl.get("alpha"), n, r, where + ".alpha")
    beta = _sparse(ctx, decl.get("beta"), r, m, where + ".beta")
    K = _sparse(ctx, decl.get("K"), n, n - r, where + ".K") if "K" in decl else None
    N = _sparse(ctx, decl.get("N"), m, m - r, where + ".N") if "N" in decl else None
    return reps.Splitting(F, alpha, beta, K, N)


def _build_connection(sc: Scenario, decl: dict, where: str) -> GConnection:
    ctx, A = sc.ctx, sc.algebroid
    n, m = A.rank, A.chart.dim_m
    if "basic" in decl:
        aux_spec = (decl.get("basic") or {}).get("aux") if isinstance(decl.get("basic"), dict) else None
        aux = None
        if aux_spec is not None:
            if len(aux_spec) != m:
                raise ScenarioError(f"{where}: aux needs {m} sparse matrices")
            aux = [_sparse(ctx, a, n, n, f"{where}.aux[{i + 1}]") for i, a in enumerate(aux_spec)]
        return reps.basic_connection(A, aux)
    if "splitting" in decl:
        s = _lookup(sc.splittings, decl["splitting"], "splitting", where)
        r = s.rank_f
        fc = decl.get("f_connection")
        nf = [_sparse(ctx, g, r, r, f"{where}.f_connection[{i + 1}]") for i, g in enumerate(fc)] if fc else None
        return reps.regular_splitting_connection(A, s, nf)
    if "metric_connection" in decl:
        h = _lookup(sc.metrics, decl["metric_connection"], "metric", where)
        return metric_connection(h, A)
    if "adjoint_of" in decl:
        info = decl["adjoint_of"]
        base = _lookup(sc.connections, info.get("connection"), "connection", where)
        h = _lookup(sc.metrics, info.get("metric"), "metric", where)
        return adjoint_connection(base, h)
    E = _lookup(sc.complexes, decl.get("complex"), "complex", where)
    omegas = decl.get("omegas") or [[] for _ in range(n)]
    if len(omegas) != n:
        raise ScenarioError(f"{where}: omegas must list {n} sparse matrices")
    mats = tuple(_sparse(ctx, w, E.rank, E.rank, f"{where}.omegas[{i + 1}]") for i, w in enumerate(omegas))
    return GConnection(A, E, mats)


# ---------------------------------------------------------------- tasks

def _conn(sc, params, key="connection"):
    return _lookup(sc.connections, params.get(key), "connection", key)


def _p(params) -> int:
    p = params.get("p", 1)
    if not isinstance(p, int) or p < 1:
        raise ScenarioError(f"p must be a positive integer, got {p!r}")
    return p


def task_validate(sc, params, opts):
    v = list(sc.algebroid.violations)
    issues = [f"{w}: {msg}" for w, msg in sc.build_issues]
    status = OK if not v and not issues else VIOLATION
    return status, {"algebroid_violations": v, "declaration_issues": issues}


def task_cohomology(sc, params, opts):
    return OK, {"dims": list(cohomology.cohomology_dims(sc.algebroid))}


def task_ch(sc, params, opts):
    nb, p = _conn(sc, params), _p(params)
    w = chern.chern_character(nb, p)
    closed = d_algebroid(sc.algebroid, w).is_zero()
    return (OK if closed else VIOLATION), {"form": form_payload(w), "closed": closed}


def _conn_list(sc, params):
    names = params.get("connections") or []
    return [_lookup(sc.connections, nm, "connection", "connections") for nm in names]


def task_cs(sc, params, opts):
    w = chern.chern_simons(_conn_list(sc, params), _p(params))
    return OK, {"form": form_payload(w)}


def task_stokes(sc, params, opts):
    r = chern.verify_stokes(_conn_list(sc, params), _p(params))
    return (OK if r.is_zero() else VIOLATION), {"residual": form_payload(r)}


def task_secondary(sc, params, opts):
    p = _p(params)
    pathway = str(params.get("pathway", "ii"))
    if pathway == "real":
        nb = _conn(sc, params)
        nm = _conn(sc, params, "metric_connection")
        w = chern.secondary_class_real(nb, nm, p)
    else:
        nb = _conn(sc, params)
        h = _lookup(sc.metrics, params.get("metric"), "metric", "metric")
        if pathway == "ii":
            w = chern.secondary_class_ii(nb, h, p)
        elif pathway == "i":
            start = _conn(sc, params, "start")
            w = chern.secondary_class_i(nb, start, h, p)
        else:
            raise ScenarioError(f"unknown secondary pathway {pathway!r}")
    closed = d_algebroid(sc.algebroid, w).is_zero()
    real = w.is_real()
    return (OK if closed and real else VIOLATION), {"form": form_payload(w), "closed": closed, "real": real}


def _exactness_payload(res) -> dict:
    out = {"outcome": res.outcome.value, "detail": res.detail}
    if res.primitive is not None:
        out["witness"] = form_payload(res.primitive)
    return out


def _window(opts, *forms):
    if opts.truncation is not None:
        return cohomology.TruncationWindow(opts.truncation)
    return cohomology.TruncationWindow.default_for(*forms)


def task_intrinsic(sc, params, opts):
    p = _p(params)
    nb = _conn(sc, params) if "connection" in params else None
    w = reps.intrinsic_classes(sc.algebroid, p, nb)
    payload = {"p": p, "form": form_payload(w)}
    status = OK
    if params.get("decide", True) and w.degree <= sc.algebroid.rank:
        res = cohomology.is_exact(sc.algebroid, w, _window(opts, w))
        payload["class"] = _exactness_payload(res)
        if res.outcome is cohomology.Exactness.NOT_FOUND_AT_TRUNCATION:
            status = UNDECIDED
    return status, payload


def task_bott(sc, params, opts):
    s = _lookup(sc.splittings, params.get("splitting"), "splitting", "splitting")
    b = reps.bott_representation(sc.algebroid, s)
    flat_k, flat_n = curvature(b.kernel).is_zero(), curvature(b.normal).is_zero()
    return (OK if flat_k and flat_n else VIOLATION), {
        "kernel": [matrix_payload(w) for w in b.kernel.omegas],
        "normal": [matrix_payload(w) for w in b.normal.omegas],
        "kernel_flat": flat_k, "normal_flat": flat_n}


def task_fedosov(sc, params, opts):
    nb = _conn(sc, params)
    h = _lookup(sc.metrics, params["metric"], "metric", "metric") if "metric" in params else None
    A = acyclic.fedosov_superconnection(nb.complex, nb, h)
    sq = acyclic.superconnection_square(A)
    flat = all(v.is_zero() for v in sq.values())
    return (OK if flat else VIOLATION), {
        "pieces": {str(j): matrix_form_payload(f) for j, f in sorted(A.pieces.items())},
        "residual": {str(d): matrix_form_payload(v) for d, v in sorted(sq.items())},
        "flat": flat}


def task_flat_up_to_homotopy(sc, params, opts):
    nb = _conn(sc, params)
    eta = flat_up_to_homotopy(nb)
    if eta is None:
        return OK, {"solvable": False}
    return OK, {"solvable": True, "eta": matrix_form_payload(eta)}


def _form_ref(sc, ref, where):
    if isinstance(ref, str):
        return _lookup(sc.forms, ref, "form", where)
    return parse_form(sc.ctx, ref, where)


def task_exact(sc, params, opts):
    w = _form_ref(sc, params.get("form"), "form")
    res = cohomology.is_exact(sc.algebroid, w, _window(opts, w))
    status = UNDECIDED if res.outcome is cohomology.Exactness.NOT_FOUND_AT_TRUNCATION else OK
    return status, _exactness_payload(res)


def task_compare(sc, params, opts):
    forms = params.get("forms") or []
    if len(forms) != 2:
        raise ScenarioError("compare needs exactly two forms")
    w, eta = (_form_ref(sc, f, "forms") for f in forms)
    verdict, witness = cohomology.classes_equal(sc.algebroid, w, eta, _window(opts, w, eta))
    payload = {"verdict": verdict.value}
    if witness is not None:
        payload["witness"] = form_payload(witness)
    return (UNDECIDED if verdict is cohomology.Comparison.UNDECIDED_AT_TRUNCATION else OK), payload


TASKS = {
    "validate": task_validate,
    "cohomology": task_cohomology,
    "ch": task_ch,
    "cs": task_cs,
    "stokes": task_stokes,
    "secondary": task_secondary,
    "intrinsic": task_intrinsic,
    "bott": task_bott,
    "fedosov": task_fedosov,
    "flat_up_to_homotopy": task_flat_up_to_homotopy,
    "exact": task_exact,
    "compare": task_compare,
}


# ---------------------------------------------------------------- invariant suite

def invariant_checks(sc: Scenario) -> list[tuple[str, bool]]:
    A = sc.algebroid
    out = []
    for k in range(A.rank):
        ok = all(d_algebroid(A, d_algebroid(A, GForm.basis(A.ctx, key))).is_zero()
                 for key in cohomology._keys(A.rank, k))
        out.append((f"d^2 = 0 on {k}-forms", ok))
    for name, E in sorted(sc.complexes.items()):
        out.append((f"complex {name}: partial^2 = 0", (E.partial @ E.partial).is_zero()))
    for name, h in sorted(sc.metrics.items()):
        out.append((f"metric {name}: hermitian", h.H == h.H.H))
    for name, nb in sorted(sc.connections.items()):
        k = curvature(nb)
        out.append((f"connection {name}: Bianchi", cov_ext_derivative(nb, k).is_zero()))
        out.append((f"connection {name}: Tr_s d_nabla = d Tr_s",
                    supertrace(cov_ext_derivative(nb, k)) == d_algebroid(A, supertrace(k))))
        for p in (1, 2, 3):
            if 2 * p <= A.rank:
                out.append((f"connection {name}: ch_{p} closed",
                            d_algebroid(A, chern.chern_character(nb, p)).is_zero()))
    return out


# ---------------------------------------------------------------- driver

@dataclass
class Options:
    field: str | None = None
    check: bool = False
    truncation: int | None = None
    fmt: str = "human"


def run_scenario(doc, opts: Options) -> dict:
    sc = build_scenario(doc, opts.field)
    records = []
    queue = [("validate", {})] + [t for t in sc.tasks if t[0] != "validate"]
    blocked = bool(sc.algebroid.violations)
    for kind, params in queue:
        start = time.perf_counter()
        if blocked and kind != "validate":
            status, payload = ERROR, {"error": "skipped: algebroid failed validation"}
        else:
            try:
                status, payload = TASKS[kind](sc, params, opts)
            except ScenarioError:
                raise
            except (ValueError, ArithmeticError, AssertionError, InvalidAlgebroidError) as exc:
                status, payload = ERROR, {"error": f"{type(exc).__name__}: {exc}"}
        records.append({"task": kind, "params": _echo(params), "status": status, "result": payload,
                        "seconds": round(time.perf_counter() - start, 4)})
    if opts.check and not blocked:
        for label, ok in invariant_checks(sc):
            records.append({"task": "check", "params": {"invariant": label},
                            "status": OK if ok else VIOLATION, "result": {"holds": ok}, "seconds": 0.0})
    return {"field": sc.ctx.field.value, "records": records}


def _echo(params):
    return json.loads(json.dumps(params, sort_keys=True, default=str))


def exit_status(report: dict) -> int:
    return 1 if any(r["status"] in (VIOLATION, ERROR) for r in report["records"]) else 0


def render(report: dict, fmt: str) -> str:
    if fmt == "machine":
        stripped = {"field": report["field"],
                    "records": [{k: v for k, v in r.items() if k != "seconds"} for r in report["records"]]}
        return json.dumps(stripped, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    lines = [f"field: {report['field']}"]
    for i, r in enumerate(report["records"], 1):
        args = ", ".join(f"{k}={v}" for k, v in sorted(r["params"].items()))
        lines.append(f"[{i}] {r['task']}({args}) ... {r['status']} ({r['seconds']:.3f}s)")
        for key, val in r["result"].items():
            lines.append(f"    {key}: {_human(val)}")
    return "\n".join(lines) + "\n"


def _human(val) -> str:
    if isinstance(val, dict) and "components" in val and "degree" in val:
        comps = val["components"]
        if not comps:
            return "0"
        return " + ".join(f"({c[1]})*" + "^".join(f"e{i}" for i in c[0]) if c[0] else f"({c[1]})"
                          for c in comps)
    return json.dumps(val, sort_keys=True, ensure_ascii=False)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="charclasses", description="Run a characteristic-class scenario file.")
    parser.add_argument("scenario", help="path to a YAML scenario file")
    parser.add_argument("--field", choices=["Q", "Qi"], help="override the coefficient field")
    parser.add_argument("--check", action="store_true", help="also run the invariant suite")
    parser.add_argument("--truncation", type=int, metavar="D", help="polynomial degree bound for exactness searches")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=["human", "machine"], default="human")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.truncation is not None and args.truncation < 0:
        print("error: --truncation must be non-negative", file=sys.stderr)
        return 2
    path = Path(args.scenario)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    opts = Options(args.field, args.check, args.truncation, args.format)
    try:
        report = run_scenario(load_yaml(text, str(path)), opts)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = render(report, args.format)
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    return exit_status(report)


if __name__ == "__main__":
    sys.exit(main())
