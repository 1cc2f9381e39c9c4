"""Command-line front end: ``csc-bundles {verify,families,count,thresholds}``.

Every command writes one JSON report (or a CSV table with ``--format csv``)
with the top-level keys ``schema, command, params, results, tolerances,
pass``.  Exit status is 0 when all tolerances are met, 1 on a tolerance
failure and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import elliptic
from .exceptions import DomainError, PreconditionError
from .fiber_geometry import BaseGeometry, scal_join_total, sphere_bundle_scalar
from .join_solver import (Branch, JoinParams, admissible_modulus_range, build_profiles,
                          family_scan, limit_probe, solve, verify_residual)
from .tolerances import DEFAULT, Tolerances
from .yamabe import (YamabeProblem, bundle_thresholds, count_radial_solutions,
                     multiplicity_predicate, product_thresholds)

SCHEMA_VERSION = "csc-bundles/1"
EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

# argparse destinations that are plumbing, not parameters of the run
_PLUMBING = {"command", "config", "out", "format"}


class InvalidInput(Exception):
    """Raised for inputs rejected before or during dispatch (exit status 2)."""


# -- serialization -------------------------------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits, always with a decimal point, so values round-trip exactly."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, "#.17g")


def _plain(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Branch):
        return obj.value
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with fixed 17-digit floats and insertion-ordered keys."""
    out = io.StringIO()
    _write(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _write(obj, out, indent, level):
    obj = _plain(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (key, val) in enumerate(obj.items()):
            out.write(pad + json.dumps(str(key)) + ": ")
            _write(val, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            out.write("[]")
            return
        out.write("[\n")
        for i, val in enumerate(obj):
            out.write(pad)
            _write(val, out, indent, level + 1)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(end + "]")
    elif isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        out.write(json.dumps(obj))
    elif isinstance(obj, float):
        out.write(format_float(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(val):
    val = _plain(val)
    if isinstance(val, float):
        return format_float(val)
    if isinstance(val, bool):
        return "true" if val else "false"
    return "" if val is None else str(val)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def load_schema() -> dict:
    """The JSON schema every report validates against."""
    text = resources.files("cscbundles").joinpath("schema/csc-bundles-1.json").read_text("utf-8")
    return json.loads(text)


# -- parser --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value file; its entries override flags")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output file (a directory for 'families'); stdout if omitted")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sample points")
    g = p.add_argument_group("tolerance overrides")
    for f in fields(Tolerances):
        g.add_argument("--tol-" + f.name.replace("_", "-"), dest="tol_" + f.name, type=float,
                       metavar="FLOAT", default=None)


def _join_args(p: argparse.ArgumentParser):
    p.add_argument("--k1", type=int, required=True, help="dimension of the first sphere summand")
    p.add_argument("--k2", type=int, required=True, help="dimension of the second sphere summand")
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--a2", type=float, default=0.0)
    p.add_argument("--base-scal", type=float, default=0.0, help="scalar curvature of the base")
    p.add_argument("--base-dim", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csc-bundles",
        description="Constant scalar curvature metrics on sphere bundles and joins.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="solve one join metric and check all residuals")
    _join_args(v)
    m = v.add_mutually_exclusive_group()
    m.add_argument("--modulus-sq", type=float, help="squared elliptic modulus k^2")
    m.add_argument("--k", type=float, help="elliptic modulus k")
    v.add_argument("--gamma", type=float, help="scale of a round (k = 0) solution")
    v.add_argument("--swapped", action="store_true",
                   help="use the branch with the summands in the opposite order")
    v.add_argument("--grid", type=int, default=500)
    v.add_argument("--random-samples", type=int, default=50,
                   help="extra uniformly random sample points (seeded)")
    v.add_argument("--series", help="write the (t, scal) series to this CSV file")
    _common(v)

    f = sub.add_parser("families", help="tabulate every admissible family")
    _join_args(f)
    f.add_argument("--n-points", type=int, default=20)
    f.add_argument("--gamma-min", type=float, default=0.5)
    f.add_argument("--gamma-max", type=float, default=2.0)
    f.add_argument("--margin", type=float, default=0.02)
    f.add_argument("--grid", type=int, default=200)
    f.add_argument("--probe-points", type=int, default=9)
    _common(f)

    c = sub.add_parser("count", help="count radial solutions of the Yamabe equation")
    c.add_argument("--n", type=int, help="total dimension N")
    c.add_argument("--R", type=float, help="constant scalar curvature")
    c.add_argument("--d", type=int, help="dimension of the sphere factor carrying the radial variable")
    c.add_argument("--r", type=float, required=True, help="radius of that sphere")
    c.add_argument("--m", type=int, help="bundle form: base dimension")
    c.add_argument("--k", type=int, help="bundle form: fiber dimension")
    c.add_argument("--a", type=float, help="bundle form: O'Neill constant")
    c.add_argument("--l", type=int, default=1, help="eigenvalue index reported with the result")
    c.add_argument("--factor", choices=("fiber", "base"),
                   help="bundle form: sphere carrying the radial variable "
                        "(default fiber when a = 0, else base)")
    c.add_argument("--alpha-min", type=float, default=0.05)
    c.add_argument("--alpha-max", type=float, default=5.0)
    c.add_argument("--n-scan", type=int, default=400)
    _common(c)

    t = sub.add_parser("thresholds", help="evaluate uniqueness and multiplicity predicates")
    t.add_argument("--m", type=int, required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--r", type=float, required=True)
    t.add_argument("--l", type=int, default=1)
    t.add_argument("--a", type=float, help="O'Neill constant; adds the bundle predicates")
    _common(t)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


def _apply_config(sub: argparse.ArgumentParser, ns: argparse.Namespace, cfg: dict):
    actions = {a.dest: a for a in sub._actions}
    for key, val in cfg.items():
        if key in _PLUMBING - {"format", "out"} or key not in actions:
            raise InvalidInput(f"unknown configuration key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            conv = val.lower() in ("1", "true", "yes", "on")
        else:
            try:
                conv = act.type(val) if act.type else val
            except ValueError as exc:
                raise InvalidInput(f"bad value for {key}: {val!r}") from exc
            if act.choices is not None and conv not in act.choices:
                raise InvalidInput(f"{key} must be one of {list(act.choices)}, got {val!r}")
        setattr(ns, key, conv)


def _tolerances(ns) -> Tolerances:
    changes = {f.name: getattr(ns, "tol_" + f.name) for f in fields(Tolerances)
               if getattr(ns, "tol_" + f.name, None) is not None}
    for name, val in changes.items():
        if not val > 0:
            raise InvalidInput(f"tolerance {name} must be positive, got {val!r}")
    return DEFAULT.override(**changes)


def _params(ns) -> dict:
    return {k: v for k, v in vars(ns).items()
            if k not in _PLUMBING and not k.startswith("tol_")}


def params_to_argv(command: str, params: dict, tolerances: dict | None = None) -> list:
    """Rebuild a command line from a report's ``params`` (and ``tolerances``)."""
    argv = [command]
    for key, val in params.items():
        if val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        else:
            argv += [flag, repr(val) if isinstance(val, float) else str(val)]
    for key, val in (tolerances or {}).items():
        if val != getattr(DEFAULT, key):
            argv += ["--tol-" + key.replace("_", "-"), repr(float(val))]
    return argv


def _report(command, params, results, tol: Tolerances, passed: bool) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "results": results,
        "tolerances": tol.as_dict(),
        "pass": bool(passed),
    }


# -- commands ------------------------------------------------------------------------

def _join_params(ns) -> JoinParams:
    if ns.base_dim < 0:
        raise InvalidInput("base-dim must be >= 0")
    return JoinParams(BaseGeometry(ns.base_dim, ns.base_scal), ns.k1, ns.k2, ns.a1, ns.a2)


def _pick_branch(p: JoinParams, k: float, gamma, swapped: bool):
    branches = admissible_modulus_range(p)
    if k == 0.0:
        for b in branches:
            if b.is_round:
                if gamma is None:
                    raise InvalidInput("k = 0 solutions need --gamma")
                return b
        raise InvalidInput(f"k = 0 needs a1 == a2, got a1={p.a1!r}, a2={p.a2!r}")
    elliptic_branches = [b for b in branches if not b.is_round]
    for b in elliptic_branches:
        if b.swapped == swapped:
            return b
    if swapped or not elliptic_branches:
        orient = "opposite" if swapped else "given"
        raise DomainError(f"inadmissible modulus k={k!r}: no elliptic branch for the "
                          f"{orient} summand order (a1={p.a1!r}, a2={p.a2!r})")
    return elliptic_branches[0]


def cmd_verify(ns, tol: Tolerances):
    p = _join_params(ns)
    if ns.modulus_sq is not None:
        if not 0.0 <= ns.modulus_sq < 1.0:
            raise DomainError(f"inadmissible modulus: k^2 must lie in [0, 1), got {ns.modulus_sq!r}")
        k = math.sqrt(ns.modulus_sq)
    elif ns.k is not None:
        if not 0.0 <= ns.k < 1.0:
            raise DomainError(f"inadmissible modulus: k must lie in [0, 1), got {ns.k!r}")
        k = ns.k
    else:
        k = 0.0
    if ns.grid < 2 or ns.random_samples < 0:
        raise InvalidInput("grid must be >= 2 and random-samples >= 0")
    branch = _pick_branch(p, k, ns.gamma, ns.swapped)
    if branch.is_round:
        if not ns.gamma > 0:
            raise InvalidInput(f"gamma must be positive, got {ns.gamma!r}")
        sol = solve(p, gamma=ns.gamma, branch=branch)
    else:
        if ns.gamma is not None:
            raise InvalidInput("--gamma is determined by the modulus on elliptic branches")
        sol = solve(p, k=k, branch=branch)

    rep = verify_residual(p, sol, ns.grid, tol)
    prof = build_profiles(sol)
    rng = np.random.default_rng(ns.seed)
    t_rand = np.sort(rng.uniform(sol.T / 100, sol.T - sol.T / 100, ns.random_samples))
    rand_dev = 0.0
    if t_rand.size:
        rand_dev = float(np.abs(scal_join_total(p.base, p.constants, prof, t_rand)
                                - sol.scal_total).max())
    # elliptic identities at the profile arguments
    tg = prof.interior_grid(ns.grid)
    cn, sn, dn, _ = elliptic.jacobi(sol.gamma * tg, sol.k)
    pyth = float(max(np.abs(cn**2 + sn**2 - 1).max(),
                     np.abs(dn**2 + sol.k**2 * sn**2 - 1).max()))

    max_res = max(rep.max_deviation, rand_dev)
    passed = rep.passed and rand_dev < tol.residual and pyth < tol.pythagorean
    results = {
        "branch": sol.family.value,
        "swapped": sol.swapped,
        "k": sol.k,
        "gamma": sol.gamma,
        "T": sol.T,
        "R": sol.scal_total,
        "R_minus_base": sol.scal_total - p.base.scal,
        "max_residual": max_res,
        "grid_max_deviation": rep.max_deviation,
        "random_max_deviation": rand_dev,
        "scal_spread": rep.spread,
        "parameter_residual": rep.parameter_residual,
        "scalar_consistency": rep.scalar_consistency,
        "pythagorean_residual": pyth,
        "boundary_residuals": rep.boundary_residuals,
        "conservation": {"norm": rep.conservation[0], "derivative": rep.conservation[1]},
    }
    if ns.series:
        scal = scal_join_total(p.base, p.constants, prof, tg)
        Path(ns.series).write_text(csv_text(["t", "scal"], zip(tg.tolist(), scal.tolist())),
                                   encoding="utf-8")
    return results, passed


def _family_name(branch, swapped) -> str:
    return "family_" + branch.value.replace("-", "_") + ("_swapped" if swapped else "")


def cmd_families(ns, tol: Tolerances):
    p = _join_params(ns)
    if ns.n_points < 2 or not 0 <= ns.margin < 0.5 or not 0 < ns.gamma_min < ns.gamma_max:
        raise InvalidInput("need n-points >= 2, 0 <= margin < 0.5, 0 < gamma-min < gamma-max")
    scan = family_scan(p, ns.n_points, (ns.gamma_min, ns.gamma_max), ns.margin, ns.grid)
    intervals = {(b.branch, b.swapped): b for b in admissible_modulus_range(p)}
    families, passed = [], True
    for (branch, swapped), rows in scan.items():
        table = [[r.branch.value, r.k, r.gamma, r.T, r.R, r.residual] for r in rows]
        ok = all(r.residual < tol.residual for r in rows)
        passed &= ok
        entry = {
            "branch": branch.value,
            "swapped": swapped,
            "file": _family_name(branch, swapped) + ".csv",
            "k_sq_range": list(intervals[(branch, swapped)].k_sq_range),
            "n_rows": len(rows),
            "max_residual": max(r.residual for r in rows),
            "pass": ok,
            "rows": [dict(zip(FAMILY_COLUMNS, row)) for row in table],
        }
        if not intervals[(branch, swapped)].is_round and ns.probe_points > 0:
            probe = limit_probe(p, intervals[(branch, swapped)], "upper", ns.probe_points)
            entry["limit_upper"] = {"k": probe.k.tolist(),
                                    "R_minus_base": probe.r_minus_base.tolist(),
                                    "expected": probe.expected, "observed": probe.observed}
        families.append(entry)
    return {"family_count": len(families), "families": families}, passed


FAMILY_COLUMNS = ("branch", "k", "gamma", "T", "R", "residual")


def _count_problem(ns):
    bundle = [ns.m, ns.k, ns.a]
    direct = [ns.n, ns.R, ns.d]
    if any(v is not None for v in bundle):
        if any(v is not None for v in direct) or any(v is None for v in bundle):
            raise InvalidInput("give either --n --R --d --r or --m --k --a --r")
        factor = ns.factor or ("fiber" if ns.a == 0 else "base")
        R = sphere_bundle_scalar(BaseGeometry(ns.m, ns.m * (ns.m - 1)), ns.k, ns.a, ns.r)
        if not R > 0:
            raise InvalidInput(f"only constant solutions when R(g) ≤ 0 (R = {R!r})")
        return YamabeProblem.from_bundle(ns.m, ns.k, ns.a, ns.r, factor)
    if any(v is None for v in direct):
        raise InvalidInput("give either --n --R --d --r or --m --k --a --r")
    if not ns.R > 0:
        raise InvalidInput(f"only constant solutions when R(g) ≤ 0 (R = {ns.R!r})")
    return YamabeProblem(ns.n, ns.R, ns.d, ns.r)


def cmd_count(ns, tol: Tolerances):
    prob = _count_problem(ns)
    if ns.l < 1:
        raise InvalidInput("l must be >= 1")
    rep = count_radial_solutions(prob, (ns.alpha_min, ns.alpha_max), ns.n_scan, tol)
    sols = [{"alpha": s.alpha, "boundary_residual": s.boundary_residual,
             "ode_residual": s.ode_residual, "far_value": s.far_value,
             "is_constant": s.is_constant} for s in rep.solutions]
    passed = (rep.count >= rep.guaranteed_lower_bound
              and all(s.boundary_residual < tol.matching for s in rep.solutions)
              and all(s.ode_residual < tol.ode_residual for s in rep.solutions))
    results = {
        "problem": {"n": prob.n, "R": prob.R, "d": prob.d, "r": prob.r},
        "guaranteed_lower_bound": rep.guaranteed_lower_bound,
        "multiplicity_predicate_l": multiplicity_predicate(prob, ns.l),
        "count": rep.count,
        "solutions": sols,
        "reflection_collapsed_count": rep.reflection_collapsed_count,
        "reflection_pairs": [list(g) for g in rep.pairs],
        "nonconstant_brackets": len(rep.nonconstant_brackets),
        "excluded_shots": len(rep.excluded),
        "rejected_roots": rep.rejected,
    }
    return results, passed


def cmd_thresholds(ns, tol: Tolerances):
    preds = []
    if ns.a is None or ns.a == 0:
        rec = product_thresholds(ns.m, ns.k, ns.r, ns.l)
        preds += [("product", q) for q in rec.predicates]
        scal = rec.scal
    if ns.a is not None:
        rec = bundle_thresholds(ns.m, ns.k, ns.a, ns.r, ns.l)
        preds += [("bundle", q) for q in rec.predicates]
        scal = rec.scal
    results = {
        "scal": scal,
        "predicates": [{"group": g, "name": q.name, "holds": q.holds, "margin": q.margin}
                       for g, q in preds],
    }
    return results, True


COMMANDS = {"verify": cmd_verify, "families": cmd_families, "count": cmd_count,
            "thresholds": cmd_thresholds}


# -- output --------------------------------------------------------------------------

def _csv_for(command, results) -> str:
    if command == "count":
        cols = ["alpha", "boundary_residual", "ode_residual", "far_value", "is_constant"]
        return csv_text(cols, ([s[c] for c in cols] for s in results["solutions"]))
    if command == "thresholds":
        cols = ["group", "name", "holds", "margin"]
        return csv_text(cols, ([q[c] for c in cols] for q in results["predicates"]))
    if command == "families":
        rows = (["swapped" if f["swapped"] else "given"] + [r[c] for c in FAMILY_COLUMNS]
                for f in results["families"] for r in f["rows"])
        return csv_text(["orientation", *FAMILY_COLUMNS], rows)
    flat = []
    for key, val in results.items():
        if isinstance(val, dict):
            flat += [(f"{key}.{k}", v) for k, v in val.items()]
        else:
            flat.append((key, val))
    return csv_text(["key", "value"], flat)


def _emit(ns, report: dict, stdout):
    command, results = report["command"], report["results"]
    if command == "families" and ns.out:
        outdir = Path(ns.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for fam in results["families"]:
            rows = ([r[c] for c in FAMILY_COLUMNS] for r in fam["rows"])
            (outdir / fam["file"]).write_text(csv_text(FAMILY_COLUMNS, rows), encoding="utf-8")
        (outdir / "summary.json").write_text(dumps(report), encoding="utf-8")
        return
    text = dumps(report) if ns.format == "json" else _csv_for(command, results)
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, dispatch, write the report and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INVALID
    try:
        if ns.config:
            _apply_config(_subparser(parser, ns.command), ns, read_config(ns.config))
        tol = _tolerances(ns)
        results, passed = COMMANDS[ns.command](ns, tol)
    except (InvalidInput, DomainError, PreconditionError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        stderr.write(f"csc-bundles {ns.command}: error: {msg}\n")
        return EXIT_INVALID
    report = _report(ns.command, _params(ns), results, tol, passed)
    try:
        _emit(ns, report, stdout)
    except OSError as exc:
        stderr.write(f"csc-bundles {ns.command}: error: {exc}\n")
        return EXIT_INVALID
    return EXIT_PASS if passed else EXIT_FAIL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
