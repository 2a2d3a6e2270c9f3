"""Command line front end.

Reports are JSON lines on standard output; errors are one JSON object on
standard error.  Exit codes: 0 success, 1 failed verification, 2 usage or
input error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import BudgetExceeded, PolyconfError
from .points import check_nvec

VERBS = ("check", "features", "betti", "basis", "forests", "dual", "cup", "reduce", "verify")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyconf", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--ideal", help="ideal JSON file (or an inline JSON object)")
    p.add_argument("--points", help="colour vector, e.g. 3 or 3,3")
    p.add_argument("--dim", type=int, help="ambient dimension d")
    p.add_argument("--method", choices=("basis", "gm", "both"), default="basis")
    p.add_argument("--degree", type=int)
    p.add_argument("--basis-only", action="store_true")
    p.add_argument("--relax-small", action="store_true")
    p.add_argument("--regime", default="auto")
    p.add_argument("--budget", type=int, help="cap on lattice elements")
    p.add_argument("--pretty", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--expr")
    p.add_argument("--lhs")
    p.add_argument("--rhs")
    p.add_argument("--cochain")
    return p


def _load_json(arg: str, what: str):
    if arg is None:
        raise UsageError(f"--{what} is required")
    text = arg if arg.lstrip().startswith("{") else None
    if text is None:
        try:
            text = Path(arg).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {arg}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{arg} is not valid JSON: {exc}") from exc


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.verb}")


def _spec(args):
    from dataclasses import replace

    from .ideal import from_json
    obj = _load_json(args.ideal, "ideal")
    if not isinstance(obj, dict):
        raise UsageError("the ideal must be a JSON object")
    spec = from_json(obj)
    if args.relax_small:
        spec = replace(spec, relax_small=True)
    return spec


def _nvec(args, spec):
    _need(args, "points")
    try:
        vals = [int(x) for x in args.points.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --points {args.points!r}") from exc
    return check_nvec(spec, vals)


def _gm_kw(args):
    return {"max_elements": args.budget} if args.budget else {}


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("POLYCONF_SEED", "0"))


# -- verbs -------------------------------------------------------------------

def _check(args):
    from .ideal import is_decreasing, is_rectangular, validate
    spec = _spec(args)
    v = validate(spec)
    rep = {"valid": v.ok}
    if not v.ok:
        rep.update({"witness": list(v.witness), "reason": v.reason})
    else:
        rep["decreasing"] = is_decreasing(spec)
        if spec.m == 2:
            rep["rectangular"] = is_rectangular(spec)
    return [rep], 0 if v.ok else 1


def _features(args):
    from .ideal import features, require_valid
    return [features(require_valid(_spec(args))).to_json()], 0


def _betti(args):
    from .homology import betti
    from .ideal import require_valid
    _need(args, "dim")
    spec = require_valid(_spec(args))
    nvec = _nvec(args, spec)
    kw = _gm_kw(args) if args.method != "basis" else {}
    t = betti(spec, args.dim, nvec, args.method, args.regime, **kw)
    rep = {"betti": t.to_json(), "method": args.method}
    if args.method == "both":
        rep["gm"] = t.meta["gm"]
        rep["agree"] = t.meta["agree"]
        rep["discrepancy"] = t.meta["discrepancy"]
    return [rep], 0


def _basis(args):
    from .homology import enumerate_basis
    from .ideal import require_valid
    _need(args, "dim")
    spec = require_valid(_spec(args))
    nvec = _nvec(args, spec)
    out = [{"expr": e.text(), "degree": e.degree(args.dim)}
           for e in enumerate_basis(spec, args.dim, nvec, args.degree, args.regime)]
    return out, 0


def _forests(args):
    from .forests import enumerate_forests, forest_degree
    from .ideal import require_valid
    _need(args, "dim")
    spec = require_valid(_spec(args))
    nvec = _nvec(args, spec)
    fs = enumerate_forests(spec, args.dim, nvec, args.degree, args.regime, args.basis_only)
    return [{"degree": forest_degree(f, args.dim), "forest": f.to_json()} for f in fs], 0


def _dual(args):
    from .expr import parse
    from .forests import dual_of_generator, forest_degree
    from .homology import validate_generator
    from .ideal import require_valid
    _need(args, "dim", "expr")
    spec = require_valid(_spec(args))
    e = parse(args.expr)
    diag = validate_generator(e, spec, args.dim, regime=args.regime)
    if not diag.ok:
        return [{"expr": e.text(), "valid": False, "problems": list(diag.violations)}], 1
    f = dual_of_generator(e, spec, args.dim, args.regime)
    return [{"expr": e.text(), "degree": forest_degree(f, args.dim), "forest": f.to_json()}], 0


def _cup(args):
    from .forests import forest_from_json
    from .ideal import require_valid
    from .ring import cup
    _need(args, "dim")
    spec = require_valid(_spec(args))
    lhs = forest_from_json(_load_json(args.lhs, "lhs"))
    rhs = forest_from_json(_load_json(args.rhs, "rhs"))
    return [cup(lhs, rhs, spec, args.dim, args.regime).to_json()], 0


def _reduce(args):
    from .forests import cochain_from_json, reduce_to_basis
    from .ideal import require_valid
    from .points import count_colors
    _need(args, "dim")
    spec = require_valid(_spec(args))
    c = cochain_from_json(_load_json(args.cochain, "cochain"), args.dim)
    if args.points is not None:
        nvec = _nvec(args, spec)
    else:
        pts = {p for f in c.terms for p in f.points()}
        nvec = count_colors(pts, spec.m)
    return [reduce_to_basis(c, spec, args.dim, nvec, args.regime).to_json()], 0


def _verify(args):
    from .ideal import require_valid
    from .verify import verify
    _need(args, "dim")
    spec = require_valid(_spec(args))
    nvec = _nvec(args, spec)
    lines = verify(spec, args.dim, nvec, regime=args.regime, seed=_seed(args),
                   samples=args.samples, gm_kw=_gm_kw(args))
    ok = all(line.get("ok", True) for line in lines)
    lines.append({"check": "summary", "ok": ok})
    return lines, 0 if ok else 1


_DISPATCH = {"check": _check, "features": _features, "betti": _betti, "basis": _basis,
             "forests": _forests, "dual": _dual, "cup": _cup, "reduce": _reduce,
             "verify": _verify}


def _pretty(lines) -> str:
    out = []
    for line in lines:
        if "betti" in line and isinstance(line["betti"], dict):
            degs = sorted({int(k) for k in line["betti"]} | {int(k) for k in line.get("gm", {})})
            out.append("degree  " + " ".join(f"{k:>5}" for k in degs))
            out.append("basis   " + " ".join(f"{line['betti'].get(str(k), 0):>5}" for k in degs))
            if "gm" in line:
                out.append("gm      " + " ".join(f"{line['gm'].get(str(k), 0):>5}" for k in degs))
            continue
        if "check" in line:
            mark = "ok  " if line.get("ok", True) else "FAIL"
            rest = {k: v for k, v in line.items() if k not in ("check", "ok", "samples")}
            if "samples" in line:
                rest["sampled"] = len(line["samples"])
            out.append(f"{mark} {line['check']}: {json.dumps(rest, sort_keys=True)}")
            continue
        out.append(json.dumps(line, sort_keys=True, indent=2))
    return "\n".join(out)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        lines, code = _DISPATCH[args.verb](args)
    except UsageError as exc:
        stderr.write(json.dumps({"error": "usage", "message": str(exc)}) + "\n")
        return 2
    except BudgetExceeded as exc:
        stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 3
    except PolyconfError as exc:
        stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 2
    except ValueError as exc:
        stderr.write(json.dumps({"error": "ValueError", "message": str(exc)}) + "\n")
        return 2
    if args.pretty:
        stdout.write(_pretty(lines) + "\n")
    else:
        for line in lines:
            stdout.write(json.dumps(line, sort_keys=True) + "\n")
    return code


def main():
    sys.exit(run())
