"""Command-line front end.

Exit status: 0 on success, 2 for usage or input-file errors, 3 when an
operation's precondition fails, 4 when a declared budget runs out.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__, constructors, diagonal, io
from .exact import BudgetExceeded, ContractError, DyadicInterval, Q, pow2
from .geometry import (
    P,
    PathFunction,
    Polygon,
    eval_normalized,
    eval_path,
    hausdorff,
    is_simple,
    path_length,
    polygon_length,
)
from .names import KName, left_length, normalize


class UsageError(Exception):
    """Bad arguments or unreadable input (exit status 2)."""


def _rat(text: str) -> Fraction:
    try:
        return Q(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected x,y with rational coordinates, got {text!r}")
    return P(_rat(parts[0]), _rat(parts[1]))


def _prec(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"precision must be an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("precision must be >= 0")
    return n


def _load(loader, path):
    try:
        return loader(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except ContractError as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None


def _emit(obj, out, stdout):
    text = io.dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {out}", file=stdout)
    else:
        stdout.write(text)


def _iv(iv: DyadicInterval) -> str:
    return str(iv)


# ---------------------------------------------------------------- verbs

def cmd_build(a, out):
    c = a.construction
    if c == "koch":
        obj = constructors.koch(a.depth)
    elif c == "koch-param":
        obj = constructors.koch_param(a.depth)
    elif c == "segment":
        obj = Polygon([a.a, a.b])
    elif c == "pad":
        src = _load(io.load_curve, a.input)
        if isinstance(src, PathFunction):
            src = src.trace()
        rep = constructors.pad_report(src, a.length, a.eps, exact=not a.tolerance)
        print(f"k={rep.k} height={io.rat(rep.height)} exact={rep.exact}", file=out)
        obj = rep.polygon
    elif c == "zsweep":
        obj = constructors.zsweep(a.a_len, a.delta)
    elif c == "sweep-sim":
        obj = constructors.sweep_sim(a.q, a.eps, a.delta)
    elif c == "zigzag":
        obj = constructors.zigzag_double((a.a, a.b), a.m)
    elif c == "retrace":
        obj = constructors.retrace_triple((a.a, a.b))
    elif c == "n-curve":
        name = constructors.n_curve(io.length_from_script(
            {"builtin": "approach", "limit": io.rat(a.limit), "shift": a.shift}))
        obj = name.polygon(a.stage)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown construction {c}")
    if isinstance(obj, Polygon):
        print(f"vertices={len(obj)}", file=out)
    _emit(obj, a.output, out)


def cmd_eval(a, out):
    curve = _load(io.load_curve, a.curve)
    if isinstance(curve, PathFunction):
        p = eval_path(curve, a.t)
        print(f"({io.rat(p.x)}, {io.rat(p.y)})", file=out)
        return
    bx, by = eval_normalized(curve, a.t, a.n)
    print(f"x {_iv(bx)}", file=out)
    print(f"y {_iv(by)}", file=out)


def cmd_dist(a, out):
    A = _load(io.load_curve, a.first)
    B = _load(io.load_curve, a.second)
    A = A.trace() if isinstance(A, PathFunction) else A
    B = B.trace() if isinstance(B, PathFunction) else B
    print(_iv(hausdorff(A, B, a.n)), file=out)


def cmd_length(a, out):
    curve = _load(io.load_curve, a.curve)
    iv = path_length(curve, a.n) if isinstance(curve, PathFunction) else polygon_length(curve, a.n)
    print(_iv(iv), file=out)


def cmd_simple(a, out):
    curve = _load(io.load_curve, a.curve)
    poly = curve.trace() if isinstance(curve, PathFunction) else curve
    ok = is_simple(poly)
    print("simple" if ok else "not simple", file=out)
    return 0 if ok else 1


def cmd_sweeps(a, out):
    curve = _load(io.load_curve, a.curve)
    f = curve if isinstance(curve, PathFunction) else PathFunction.uniform(curve.vertices)
    found = diagonal.detect_sweeps(f, a.eps)
    for sw in found:
        print(f"t=({io.rat(sw.t0)}, {io.rat(sw.t1)}, {io.rat(sw.t2)}, {io.rat(sw.t3)}) "
              f"q=({io.rat(sw.q.x)}, {io.rat(sw.q.y)}) p=({io.rat(sw.p.x)}, {io.rat(sw.p.y)}) "
              f"delta>={io.rat(sw.delta)}", file=out)
    print(f"sweeps={len(found)}", file=out)


def _kname(path) -> KName:
    doc = _load(io.load, path)
    if isinstance(doc, Polygon):
        return KName.fixed(doc)
    name = _load(io.name_from_script, doc) if isinstance(doc, dict) else None
    if not isinstance(name, KName):
        raise UsageError(f"{path} does not describe a K-name or polygon")
    return name


def cmd_normalize(a, out):
    k = _kname(a.name)
    limit, shift = a.limit, a.shift
    f = normalize(k, lambda n: limit - pow2(-(n + shift)), budget=a.budget)
    stage = f(a.stage)
    print(f"orientation={f.orientation(a.stage)}", file=out)
    _emit(stage, a.output, out)


def cmd_leftlen(a, out):
    k = _kname(a.name)
    ll = left_length(k)
    for n in range(a.n + 1):
        print(f"{n} {io.rat(ll(n))}", file=out)


def cmd_diag(a, out):
    doc = _load(io.load, a.scenario)
    if not isinstance(doc, dict):
        raise UsageError(f"{a.scenario} is not a scenario document")
    try:
        kind, roster, S, budget = io.scenario_from_doc(doc)
    except ContractError as exc:
        raise UsageError(f"cannot parse {a.scenario}: {exc}") from None
    res = diagonal.diagonalize(kind, roster, S, budget)
    for line in res.log_lines():
        print(line, file=out)
    checks = diagonal.audit(res)
    for key, (ok, _) in checks.items():
        print(f"audit {key}: {'ok' if ok else 'FAIL'}", file=out)
    w = res.witness
    print(f"witness ({io.rat(w.z.x)}, {io.rat(w.z.y)})", file=out)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            json.dump(io.result_doc(res), fh, indent=1)
            fh.write("\n")
        print(f"wrote {a.output}", file=out)
    return 0 if all(ok for ok, _ in checks.values()) else 1


def cmd_export(a, out):
    doc = _load(io.load, a.input)
    if isinstance(doc, dict):
        name = _load(io.name_from_script, doc)
        if a.stage is None:
            raise UsageError("exporting a name needs --stage")
        obj = name(a.stage)
    else:
        obj = doc
    if a.svg:
        with open(a.svg, "w", encoding="utf-8") as fh:
            fh.write(io.to_svg([obj], digits=a.digits))
        print(f"wrote {a.svg}", file=out)
    if a.output or not a.svg:
        _emit(obj, a.output, out)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compcurve", description="Exact computations on computable planar curves.")
    p.add_argument("--version", action="version", version=f"compcurve {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    b = sub.add_parser("build", help="write a constructed polygon or path")
    b.add_argument("construction", choices=["koch", "koch-param", "segment", "pad", "zsweep",
                                             "sweep-sim", "zigzag", "retrace", "n-curve"])
    b.add_argument("--depth", type=int, default=0)
    b.add_argument("--a", type=_point, default=P(0, 0), help="segment start x,y")
    b.add_argument("--b", type=_point, default=P(1, 0), help="segment end x,y")
    b.add_argument("--in", dest="input", help="curve to pad")
    b.add_argument("--length", type=_rat, help="target length for pad")
    b.add_argument("--eps", type=_rat, default=Fraction(1, 4))
    b.add_argument("--tolerance", action="store_true", help="pad curves with irrational segment lengths")
    b.add_argument("--a-len", dest="a_len", type=_rat, default=Fraction(1))
    b.add_argument("--delta", type=_rat, default=Fraction(1, 4))
    b.add_argument("--q", type=_rat, default=Fraction(0))
    b.add_argument("--m", type=int, default=1)
    b.add_argument("--limit", type=_rat, default=Fraction(2))
    b.add_argument("--shift", type=int, default=0)
    b.add_argument("--stage", type=int, default=0)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="evaluate a path, or a polygon's normalized parametrization")
    e.add_argument("curve")
    e.add_argument("--t", type=_rat, required=True)
    e.add_argument("-n", type=_prec, default=20)
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("dist", help="certified Hausdorff distance")
    d.add_argument("first")
    d.add_argument("second")
    d.add_argument("-n", type=_prec, default=20)
    d.set_defaults(func=cmd_dist)

    ln = sub.add_parser("length", help="certified length")
    ln.add_argument("curve")
    ln.add_argument("-n", type=_prec, default=20)
    ln.set_defaults(func=cmd_length)

    s = sub.add_parser("simple", help="exact simplicity test (exit 1 when not simple)")
    s.add_argument("curve")
    s.set_defaults(func=cmd_simple)

    sw = sub.add_parser("sweeps", help="list exact-retrace sweeps of a path")
    sw.add_argument("curve")
    sw.add_argument("--eps", type=_rat, required=True)
    sw.set_defaults(func=cmd_sweeps)

    nm = sub.add_parser("normalize", help="N-name stage from a K-name and lengths limit - 2^-(n+shift)")
    nm.add_argument("name")
    nm.add_argument("--limit", type=_rat, required=True)
    nm.add_argument("--shift", type=int, default=0)
    nm.add_argument("--stage", type=int, default=0)
    nm.add_argument("--budget", type=int, default=64)
    nm.add_argument("-o", "--output")
    nm.set_defaults(func=cmd_normalize)

    ll = sub.add_parser("leftlen", help="left-computable length approximations of a K-name")
    ll.add_argument("name")
    ll.add_argument("-n", type=_prec, default=6)
    ll.set_defaults(func=cmd_leftlen)

    dg = sub.add_parser("diag", help="run a diagonalization scenario (exit 1 when an audit fails)")
    dg.add_argument("scenario")
    dg.add_argument("-o", "--output")
    dg.set_defaults(func=cmd_diag)

    ex = sub.add_parser("export", help="re-serialize a curve or name stage, optionally as SVG")
    ex.add_argument("input")
    ex.add_argument("--stage", type=int)
    ex.add_argument("--svg")
    ex.add_argument("--digits", type=int, default=4)
    ex.add_argument("-o", "--output")
    ex.set_defaults(func=cmd_export)
    return p


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = args.func(args, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"contract violated: {exc}", file=sys.stderr)
        return 3
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 4
    return rc or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
