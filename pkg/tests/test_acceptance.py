"""Acceptance suite: one check per numbered criterion.

Each check raises AssertionError with a short reason on failure and returns
a one-line detail on success.  Results are collected in RESULTS and printed
as PASS/FAIL lines in the pytest terminal summary (see conftest.py), or
directly when this file is run as a script.
"""

from fractions import Fraction as F

import pytest

from compcurve.constructors import (
    DerivativeOracle,
    arclength_from_derivative,
    koch,
    koch_param,
    n_curve,
    pad_report,
    retrace_triple,
    zsweep,
)
from compcurve.diagonal import audit, avoider, detect_sweeps, diagonalize, divergent, tracer
from compcurve.exact import DyadicInterval, pow2, sqrt_interval
from compcurve.geometry import (
    P,
    PathFunction,
    Polygon,
    eval_path,
    hausdorff,
    injectivity_lower_bound,
    is_simple,
    polygon_length,
    sup_path_distance,
    sup_path_sq_distance,
    within_hausdorff,
)
from compcurve.names import (
    KName,
    LeftCEReal,
    cover_to_kname,
    kname_to_cover,
    left_length,
    n_condition_residual,
    normalize,
    widen,
)

from oracles import brute_sweeps, riemann_bracket

L = Polygon([P(0, 0), P(1, 0), P(1, 1)])
UNIT = Polygon([P(0, 0), P(1, 0)])

CRITERIA = {}
RESULTS = {}


def criterion(num: int, title: str):
    def register(fn):
        CRITERIA[num] = (title, fn)
        return fn
    return register


def holds(cond, why: str):
    if not cond:
        raise AssertionError(why)


# ---------------------------------------------------------------- checks

@criterion(1, "Koch polygon lengths are (sqrt 2)^n")
def koch_lengths():
    for n in range(9):
        iv = polygon_length(koch(n), 30)
        # iv contains sqrt(2^n) exactly when lo^2 <= 2^n <= hi^2
        holds(iv.lo ** 2 <= 2 ** n <= iv.hi ** 2, f"n={n}: {iv} misses sqrt(2^{n})")
        root = sqrt_interval(2 ** n, 30)
        holds(iv.lo <= root.hi and root.lo <= iv.hi, f"n={n}: disjoint from sqrt_interval")
    return "n=0..8"


@criterion(2, "Hausdorff distance of the first two Koch polygons is 1/4")
def koch_base_distance():
    iv = hausdorff(koch(0), koch(1), 30)
    holds(iv.contains(F(1, 4)), f"{iv} misses 1/4")
    holds(iv.width <= pow2(-30), f"width {iv.width}")
    return str(iv)


@criterion(3, "Koch parametrizations converge effectively")
def koch_convergence():
    tight = []
    for n in range(7):
        # the bound (sqrt 2)^n / 4^(n+1) is attained exactly, so it is compared
        # squared against the exact rational sup; a dyadic upper endpoint of an
        # irrational value can never sit at or below it
        sq = sup_path_sq_distance(koch_param(n), koch_param(n + 1))
        bound_sq = F(2 ** n, 16 ** (n + 1))
        holds(sq <= bound_sq, f"n={n}: sup^2 = {sq}")
        iv = sup_path_distance(koch_param(n), koch_param(n + 1), 30)
        holds(iv.lo ** 2 <= sq <= iv.hi ** 2 and iv.width <= pow2(-30), f"n={n}: interval {iv}")
        tight.append(sq == bound_sq)
    return "n=0..6, bound attained" if all(tight) else "n=0..6"


@criterion(4, "Koch injectivity grid bound >= 1/3")
def koch_injectivity():
    out = []
    for n in (2, 3):
        iv = injectivity_lower_bound(koch_param(n), F(1, 4 ** n), 20)
        holds(iv.lo >= F(1, 3), f"n={n}: {iv.lo}")
        out.append(f"n={n}: {iv.lo}")
    return "; ".join(out)


@criterion(5, "Exact padding of the unit segment")
def exact_padding():
    for b, eps, k in ((2, F(1, 4), 8), (F(3, 2), F(1, 2), 4)):
        rep = pad_report(UNIT, b, eps)
        holds(rep.polygon.exact_length() == b, f"b={b}: length {rep.polygon.exact_length()}")
        holds(rep.k == k, f"b={b}: k={rep.k}, expected {k}")
        holds(hausdorff(UNIT, rep.polygon, 20).hi <= F(1, 16), f"b={b}: distance")
        holds(is_simple(rep.polygon), f"b={b}: not simple")
    return "b=2 (k=8), b=3/2 (k=4)"


@criterion(6, "N-curve of prescribed length 2 - 2^-n")
def n_curve_length():
    name = n_curve(LeftCEReal(lambda n: 2 - pow2(-n)))
    for n in range(9):
        p, q = name.polygon(n), name.polygon(n + 1)
        holds(p.exact_length() == 2 - pow2(-n), f"n={n}: length {p.exact_length()}")
        holds(within_hausdorff(p, q, pow2(-n)), f"n={n}: Hausdorff")
        holds(sup_path_distance(name(n), name(n + 1), n + 4).hi <= pow2(-n), f"n={n}: sup")
    return "n=0..8"


@criterion(7, "Cover round trips stay within 2^-n+2")
def cover_round_trips():
    for label, poly in (("koch(3)", koch(3)), ("L", L)):
        k = KName.fixed(poly)
        back = cover_to_kname(kname_to_cover(k))
        for n in range(7):
            holds(within_hausdorff(k(n), back(n), pow2(-n + 2)), f"{label} n={n}")
    return "koch(3) and L, n=0..6"


@criterion(8, "Left-computable length of the L polygon")
def left_computable_length():
    ll = left_length(KName.fixed(L))
    vals = [ll(n) for n in range(11)]
    holds(vals == sorted(vals), "not nondecreasing")
    for n, v in enumerate(vals):
        holds(2 - pow2(-n + 3) <= v <= 2, f"n={n}: {v}")
    return f"l_10 = {vals[-1]}"


@criterion(9, "Normalization pipeline on the L polygon")
def normalization():
    f = normalize(KName.fixed(L), lambda n: 2 - pow2(-(n + 1)))
    for n in range(9):
        mid = eval_path(f(n), F(1, 2))
        holds((mid.x - 1) ** 2 + mid.y ** 2 <= pow2(-2 * n), f"n={n}: midpoint {mid}")
        res = n_condition_residual(f(n), None, F(1, 16), n + 4)
        holds(res.hi <= pow2(-n + 2), f"n={n}: residual {res.hi}")
    return "n=0..8"


def _uniform(points):
    k = len(points) - 1
    return PathFunction([F(i, k) for i in range(k + 1)], points)


@criterion(10, "Sweep detection agrees with brute force")
def sweep_detection():
    eps = F(1, 10)
    triple = retrace_triple((P(0, 0), P(1, 0)))
    (sw,) = detect_sweeps(triple, eps)
    holds(sw.delta == 1, f"delta {sw.delta}")
    holds(detect_sweeps(koch_param(2), eps) == [], "koch_param(2) has sweeps")
    zpath = _uniform(list(zsweep(1, F(1, 4)).vertices))
    holds(detect_sweeps(zpath, eps) == [], "Z path has sweeps")
    fixtures = [triple, koch_param(1), zpath,
                _uniform([P(0, 0), P(2, 0), P(1, 0), P(2, 0)]),
                _uniform([P(0, 0), P(1, 0), P(1, 1), P(1, 0), P(0, 0), P(1, 0), P(1, 1), P(2, 2)]),
                _uniform([P(0, 0), P(1, 0), P(0, 0), P(1, 0), P(1, 2), P(1, 3), P(1, 2), P(1, 3)])]
    for f in fixtures:
        holds(len(f.knots) <= 12, "fixture too large for the oracle")
        got = {(s.t0, s.t1, s.t2, s.t3) for s in detect_sweeps(f, eps)}
        holds(got == brute_sweeps(f, eps), f"oracle mismatch on {f.values}")
    return f"{len(fixtures)} fixtures"


@criterion(11, "K versus R diagonalizer audits")
def diagonalizer():
    res = diagonalize("K_vs_R", [divergent(), avoider(), tracer(claim="R")], 12, 100)
    rep = audit(res)
    bad = [k for k, (ok, _) in rep.items() if not ok]
    holds(not bad, f"failed audits: {bad}")
    holds(any(m is not None and m > 0 for m in res.witness.margins.values()), "no positive margin")
    return f"witness ({res.witness.z.x}, {res.witness.z.y})"


@criterion(12, "Widening N -> M -> R -> K keeps stages close")
def widening():
    src = n_curve(LeftCEReal(lambda n: 2 - pow2(-n)))
    k = widen(widen(widen(src, "M"), "R"), "K")
    holds(isinstance(k, KName), "chain did not end in a K-name")
    for n in range(7):
        holds(within_hausdorff(k(n), src(n).trace(), pow2(-n + 1)), f"n={n}")
    return "n=0..6"


def _parabola():
    return DerivativeOracle(lambda t, n: (DyadicInterval.exact(1), DyadicInterval.exact(2 * t)), F(2))


@criterion(13, "Certified arc length from a derivative")
def arc_length():
    iv = arclength_from_derivative(DerivativeOracle.constant(1, 1), 20)
    holds(iv.width <= pow2(-20), f"width {iv.width}")
    holds(iv.lo ** 2 <= 2 <= iv.hi ** 2, f"{iv} misses sqrt 2")
    par = arclength_from_derivative(_parabola(), 10)
    lo, hi = riemann_bracket(512)
    holds(par.lo <= hi and lo <= par.hi, f"{par} disjoint from [{lo}, {hi}]")
    return f"sqrt 2 in {iv}"


# ---------------------------------------------------------------- runners

def run_criterion(num: int):
    title, fn = CRITERIA[num]
    try:
        detail = fn()
    except AssertionError as exc:
        RESULTS[num] = (False, title, str(exc))
        raise
    RESULTS[num] = (True, title, detail)


@pytest.mark.parametrize("num", sorted(CRITERIA), ids=lambda n: f"criterion{n:02d}")
def test_criterion(num):
    run_criterion(num)


def report_lines():
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title} ({detail})"
            for n, (ok, title, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    for num in sorted(CRITERIA):
        try:
            run_criterion(num)
        except AssertionError:
            pass
    print("\n".join(report_lines()))
