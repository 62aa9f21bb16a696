"""Independent oracles shared by the unit and acceptance tests."""

import itertools
from fractions import Fraction as F

from compcurve.exact import sqrt_interval
from compcurve.geometry import PathFunction, eval_path


def candidate_params(f: PathFunction):
    """Knots plus every parameter at which f passes one of its vertices."""
    ts = set(f.knots)
    for (k0, a), (k1, b) in zip(zip(f.knots, f.values), zip(f.knots[1:], f.values[1:])):
        d = b - a
        if d.norm_sq() == 0:
            continue
        for z in set(f.values):
            w = z - a
            if d.cross(w) == 0 and 0 < d.dot(w) < d.norm_sq():
                ts.add(k0 + (k1 - k0) * d.dot(w) / d.norm_sq())
    return sorted(ts)


def reduced(points):
    """Traversal order of a polyline with pauses and straight-through points dropped."""
    out = []
    for z in points:
        if out and out[-1] == z:
            continue
        if len(out) >= 2:
            d1, d2 = out[-1] - out[-2], z - out[-1]
            if d1.cross(d2) == 0 and d1.dot(d2) > 0:
                out[-1] = z
                continue
        out.append(z)
    return out


def leg(f, ts, lo, hi):
    return reduced([eval_path(f, t) for t in ts if lo <= t <= hi])


def brute_sweeps(f: PathFunction, eps):
    ts = candidate_params(f)
    val = {t: eval_path(f, t) for t in ts}
    valid = []
    for t0, t1, t2, t3 in itertools.combinations(ts, 4):
        if val[t0] != val[t2] or val[t1] != val[t3] or val[t0] == val[t1]:
            continue
        a = leg(f, ts, t0, t1)
        if leg(f, ts, t1, t2) == a[::-1] and leg(f, ts, t2, t3) == a:
            valid.append((t0, t1, t2, t3))
    maximal = [w for w in valid
               if not any(v != w and v[0] <= w[0] and v[3] >= w[3] for v in valid)]
    return {w for w in maximal if (val[w[1]] - val[w[0]]).norm_sq() >= eps * eps}


def riemann_bracket(N: int, m: int = 40):
    """Left/right sums for the arc length of (t, t^2) on [0, 1].

    The speed sqrt(1 + 4t^2) increases, so the sums bracket the integral.
    """
    lo = hi = F(0)
    for i in range(N):
        lo += sqrt_interval(1 + 4 * F(i, N) ** 2, m).lo
        hi += sqrt_interval(1 + 4 * F(i + 1, N) ** 2, m).hi
    return lo / N, hi / N
