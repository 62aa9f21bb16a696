"""Explicit curve constructions: Koch-type curve, length padding,
prescribed-length N-curves, sweep gadgets and a certified arc-length
integrator."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .exact import (
    BudgetExceeded,
    ContractError,
    DyadicInterval,
    Q,
    RationalLike,
    pow2,
    sqrt_exact,
    sqrt_interval,
)
from .geometry import P, PathFunction, Point, Polygon, is_simple, normalized_path
from .names import LeftCEReal, ParamName


# ---------------------------------------------------------------- Koch curve

def _koch_step(pts: Sequence[Point]) -> list:
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        d = b - a
        q = d.perp()
        out.extend([a + d / 4 + q / 4, a + d / 2, a + d * Fraction(3, 4) - q / 4, b])
    return out


def koch(n: int) -> Polygon:
    """Depth-n polygon of the Koch-type curve; 4**n + 1 rational vertices,
    length exactly sqrt(2)**n."""
    if n < 0:
        raise ContractError("depth must be >= 0")
    pts = [P(0, 0), P(1, 0)]
    for _ in range(n):
        pts = _koch_step(pts)
    return Polygon(pts)


def koch_param(n: int) -> PathFunction:
    """Length-normalized parametrization of koch(n): all segments have equal length."""
    p = koch(n)
    m = len(p) - 1
    return PathFunction([Fraction(i, m) for i in range(m + 1)], p.vertices)


# ---------------------------------------------------------------- placement

def place(canonical: Sequence[Point], a: Point, b: Point) -> list:
    """Map canonical points (frame with a -> (0,0), b -> (1,0)) onto segment ab."""
    d = b - a
    if d.x == 0 and d.y == 0:
        raise ContractError("degenerate segment")
    q = d.perp()
    return [a + d * c.x + q * c.y for c in canonical]


# ---------------------------------------------------------------- padding

def padding_params(a: RationalLike, b: RationalLike, eps: RationalLike):
    """(k, eps') with k minimal such that max((b-a)/(2k), a/k) <= eps/2."""
    a, b, eps = Q(a), Q(b), Q(eps)
    if eps <= 0:
        raise ContractError("eps must be positive")
    if b <= a:
        raise ContractError(f"target length {b} must exceed current length {a}")
    extra = b - a
    k = max(_ceil(extra / eps), _ceil(2 * a / eps), 1)
    return k, extra / (2 * k)


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


@dataclass(frozen=True)
class PadResult:
    polygon: Polygon
    k: int
    height: Fraction
    exact: bool
    teeth: int = 1


def _segment_lengths(p: Polygon, exact_only: bool):
    lens = []
    exact = True
    for s in p.sq_lengths():
        r = sqrt_exact(s)
        if r is None:
            if exact_only:
                raise ContractError("segment of irrational length; use tolerance mode (exact=False)")
            exact = False
            r = sqrt_interval(s, 64).mid
        lens.append(r)
    return lens, exact


def pad_report(p: Polygon, b: RationalLike, eps: RationalLike, *, side: int = 1,
               max_height: Optional[Fraction] = None, exact: bool = True,
               max_doublings: int = 8) -> PadResult:
    """Lengthen p to exactly b, staying within eps in Hausdorff distance.

    The arc of p is cut into k cells of equal length a/k. Each cell gets one
    rectangular bump of height eps' = (b-a)/(2k) on the middle half of its
    longest straight piece, so every cell gains exactly 2*eps' of length.
    Cell boundaries then sit at the same normalized parameter in p and in
    the result, which keeps the normalized parametrizations within
    a/k + eps' <= eps of each other.
    """
    b, eps = Q(b), Q(eps)
    if len(p) < 2:
        raise ContractError("cannot pad a single point")
    lens, is_exact = _segment_lengths(p, exact)
    a = sum(lens)
    k, height = padding_params(a, b, eps)
    if max_height is not None:
        # strictly below the cap
        k = max(k, int((b - a) / (2 * Q(max_height))) + 1)
    simple_in = is_simple(p)
    for _ in range(max_doublings + 1):
        height = (b - a) / (2 * k)
        # tall bumps can clash across a corner at any scale; thinner teeth of
        # the same total height fix that, more cells fix the rest
        for teeth in (1, 2, 4, 8, 16):
            q = _pad(p, lens, a, k, height, side, teeth)
            if not simple_in or is_simple(q):
                return PadResult(q, k, height, is_exact, teeth)
        k *= 2
    raise ContractError("padding could not keep the polygon simple")


def pad_length(p: Polygon, b: RationalLike, eps: RationalLike, **kw) -> Polygon:
    return pad_report(p, b, eps, **kw).polygon


def _pad(p: Polygon, lens, a: Fraction, k: int, height: Fraction, side: int, teeth: int = 1) -> Polygon:
    verts = p.vertices
    starts = [Fraction(0)]
    for L in lens:
        starts.append(starts[-1] + L)
    cell = a / k
    bumps = [[] for _ in lens]
    j = 0
    for i in range(k):
        c0, c1 = cell * i, cell * (i + 1)
        while starts[j + 1] <= c0:
            j += 1
        best = None
        jj = j
        while jj < len(lens) and starts[jj] < c1:
            u0 = max(c0, starts[jj])
            u1 = min(c1, starts[jj + 1])
            if u1 > u0 and (best is None or u1 - u0 > best[0]):
                best = (u1 - u0, jj, u0, u1)
            jj += 1
        _, seg, u0, u1 = best
        w = u1 - u0
        # teeth on alternate parts of the middle half
        part = w / 2 / (2 * teeth - 1)
        for tooth in range(teeth):
            s0 = u0 + w / 4 + 2 * tooth * part
            bumps[seg].append((s0, s0 + part))
    out = [verts[0]]
    for seg, (va, vb) in enumerate(zip(verts, verts[1:])):
        d = vb - va
        L = lens[seg]
        n = d.perp() * (side * height / (teeth * L))
        for s0, s1 in bumps[seg]:
            x0 = va + d * ((s0 - starts[seg]) / L)
            x1 = va + d * ((s1 - starts[seg]) / L)
            out.extend([x0, x0 + n, x1 + n, x1])
        out.append(vb)
    return Polygon.merged(out)


def n_curve(l) -> ParamName:
    """N-name of a simple curve whose length is the limit of l.

    p_0 = [(0,0), (l_0,0)] and p_{n+1} pads p_n to length l_{n+1} within
    2**-(n+1), bump heights kept below a quarter of the shortest segment of
    p_n. Stage n is the (exact, all lengths rational) normalized path of p_n.
    """
    seq = l if isinstance(l, LeftCEReal) else LeftCEReal(l)
    polys: list = []

    def poly(n):
        while len(polys) <= n:
            i = len(polys)
            if i == 0:
                l0 = seq(0)
                if l0 <= 0:
                    raise ContractError("l_0 must be positive")
                polys.append(Polygon([P(0, 0), P(l0, 0)]))
                continue
            prev = polys[-1]
            lp, ln = seq(i - 1), seq(i)
            if ln < lp:
                raise ContractError(f"length sequence decreases at stage {i}")
            if ln == lp:
                polys.append(prev)
                continue
            cap = min(prev.sq_lengths())
            cap = sqrt_exact(cap) / 4
            polys.append(pad_length(prev, ln, pow2(-i), max_height=cap))
        return polys[n]

    def stage(n):
        return normalized_path(poly(n), 0)

    name = ParamName("N", stage, label=f"n_curve({seq.label})",
                     script={"builtin": "n_curve", "length": seq.script})
    name.polygon = poly
    return name


# ---------------------------------------------------------------- gadgets

def zsweep(a: RationalLike, delta: RationalLike) -> Polygon:
    a, delta = Q(a), Q(delta)
    if a <= 0 or delta <= 0:
        raise ContractError("zsweep needs a, delta > 0")
    return Polygon([P(0, 0), P(a, delta), P(0, -delta), P(a, 0)])


def sweep_sim(q: RationalLike, eps: RationalLike, delta: RationalLike) -> Polygon:
    """Detour replacing [(q+eps,0), (q+2eps,0)] that simulates a sweep."""
    q, eps, delta = Q(q), Q(eps), Q(delta)
    if eps <= 0 or delta <= 0:
        raise ContractError("sweep_sim needs eps, delta > 0")
    return Polygon([P(q + eps, 0), P(q, delta), P(q + 2 * eps, 0)])


def zigzag_canonical(m: int) -> list:
    """Square wave on [0, 1/2] with m periods swinging +-1/(8m), then (1,0).

    Vertical travel is 4 * m * 1/(8m) = 1/2, which doubles the first half.
    """
    if m < 1:
        raise ContractError("tooth count must be >= 1")
    h = Fraction(1, 8 * m)
    w = Fraction(1, 2 * m)
    pts = [P(0, 0)]
    for i in range(m):
        x0 = w * i
        pts += [P(x0, h), P(x0 + w / 2, h), P(x0 + w / 2, -h), P(x0 + w, -h)]
    pts += [P(Fraction(1, 2), 0), P(1, 0)]
    return _drop_collinear(pts)


def _drop_collinear(pts):
    out = [pts[0]]
    for p in pts[1:]:
        if len(out) >= 2:
            d1, d2 = out[-1] - out[-2], p - out[-1]
            if d1.cross(d2) == 0 and d1.dot(d2) > 0:
                out[-1] = p
                continue
        out.append(p)
    return out


def zigzag_double(seg, m: int) -> Polygon:
    """Segment whose first half is replaced by a comb of doubled length."""
    a, b = seg
    return Polygon(place(zigzag_canonical(m), a, b))


def retrace_triple(seg) -> PathFunction:
    """Path that runs A -> B -> A -> B at constant speed."""
    a, b = seg
    if a == b:
        raise ContractError("degenerate segment")
    return PathFunction([Fraction(0), Fraction(1, 3), Fraction(2, 3), Fraction(1)], [a, b, a, b])


# ---------------------------------------------------------------- arc length

@dataclass(frozen=True)
class DerivativeOracle:
    """f'(t) as intervals; ``lip`` bounds the Lipschitz constant of the speed."""

    eval: Callable[[Fraction, int], tuple]
    lip: Fraction

    def __post_init__(self):
        if Q(self.lip) < 0:
            raise ContractError("Lipschitz bound must be >= 0")

    @classmethod
    def constant(cls, x: RationalLike, y: RationalLike) -> "DerivativeOracle":
        ix, iy = DyadicInterval.exact(x), DyadicInterval.exact(y)
        return cls(lambda t, n: (ix, iy), Fraction(0))


def _speed(dx: DyadicInterval, dy: DyadicInterval, n: int) -> DyadicInterval:
    def sq(iv):
        if iv.lo <= 0 <= iv.hi:
            return DyadicInterval(Fraction(0), max(iv.lo * iv.lo, iv.hi * iv.hi))
        return iv * iv

    s = sq(dx) + sq(dy)
    return DyadicInterval(sqrt_interval(s.lo, n).lo, sqrt_interval(s.hi, n).hi)


def arclength_from_derivative(d: DerivativeOracle, n: int, max_partitions: int = 1 << 16) -> DyadicInterval:
    """Certified integral of |f'| over [0, 1], width <= 2**-n.

    On a cell of width w with endpoint speeds g0, g1 the integral lies in
    w*(g0+g1)/2 +- lip*w**2/4, so N cells leave a remainder of lip/(4N),
    within the lip/(2N) allowed for a uniform partition.
    """
    lip = Q(d.lip)
    target = pow2(-n)
    N = 1
    speeds: dict = {}
    while N <= max_partitions:
        m = n + 2 + N.bit_length()
        lo = hi = Fraction(0)
        vals = []
        for i in range(N + 1):
            t = Fraction(i, N)
            key = (t, m)
            if key not in speeds:
                speeds[key] = _speed(*d.eval(t, m), m)
            vals.append(speeds[key])
        for g0, g1 in zip(vals, vals[1:]):
            lo += (g0.lo + g1.lo) / 2
            hi += (g0.hi + g1.hi) / 2
        rem = lip / (4 * N)
        res = DyadicInterval(lo / N - rem, hi / N + rem)
        if res.width <= target:
            return res
        N *= 2
    raise BudgetExceeded(f"arc length needs more than {max_partitions} partitions")

