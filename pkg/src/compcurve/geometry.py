"""Exact planar primitives over the rationals.

Points, polygons (vertex chains), piecewise-linear paths and axis-aligned
square neighbourhoods, together with the certified measurements the rest of
the package relies on: polygon length, length-normalized evaluation,
Hausdorff distance, simplicity, and path-to-path sup distance.

Squared distances are kept exact; square roots only appear in the returned
:class:`~compcurve.exact.DyadicInterval` values.
"""

from __future__ import annotations

import heapq
import itertools
from math import gcd
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .exact import (
    BudgetExceeded,
    ContractError,
    DyadicInterval,
    Q,
    RationalLike,
    pow2,
    sqrt_exact,
    sqrt_interval,
    sqrt_sum,
)


class Point:
    __slots__ = ("x", "y")

    def __init__(self, x: RationalLike, y: RationalLike):
        object.__setattr__(self, "x", x if type(x) is Fraction else Q(x))
        object.__setattr__(self, "y", y if type(y) is Fraction else Q(y))

    def __setattr__(self, name, value):
        raise AttributeError("Point is immutable")

    def __eq__(self, other):
        return isinstance(other, Point) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def __repr__(self):
        return f"Point({self.x}, {self.y})"

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __mul__(self, k) -> "Point":
        k = Q(k)
        return Point(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k) -> "Point":
        k = Q(k)
        return Point(self.x / k, self.y / k)

    def __neg__(self):
        return Point(-self.x, -self.y)

    def perp(self) -> "Point":
        """Rotation by +90 degrees (left normal of a direction)."""
        return Point(-self.y, self.x)

    def norm_sq(self) -> Fraction:
        return self.x * self.x + self.y * self.y

    def dot(self, other: "Point") -> Fraction:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Point") -> Fraction:
        return self.x * other.y - self.y * other.x


def P(x: RationalLike, y: RationalLike) -> Point:
    return Point(x, y)


def sq_dist(a: Point, b: Point) -> Fraction:
    dx = a.x - b.x
    dy = a.y - b.y
    return dx * dx + dy * dy


def lerp(a: Point, b: Point, t: Fraction) -> Point:
    return Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def seg_sq_dist(z: Point, a: Point, b: Point) -> Fraction:
    """Exact squared distance from ``z`` to the closed segment a-b."""
    dx = b.x - a.x
    dy = b.y - a.y
    c = dx * dx + dy * dy
    if c == 0:
        raise ContractError("degenerate segment")
    wx = z.x - a.x
    wy = z.y - a.y
    t = wx * dx + wy * dy
    if t <= 0:
        return wx * wx + wy * wy
    if t >= c:
        ex = z.x - b.x
        ey = z.y - b.y
        return ex * ex + ey * ey
    cr = wx * dy - wy * dx
    return cr * cr / c


def orient(a: Point, b: Point, c: Point) -> int:
    v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return (v > 0) - (v < 0)


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """p collinear with a-b assumed; test bounding-box inclusion."""
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed segments a-b and c-d share at least one point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(c, a, b):
        return True
    if o2 == 0 and _on_segment(d, a, b):
        return True
    if o3 == 0 and _on_segment(a, c, d):
        return True
    if o4 == 0 and _on_segment(b, c, d):
        return True
    return False


class Polygon:
    """A finite vertex chain [q_0, ..., q_r]; consecutive vertices differ."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Iterable):
        verts = tuple(v if isinstance(v, Point) else Point(*v) for v in vertices)
        if not verts:
            raise ContractError("polygon needs at least one vertex")
        for u, v in zip(verts, verts[1:]):
            if u == v:
                raise ContractError(f"zero-length segment at {u}")
        object.__setattr__(self, "vertices", verts)

    def __setattr__(self, name, value):
        raise AttributeError("Polygon is immutable")

    @classmethod
    def merged(cls, points: Iterable) -> "Polygon":
        """Build from a point list, dropping consecutive duplicates."""
        out = []
        for p in points:
            p = p if isinstance(p, Point) else Point(*p)
            if not out or out[-1] != p:
                out.append(p)
        return cls(out)

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __getitem__(self, i):
        return self.vertices[i]

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        if len(self.vertices) > 6:
            return f"Polygon(<{len(self.vertices)} vertices>)"
        return "Polygon([" + ", ".join(f"({v.x}, {v.y})" for v in self.vertices) + "])"

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def sq_lengths(self) -> list:
        return [sq_dist(a, b) for a, b in self.segments()]

    def reversed(self) -> "Polygon":
        return Polygon(self.vertices[::-1])

    def length(self, n: int) -> DyadicInterval:
        return polygon_length(self, n)

    def exact_length(self) -> Optional[Fraction]:
        """Length as a rational when every segment length is rational."""
        total = Fraction(0)
        for s in self.sq_lengths():
            r = sqrt_exact(s)
            if r is None:
                return None
            total += r
        return total

    def bbox(self):
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


class PathFunction:
    """Piecewise-linear map [0,1] -> Q^2 given by knots and values (may retrace)."""

    __slots__ = ("knots", "values")

    def __init__(self, knots: Iterable, values: Iterable):
        ks = tuple(Q(k) for k in knots)
        vs = tuple(v if isinstance(v, Point) else Point(*v) for v in values)
        if len(ks) != len(vs):
            raise ContractError("knots and values differ in length")
        if len(ks) < 2:
            raise ContractError("a path needs at least two knots")
        if ks[0] != 0 or ks[-1] != 1:
            raise ContractError("knots must run from 0 to 1")
        for a, b in zip(ks, ks[1:]):
            if not a < b:
                raise ContractError("knots must be strictly increasing")
        object.__setattr__(self, "knots", ks)
        object.__setattr__(self, "values", vs)

    def __setattr__(self, name, value):
        raise AttributeError("PathFunction is immutable")

    def __eq__(self, other):
        return (isinstance(other, PathFunction) and self.knots == other.knots
                and self.values == other.values)

    def __hash__(self):
        return hash((self.knots, self.values))

    def __repr__(self):
        return f"PathFunction(<{len(self.knots)} knots>)"

    def __call__(self, t: RationalLike) -> Point:
        return eval_path(self, t)

    @classmethod
    def constant(cls, p: Point) -> "PathFunction":
        return cls([0, 1], [p, p])

    @classmethod
    def uniform(cls, points: Sequence[Point]) -> "PathFunction":
        """Path visiting ``points`` at equally spaced knots."""
        m = len(points) - 1
        return cls([Fraction(i, m) for i in range(m + 1)], points)

    def trace(self) -> Polygon:
        """Image as a vertex chain (consecutive duplicates merged)."""
        return Polygon.merged(self.values)

    def lipschitz_sq(self) -> Fraction:
        """Square of the largest speed |v_{i+1}-v_i| / (t_{i+1}-t_i)."""
        best = Fraction(0)
        for (t0, t1), (a, b) in zip(zip(self.knots, self.knots[1:]),
                                    zip(self.values, self.values[1:])):
            s = sq_dist(a, b) / ((t1 - t0) ** 2)
            if s > best:
                best = s
        return best


def eval_path(f: PathFunction, t: RationalLike) -> Point:
    """Exact value of the piecewise-linear path at ``t``."""
    t = Q(t)
    if t < 0 or t > 1:
        raise ContractError(f"parameter {t} outside [0,1]")
    ks = f.knots
    lo, hi = 0, len(ks) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ks[mid] <= t:
            lo = mid
        else:
            hi = mid
    if t == ks[lo]:
        return f.values[lo]
    if t == ks[hi]:
        return f.values[hi]
    u = (t - ks[lo]) / (ks[hi] - ks[lo])
    return lerp(f.values[lo], f.values[hi], u)


class SquareBox:
    """Axis-aligned square V_r(center) = [cx-r, cx+r] x [cy-r, cy+r]."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius: RationalLike):
        c = center if isinstance(center, Point) else Point(*center)
        r = Q(radius)
        if r <= 0:
            raise ContractError("box radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def __setattr__(self, name, value):
        raise AttributeError("SquareBox is immutable")

    def __eq__(self, other):
        return (isinstance(other, SquareBox) and self.center == other.center
                and self.radius == other.radius)

    def __hash__(self):
        return hash((self.center, self.radius))

    def __repr__(self):
        return f"SquareBox(({self.center.x}, {self.center.y}), {self.radius})"

    @property
    def side(self) -> Fraction:
        return 2 * self.radius

    def bounds(self):
        c, r = self.center, self.radius
        return c.x - r, c.y - r, c.x + r, c.y + r

    def corners(self):
        x0, y0, x1, y1 = self.bounds()
        return [Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)]

    def contains_point(self, p: Point) -> bool:
        c, r = self.center, self.radius
        return abs(p.x - c.x) <= r and abs(p.y - c.y) <= r

    def contains_point_strictly(self, p: Point) -> bool:
        c, r = self.center, self.radius
        return abs(p.x - c.x) < r and abs(p.y - c.y) < r

    def contains_box(self, other: "SquareBox") -> bool:
        c, r = self.center, self.radius
        d = other.center
        return (abs(d.x - c.x) + other.radius <= r and abs(d.y - c.y) + other.radius <= r)

    def intersects(self, other: "SquareBox") -> bool:
        """Closed boxes share a point."""
        s = self.radius + other.radius
        return (abs(self.center.x - other.center.x) <= s
                and abs(self.center.y - other.center.y) <= s)

    def sq_dist_point(self, p: Point) -> Fraction:
        c, r = self.center, self.radius
        dx = abs(p.x - c.x) - r
        dy = abs(p.y - c.y) - r
        dx = dx if dx > 0 else 0
        dy = dy if dy > 0 else 0
        return Fraction(dx * dx + dy * dy)

    def linf_margin(self, p: Point) -> Fraction:
        """Largest radius of a box centred at p that stays inside self."""
        c, r = self.center, self.radius
        return min(r - abs(p.x - c.x), r - abs(p.y - c.y))

    def quadrants(self):
        h = self.radius / 2
        c = self.center
        return [SquareBox(Point(c.x + sx * h, c.y + sy * h), h)
                for sx in (-1, 1) for sy in (-1, 1)]

    def as_polygon(self) -> Polygon:
        cs = self.corners()
        return Polygon(cs + [cs[0]])


def clip_segment(a: Point, b: Point, box: SquareBox):
    """Parameter interval [t0, t1] of a-b inside the closed box, or None."""
    x0, y0, x1, y1 = box.bounds()
    t0, t1 = Fraction(0), Fraction(1)
    dx, dy = b.x - a.x, b.y - a.y
    for p, q in ((-dx, a.x - x0), (dx, x1 - a.x), (-dy, a.y - y0), (dy, y1 - a.y)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            if r > t1:
                return None
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return None
            if r < t1:
                t1 = r
    return t0, t1


def box_seg_sq_dist(box: SquareBox, a: Point, b: Point) -> Fraction:
    """Exact squared distance between a closed box and a closed segment."""
    if a == b:
        return box.sq_dist_point(a)
    if clip_segment(a, b, box) is not None:
        return Fraction(0)
    best = min(box.sq_dist_point(a), box.sq_dist_point(b))
    for c in box.corners():
        d = seg_sq_dist(c, a, b)
        if d < best:
            best = d
    return best


class CompactCover:
    """Finite nonempty set of square boxes; stands for the union of their closures."""

    __slots__ = ("boxes",)

    def __init__(self, boxes: Iterable[SquareBox]):
        bs = tuple(boxes)
        if not bs:
            raise ContractError("a cover needs at least one box")
        object.__setattr__(self, "boxes", bs)

    def __setattr__(self, name, value):
        raise AttributeError("CompactCover is immutable")

    def __len__(self):
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def __eq__(self, other):
        return isinstance(other, CompactCover) and self.boxes == other.boxes

    def __hash__(self):
        return hash(self.boxes)

    def __repr__(self):
        return f"CompactCover(<{len(self.boxes)} boxes>)"

    def contains_point(self, p: Point) -> bool:
        return any(b.contains_point(p) for b in self.boxes)

    def bbox(self):
        bs = [b.bounds() for b in self.boxes]
        return (min(b[0] for b in bs), min(b[1] for b in bs),
                max(b[2] for b in bs), max(b[3] for b in bs))

    def is_connected(self) -> bool:
        return len(connected_components(self.boxes)) == 1


def connected_components(boxes: Sequence[SquareBox]) -> list:
    """Components of the union of closed boxes (exact adjacency)."""
    n = len(boxes)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    rmax = max(b.radius for b in boxes)
    cell = 2 * rmax
    buckets: dict = {}
    for i, b in enumerate(boxes):
        key = (int(b.center.x // cell), int(b.center.y // cell))
        buckets.setdefault(key, []).append(i)
    for (cx, cy), members in buckets.items():
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                other = buckets.get((cx + dx, cy + dy))
                if not other:
                    continue
                for i in members:
                    for j in other:
                        if i < j and boxes[i].intersects(boxes[j]):
                            ri, rj = find(i), find(j)
                            if ri != rj:
                                parent[ri] = rj
    comps: dict = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


# ---------------------------------------------------------------- lengths

def polygon_length(p: Polygon, n: int) -> DyadicInterval:
    """Certified length of a polygon, width <= 2**-n."""
    if len(p) < 2:
        return DyadicInterval.exact(0)
    exact = p.exact_length()
    if exact is not None:
        return DyadicInterval(exact, exact)
    return sqrt_sum(p.sq_lengths(), n)


def _cumulative_intervals(sqs: Sequence[Fraction], m: int):
    """Cumulative length intervals and per-segment length intervals."""
    lens = [sqrt_interval(s, m) for s in sqs]
    cum = [DyadicInterval.exact(0)]
    for iv in lens:
        cum.append(cum[-1] + iv)
    return cum, lens


def normalized_knots_exact(p: Polygon) -> Optional[list]:
    """Cumulative-length ratios t_i when they are rational.

    That happens exactly when every segment length is a rational multiple
    of the first one (e.g. all lengths rational, or all equal).
    """
    sqs = p.sq_lengths()
    if not sqs:
        return None
    lens = [sqrt_exact(s / sqs[0]) for s in sqs]
    if any(x is None for x in lens):
        return None
    total = sum(lens)
    out = [Fraction(0)]
    acc = Fraction(0)
    for x in lens:
        acc += x
        out.append(acc / total)
    return out


def eval_normalized(p: Polygon, t: RationalLike, n: int, max_extra: int = 200):
    """Box (pair of intervals, sides <= 2**-n) containing the length-normalized p(t)."""
    t = Q(t)
    if t < 0 or t > 1:
        raise ContractError(f"parameter {t} outside [0,1]")
    if len(p) < 2:
        raise ContractError("normalized parametrization needs >= 2 vertices")
    verts = p.vertices
    if t == 0:
        return DyadicInterval.exact(verts[0].x), DyadicInterval.exact(verts[0].y)
    if t == 1:
        return DyadicInterval.exact(verts[-1].x), DyadicInterval.exact(verts[-1].y)
    knots = normalized_knots_exact(p)
    if knots is not None:
        pt = eval_path(PathFunction(knots, verts), t)
        return DyadicInterval.exact(pt.x), DyadicInterval.exact(pt.y)
    sqs = p.sq_lengths()
    target = pow2(-n)
    for m in range(n + 4, n + 4 + max_extra, 4):
        cum, lens = _cumulative_intervals(sqs, m)
        arc = cum[-1] * t
        bx = by = None
        for i in range(len(sqs)):
            if cum[i].lo > arc.hi or cum[i + 1].hi < arc.lo:
                continue
            lam = (arc - cum[i]) / lens[i]
            lam = DyadicInterval(max(lam.lo, Fraction(0)), min(max(lam.hi, Fraction(0)), Fraction(1)))
            if lam.lo > lam.hi:
                continue
            a, b = verts[i], verts[i + 1]
            ix = a.x + lam * (b.x - a.x)
            iy = a.y + lam * (b.y - a.y)
            bx = ix if bx is None else bx.hull(ix)
            by = iy if by is None else by.hull(iy)
        if bx is not None and bx.width <= target and by.width <= target:
            return bx, by
    raise BudgetExceeded("eval_normalized did not reach the requested precision")


def normalized_path(p: Polygon, n: int) -> PathFunction:
    """Rational-knot path within 2**-n (sup norm) of the length-normalized p.

    Exact when every segment length is rational; otherwise each knot
    t_i is replaced by a dyadic point of its certified interval.
    """
    if len(p) < 2:
        return PathFunction.constant(p[0])
    knots = normalized_knots_exact(p)
    if knots is not None:
        return PathFunction(knots, p.vertices)
    sqs = p.sq_lengths()
    # |p'| = L, so moving a knot by d moves values by <= L*d; pick d*L <= 2**-(n+1)
    total = sqrt_sum(sqs, 4).hi
    m = n + 2 + max(int(total).bit_length(), 0) + len(sqs).bit_length()
    while True:
        cum, _ = _cumulative_intervals(sqs, m + 4)
        knots = [Fraction(0)]
        for i in range(1, len(sqs)):
            r = cum[i] / cum[-1]
            knots.append(r.round_out(m).mid)
        knots.append(Fraction(1))
        if all(a < b for a, b in zip(knots, knots[1:])):
            return PathFunction(knots, p.vertices)
        m += 4


# ---------------------------------------------------------------- spatial index

class _Features:
    """Segments, points or boxes with a uniform-grid index for nearest queries."""

    def __init__(self, obj):
        if isinstance(obj, Polygon):
            if len(obj) == 1:
                v = obj[0]
                self.items = [("pt", v)]
            else:
                self.items = [("seg", a, b) for a, b in obj.segments()]
        elif isinstance(obj, CompactCover):
            self.items = [("box", b) for b in obj.boxes]
        else:
            raise ContractError(f"unsupported set type {type(obj).__name__}")
        boxes = [self._bbox(it) for it in self.items]
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[2] for b in boxes)
        y1 = max(b[3] for b in boxes)
        ext = max(x1 - x0, y1 - y0)
        k = len(self.items)
        if ext == 0:
            cell = Fraction(1)
        else:
            side = 1
            while side * side < k:
                side *= 2
            # finer than sqrt(k) buckets for long thin sets, but never much
            # below the typical feature size
            avg = sum(max(b[2] - b[0], b[3] - b[1]) for b in boxes) / k
            cell = max(ext / (32 * side), avg)
            if cell == 0:
                cell = Fraction(1)
        self.cell = cell
        self._int: dict = {}
        self.grid: dict = {}
        for idx, (bx0, by0, bx1, by1) in enumerate(boxes):
            for i in range(int(bx0 // cell), int(bx1 // cell) + 1):
                for j in range(int(by0 // cell), int(by1 // cell) + 1):
                    self.grid.setdefault((i, j), []).append(idx)
        keys = list(self.grid)
        self.imin = min(k[0] for k in keys)
        self.imax = max(k[0] for k in keys)
        self.jmin = min(k[1] for k in keys)
        self.jmax = max(k[1] for k in keys)

    def _seg_int(self, idx: int, zx: int, zy: int, e: int) -> Fraction:
        """Squared distance from (zx/e, zy/e) to segment idx in integer arithmetic."""
        pre = self._int.get(idx)
        if pre is None:
            _, a, b = self.items[idx]
            d = 1
            for v in (a.x, a.y, b.x, b.y):
                d = _lcm(d, v.denominator)
            pre = (d, a.x.numerator * (d // a.x.denominator), a.y.numerator * (d // a.y.denominator),
                   b.x.numerator * (d // b.x.denominator), b.y.numerator * (d // b.y.denominator))
            self._int[idx] = pre
        d, ax, ay, bx, by = pre
        # everything scaled by d*e
        wx, wy = zx * d - ax * e, zy * d - ay * e
        dx, dy = (bx - ax) * e, (by - ay) * e
        t = wx * dx + wy * dy
        s2 = (d * e) ** 2
        if t <= 0:
            return Fraction(wx * wx + wy * wy, s2)
        c = dx * dx + dy * dy
        if t >= c:
            ex, ey = wx - dx, wy - dy
            return Fraction(ex * ex + ey * ey, s2)
        cr = wx * dy - wy * dx
        return Fraction(cr * cr, c * s2)

    @staticmethod
    def _bbox(it):
        if it[0] == "pt":
            v = it[1]
            return v.x, v.y, v.x, v.y
        if it[0] == "seg":
            a, b = it[1], it[2]
            return min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y)
        return it[1].bounds()

    def dist_sq(self, idx: int, z: Point) -> Fraction:
        it = self.items[idx]
        if it[0] == "seg":
            e = _lcm(z.x.denominator, z.y.denominator)
            return self._seg_int(idx, z.x.numerator * (e // z.x.denominator),
                                 z.y.numerator * (e // z.y.denominator), e)
        if it[0] == "pt":
            return sq_dist(z, it[1])
        return it[1].sq_dist_point(z)

    def nearest(self, z: Point, lo: int = 0, hi: Optional[int] = None, cap=None):
        """(squared distance, feature index) of the nearest feature.

        Only features with index in [lo, hi) are considered. With ``cap`` the
        search may stop once no feature within squared distance cap remains,
        returning (None, -1) if none was found.
        """
        if hi is None:
            hi = len(self.items)
        cell = self.cell
        ci, cj = int(z.x // cell), int(z.y // cell)
        e = _lcm(z.x.denominator, z.y.denominator)
        zx = z.x.numerator * (e // z.x.denominator)
        zy = z.y.numerator * (e // z.y.denominator)
        items = self.items
        best = None
        best_idx = -1
        seen = set()
        reach = max(abs(ci - self.imin), abs(ci - self.imax),
                    abs(cj - self.jmin), abs(cj - self.jmax))
        k = 0
        while True:
            for key in _ring(ci, cj, k):
                for idx in self.grid.get(key, ()):
                    if idx in seen or not lo <= idx < hi:
                        continue
                    seen.add(idx)
                    if items[idx][0] == "seg":
                        d = self._seg_int(idx, zx, zy, e)
                    else:
                        d = self.dist_sq(idx, z)
                    if best is None or d < best:
                        best, best_idx = d, idx
            # features outside ring k are at least k*cell away
            if best is not None and best <= (k * cell) ** 2:
                break
            if k > reach or (cap is not None and (k * cell) ** 2 > cap):
                break
            k += 1
        return best, best_idx


def _ring(ci, cj, k):
    if k == 0:
        yield (ci, cj)
        return
    for i in range(ci - k, ci + k + 1):
        yield (i, cj - k)
        yield (i, cj + k)
    for j in range(cj - k + 1, cj + k):
        yield (ci - k, j)
        yield (ci + k, j)


# ---------------------------------------------------------------- Hausdorff

def _initial_pieces(obj):
    if isinstance(obj, Polygon):
        if len(obj) == 1:
            return [("pt", obj[0])]
        return [("seg", a, b) for a, b in obj.segments()]
    if isinstance(obj, CompactCover):
        return [("box", b) for b in obj.boxes]
    raise ContractError(f"unsupported set type {type(obj).__name__}")


def _corners(piece):
    if piece[0] == "pt":
        return [piece[1]]
    if piece[0] == "seg":
        return [piece[1], piece[2]]
    return piece[1].corners()


def _split(piece):
    if piece[0] == "seg":
        a, b = piece[1], piece[2]
        m = Point((a.x + b.x) / 2, (a.y + b.y) / 2)
        return [("seg", a, m), ("seg", m, b)]
    if piece[0] == "box":
        return [("box", q) for q in piece[1].quadrants()]
    return []


def directed_hausdorff_sq_bounds(A, B, n: int, max_pieces: int = 400_000):
    """Exact rational bounds (lo_sq, hi_sq) on sup_{a in A} dist(a, B)**2.

    Branch and bound over pieces of A. The upper bound on a piece uses that
    x -> dist(x, F) is convex for every convex feature F of B, so its max
    over a segment or box is attained at a corner:
        sup_piece min_F d_F <= min_F max_corner d_F.
    """
    feats = _Features(B)
    cache: dict = {}

    def at(z):
        r = cache.get(z)
        if r is None:
            r = feats.nearest(z)
            cache[z] = r
        return r

    lb_sq = Fraction(-1)
    heap = []
    counter = itertools.count()

    def bound(piece):
        nonlocal lb_sq
        cs = _corners(piece)
        vals = [at(c) for c in cs]
        lo = max(v[0] for v in vals)
        if lo > lb_sq:
            lb_sq = lo
        cands = {v[1] for v in vals}
        if len(cands) == 1:
            return lo
        ub = None
        for j in cands:
            m = max(feats.dist_sq(j, c) for c in cs)
            if ub is None or m < ub:
                ub = m
        return ub

    for piece in _initial_pieces(A):
        ub = bound(piece)
        heapq.heappush(heap, (-ub, next(counter), piece))

    step = pow2(-(n + 1))
    retired = Fraction(0)
    evaluated = 0

    def target():
        lb = sqrt_interval(max(lb_sq, Fraction(0)), n + 3).lo
        return (lb + step) ** 2

    tgt = target()
    last_lb = lb_sq
    while heap:
        neg_ub, _, piece = heap[0]
        ub = -neg_ub
        if lb_sq != last_lb:
            tgt = target()
            last_lb = lb_sq
        if ub <= tgt:
            break
        heapq.heappop(heap)
        if ub <= lb_sq:
            continue
        kids = _split(piece)
        if not kids:
            retired = max(retired, ub)
            continue
        for kid in kids:
            kub = bound(kid)
            evaluated += 1
            if kub > lb_sq:
                heapq.heappush(heap, (-kub, next(counter), kid))
            else:
                retired = max(retired, kub)
        if evaluated > max_pieces:
            raise BudgetExceeded("Hausdorff refinement exceeded its piece budget")
    hi_sq = max(lb_sq, retired, -heap[0][0] if heap else Fraction(0))
    return max(lb_sq, Fraction(0)), hi_sq


def directed_hausdorff(A, B, n: int) -> DyadicInterval:
    lo_sq, hi_sq = directed_hausdorff_sq_bounds(A, B, n)
    lo = sqrt_interval(lo_sq, n + 3).lo
    hi = sqrt_interval(hi_sq, n + 3).hi
    return DyadicInterval(lo, max(lo, hi))


def hausdorff(A, B, n: int) -> DyadicInterval:
    """Certified Hausdorff distance (Euclidean point metric), width <= 2**-n.

    ``A`` and ``B`` are polygons or compact covers (union of closed boxes).
    """
    ab = directed_hausdorff(A, B, n)
    ba = directed_hausdorff(B, A, n)
    return DyadicInterval(max(ab.lo, ba.lo), max(ab.hi, ba.hi))


def directed_within_sq(A, B, eps_sq: Fraction, max_pieces: int = 400_000) -> bool:
    """Decide sup_{a in A} dist(a, B)**2 <= eps_sq exactly.

    Pieces of A are accepted as soon as one feature of B is within eps at
    every corner and rejected when a corner is farther than eps from B.
    Only undecided pieces are split, so this is much cheaper than
    computing the distance when eps has slack.
    """
    feats = _Features(B)
    stack = _initial_pieces(A)
    evaluated = 0
    while stack:
        piece = stack.pop()
        cs = _corners(piece)
        vals = [feats.nearest(c) for c in cs]
        if any(v[0] > eps_sq for v in vals):
            return False
        if any(all(feats.dist_sq(j, c) <= eps_sq for c in cs) for j in {v[1] for v in vals}):
            continue
        kids = _split(piece)
        if not kids:
            continue
        stack.extend(kids)
        evaluated += len(kids)
        if evaluated > max_pieces:
            raise BudgetExceeded("Hausdorff decision exceeded its piece budget")
    return True


def within_hausdorff(A, B, eps: RationalLike, max_pieces: int = 400_000) -> bool:
    """Exact decision of d_H(A, B) <= eps."""
    eps = Q(eps)
    if eps < 0:
        return False
    e2 = eps * eps
    return directed_within_sq(A, B, e2, max_pieces) and directed_within_sq(B, A, e2, max_pieces)


def point_set_sq_dist(z: Point, B) -> Fraction:
    """Exact squared distance from a point to a polygon or cover."""
    return _Features(B).nearest(z)[0]


# ---------------------------------------------------------------- simplicity

def is_simple(p: Polygon) -> bool:
    """Exact test that the vertex chain is a simple (non-self-touching) arc."""
    verts = p.vertices
    segs = list(zip(verts, verts[1:]))
    m = len(segs)
    if m <= 1:
        return True
    # adjacent segments may only share their common vertex
    for i in range(m - 1):
        a, b = segs[i]
        c = segs[i + 1][1]
        if orient(a, b, c) == 0 and (b - a).dot(c - b) < 0:
            return False
    boxes = [(min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y)) for a, b in segs]
    x0 = min(b[0] for b in boxes)
    y0 = min(b[1] for b in boxes)
    x1 = max(b[2] for b in boxes)
    y1 = max(b[3] for b in boxes)
    ext = max(x1 - x0, y1 - y0)
    side = 1
    while side * side < m:
        side *= 2
    avg = sum(max(b[2] - b[0], b[3] - b[1]) for b in boxes) / m
    cell = max(avg, ext / (64 * side)) if ext else Fraction(1)
    grid: dict = {}
    for idx, (bx0, by0, bx1, by1) in enumerate(boxes):
        for i in range(int(bx0 // cell), int(bx1 // cell) + 1):
            for j in range(int(by0 // cell), int(by1 // cell) + 1):
                grid.setdefault((i, j), []).append(idx)
    checked = set()
    for members in grid.values():
        for ii in range(len(members)):
            for jj in range(ii + 1, len(members)):
                i, j = members[ii], members[jj]
                if i > j:
                    i, j = j, i
                if j == i + 1 or (i, j) in checked:
                    continue
                checked.add((i, j))
                bi, bj = boxes[i], boxes[j]
                if bi[2] < bj[0] or bj[2] < bi[0] or bi[3] < bj[1] or bj[3] < bi[1]:
                    continue
                if segments_intersect(segs[i][0], segs[i][1], segs[j][0], segs[j][1]):
                    return False
    return True


# ---------------------------------------------------------------- path metrics

def merged_knots(f: PathFunction, g: PathFunction) -> list:
    return sorted(set(f.knots) | set(g.knots))


def sup_path_sq_distance(f: PathFunction, g: PathFunction) -> Fraction:
    """Exact max_t |f(t) - g(t)|**2.

    On each common linearity interval f - g is affine, so |f - g| is convex
    there and its maximum sits at an endpoint of the interval.
    """
    best = Fraction(0)
    for t in merged_knots(f, g):
        d = sq_dist(eval_path(f, t), eval_path(g, t))
        if d > best:
            best = d
    return best


def sup_path_distance(f: PathFunction, g: PathFunction, n: int) -> DyadicInterval:
    return sqrt_interval(sup_path_sq_distance(f, g), n)


def grid_points(h: Fraction) -> list:
    h = Q(h)
    if h <= 0:
        raise ContractError("grid step must be positive")
    pts = []
    k = 0
    while k * h <= 1:
        pts.append(k * h)
        k += 1
    if pts[-1] != 1:
        pts.append(Fraction(1))
    return pts


def injectivity_ratio_sq(f: PathFunction, h: RationalLike) -> Fraction:
    """min over grid pairs t1 != t2 of |f(t1) - f(t2)|**2 / (t1 - t2)**2 (exact)."""
    ts = grid_points(Q(h))
    vals = [eval_path(f, t) for t in ts]
    best = None
    for i in range(len(ts)):
        for j in range(i + 1, len(ts)):
            r = sq_dist(vals[i], vals[j]) / (ts[j] - ts[i]) ** 2
            if best is None or r < best:
                best = r
    return best if best is not None else Fraction(0)


def injectivity_lower_bound(f: PathFunction, h: RationalLike, n: int) -> DyadicInterval:
    """Grid statistic min |f(t1)-f(t2)|/|t1-t2| on the grid of step h.

    This is a statistic on finitely many pairs, not the true infimum over
    [0,1]; the interval certifies the statistic itself.
    """
    if len(f.knots) < 2:
        raise ContractError("path needs two knots")
    return sqrt_interval(injectivity_ratio_sq(f, h), n)


def path_arc_prefix_sq_lengths(f: PathFunction, t: Fraction) -> list:
    """Squared lengths of the pieces of f restricted to [0, t]."""
    out = []
    prev = f.values[0]
    for k, v in zip(f.knots[1:], f.values[1:]):
        if k >= t:
            end = eval_path(f, t)
            if end != prev:
                out.append(sq_dist(prev, end))
            break
        if v != prev:
            out.append(sq_dist(prev, v))
        prev = v
    return out


def path_length(f: PathFunction, n: int, t: RationalLike = 1) -> DyadicInterval:
    """Certified length of the path restricted to [0, t] (counts retraces)."""
    return sqrt_sum(path_arc_prefix_sq_lengths(f, Q(t)), n)
