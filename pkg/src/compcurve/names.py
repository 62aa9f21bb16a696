"""Curve names: precision-indexed generators that carry modulus promises.

A name is a deterministic map from a stage index to a finite rational object
(polygon, path or cover). Its promises (effective convergence, injectivity,
normalization) cannot be decided in general; the ``check``/``validate``
methods spot-check them at requested stages and fail loudly.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Iterable, Optional, Sequence, Union

from .exact import (
    BudgetExceeded,
    ContractError,
    DyadicInterval,
    Q,
    pow2,
    sqrt_interval,
    sqrt_sum,
)
from .geometry import (
    CompactCover,
    PathFunction,
    Point,
    Polygon,
    SquareBox,
    _Features,
    clip_segment,
    connected_components,
    eval_path,
    hausdorff,
    injectivity_ratio_sq,
    normalized_path,
    path_length,
    polygon_length,
    sup_path_distance,
)

FLAVORS = ("N", "M", "R", "K")


class _Memo:
    """Stage cache that publishes each stage exactly once."""

    def __init__(self, fn):
        self._fn = fn
        self._cache: dict = {}
        self._lock = threading.RLock()

    def __call__(self, n: int):
        if n < 0:
            raise ContractError(f"stage index must be >= 0, got {n}")
        try:
            return self._cache[n]
        except KeyError:
            pass
        with self._lock:
            if n not in self._cache:
                self._cache[n] = self._fn(n)
            return self._cache[n]


class KName:
    """Polygon sequence with the promise d_H(p_n, p_{n+1}) <= 2**-n."""

    def __init__(self, stage: Callable[[int], Polygon], label: str = "", script=None):
        self._stage = _Memo(stage)
        self.label = label
        self.script = script

    def __call__(self, n: int) -> Polygon:
        return self._stage(n)

    def __repr__(self):
        return f"KName({self.label or '?'})"

    @classmethod
    def fixed(cls, p: Polygon, label: str = "fixed") -> "KName":
        return cls.from_table([p], label=label)

    @classmethod
    def from_table(cls, table: Sequence[Polygon], label: str = "table") -> "KName":
        table = list(table)
        if not table:
            raise ContractError("stage table is empty")
        script = {"table": table, "extrapolate": "repeat_last"}
        return cls(lambda n: table[min(n, len(table) - 1)], label=label, script=script)

    def modulus_gap(self, n: int) -> DyadicInterval:
        return hausdorff(self(n), self(n + 1), n + 4)

    def check(self, n: int) -> bool:
        return self.modulus_gap(n).hi <= pow2(-n)

    def validate(self, stages: Iterable[int]) -> None:
        for n in stages:
            gap = self.modulus_gap(n)
            if gap.hi > pow2(-n):
                raise ContractError(
                    f"K-name {self.label}: d_H(p_{n}, p_{n+1}) in {gap} exceeds 2^-{n}")


class ParamName:
    """Path sequence with the promise sup_t |f(t) - f_s(t)| <= 2**-s.

    ``flavor`` is one of R (any parametrization), M (injective) or
    N (length-normalized).
    """

    def __init__(self, flavor: str, stage: Callable[[int], PathFunction], label: str = "",
                 script=None, orientation: Optional[Callable[[int], str]] = None):
        if flavor not in ("R", "M", "N"):
            raise ContractError(f"unknown parametrization flavor {flavor!r}")
        self.flavor = flavor
        self._stage = _Memo(stage)
        self.label = label
        self.script = script
        self.orientation = orientation

    def __call__(self, s: int) -> PathFunction:
        return self._stage(s)

    def __repr__(self):
        return f"ParamName({self.flavor}, {self.label or '?'})"

    def modulus_gap(self, s: int) -> DyadicInterval:
        return sup_path_distance(self(s), self(s + 1), s + 4)

    def check(self, s: int, grid: Fraction = Fraction(1, 16)) -> bool:
        try:
            self.validate([s], grid=grid)
        except ContractError:
            return False
        return True

    def validate(self, stages: Iterable[int], grid: Fraction = Fraction(1, 16)) -> None:
        for s in stages:
            gap = self.modulus_gap(s)
            if gap.hi > pow2(-s) + pow2(-(s + 1)):
                raise ContractError(
                    f"{self.flavor}-name {self.label}: sup|f_{s} - f_{s+1}| in {gap} too large")
            f = self(s)
            if self.flavor in ("M", "N") and len(set(f.values)) > 1:
                if injectivity_ratio_sq(f, grid) <= 0:
                    raise ContractError(
                        f"{self.flavor}-name {self.label}: stage {s} not injective on grid {grid}")
            if self.flavor == "N":
                res = n_condition_residual(f, None, grid, s + 4)
                if res.hi > pow2(-s):
                    raise ContractError(
                        f"N-name {self.label}: stage {s} arc length not proportional ({res})")


class LeftCEReal:
    """Nondecreasing rational sequence converging to a left computable real."""

    def __init__(self, stage: Callable[[int], Fraction], label: str = "", script=None):
        self._stage = _Memo(lambda n: Q(stage(n)))
        self.label = label
        self.script = script

    def __call__(self, n: int) -> Fraction:
        return self._stage(n)

    def __repr__(self):
        return f"LeftCEReal({self.label or '?'})"

    @classmethod
    def from_function(cls, fn: Callable[[int], Fraction], label: str = "") -> "LeftCEReal":
        return cls(fn, label=label)

    def check(self, n: int) -> bool:
        return self(n) <= self(n + 1)

    def validate(self, stages: Iterable[int]) -> None:
        for n in stages:
            if not self.check(n):
                raise ContractError(f"left c.e. sequence {self.label} decreases at stage {n}")


class CoverName:
    """Sequence of compact covers Q_n with d_H(union Q_n, C) < 2**-n."""

    def __init__(self, stage: Callable[[int], CompactCover], label: str = "", script=None):
        self._stage = _Memo(stage)
        self.label = label
        self.script = script

    def __call__(self, n: int) -> CompactCover:
        return self._stage(n)

    def __repr__(self):
        return f"CoverName({self.label or '?'})"

    def check(self, n: int) -> bool:
        """Exact test of union Q_{n+1} subset of union Q_n."""
        return cover_contains(self(n), self(n + 1))

    def validate(self, stages: Iterable[int]) -> None:
        for n in stages:
            if not self.check(n):
                raise ContractError(f"cover name {self.label}: stage {n+1} not inside stage {n}")


def box_in_union(box: SquareBox, boxes: Sequence[SquareBox]) -> bool:
    """Exact test that a closed box lies inside a union of closed boxes."""
    if any(b.contains_box(box) for b in boxes):
        return True
    x0, y0, x1, y1 = box.bounds()
    near = [b for b in boxes if b.intersects(box)]
    xs = {x0, x1}
    ys = {y0, y1}
    for b in near:
        bx0, by0, bx1, by1 = b.bounds()
        xs.update(v for v in (bx0, bx1) if x0 < v < x1)
        ys.update(v for v in (by0, by1) if y0 < v < y1)
    xs = sorted(xs)
    ys = sorted(ys)
    # every elementary cell, and every breakpoint, must be covered
    for i in range(len(xs)):
        for j in range(len(ys)):
            pts = [Point(xs[i], ys[j])]
            if i + 1 < len(xs):
                pts.append(Point((xs[i] + xs[i + 1]) / 2, ys[j]))
            if j + 1 < len(ys):
                pts.append(Point(xs[i], (ys[j] + ys[j + 1]) / 2))
            if i + 1 < len(xs) and j + 1 < len(ys):
                pts.append(Point((xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2))
            for p in pts:
                if not any(b.contains_point(p) for b in near):
                    return False
    return True


def cover_contains(outer: CompactCover, inner: CompactCover) -> bool:
    return all(box_in_union(b, outer.boxes) for b in inner.boxes)


# ---------------------------------------------------------------- widen

def widen(name, target: str):
    """Retag a name to a weaker representation (N -> M -> R -> K).

    To ``K`` the stage-n polygon is the trace of f_{n+1}; sup-norm closeness
    2**-(n+1) of the paths bounds the Hausdorff gap of their images.
    """
    if isinstance(name, KName):
        raise ContractError("a K-name cannot be widened further")
    if not isinstance(name, ParamName):
        raise ContractError("widen expects a ParamName")
    if target not in FLAVORS:
        raise ContractError(f"unknown target {target!r}")
    if FLAVORS.index(target) <= FLAVORS.index(name.flavor):
        raise ContractError(f"cannot strengthen or keep flavor {name.flavor} -> {target}")
    if target == "K":
        return KName(lambda n: name(n + 1).trace(), label=f"K({name.label})",
                     script={"widen": "K", "source": name.script})
    return ParamName(target, name, label=name.label,
                     script={"widen": target, "source": name.script},
                     orientation=name.orientation)


# ---------------------------------------------------------------- covers

def tile_polygon(p: Polygon, radius: Fraction) -> CompactCover:
    """Boxes of the given radius centred along p, consecutive centres
    at most ``radius`` apart in the max norm (so the boxes overlap)."""
    radius = Q(radius)
    verts = p.vertices
    if len(verts) == 1:
        return CompactCover([SquareBox(verts[0], radius)])
    boxes = [SquareBox(verts[0], radius)]
    for a, b in zip(verts, verts[1:]):
        linf = max(abs(b.x - a.x), abs(b.y - a.y))
        k = -(-linf // radius)
        k = max(int(k), 1)
        for i in range(1, k + 1):
            t = Fraction(i, k)
            boxes.append(SquareBox(Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t), radius))
    return CompactCover(boxes)


def kname_to_cover(k: KName) -> CoverName:
    """Q_n tiles p_{n+1} with boxes of radius 2**-(n+2).

    d_H(C, p_{n+1}) <= 2**-n and d_H(p_{n+1}, union Q_n) <= sqrt2 * 2**-(n+2),
    so d_H(C, union Q_n) <= 2**-(n-1).
    """
    return CoverName(lambda n: tile_polygon(k(n + 1), pow2(-(n + 2))),
                     label=f"cover({k.label})", script={"cover_of": k.script})


class _Z2:
    """a + b*sqrt(2) with integer a, b >= 0; exact ordering."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int):
        self.a = a
        self.b = b

    def __add__(self, other):
        return _Z2(self.a + other.a, self.b + other.b)

    def __lt__(self, other):
        # a1 + b1 r < a2 + b2 r  <=>  da < db * r  with da = a1 - a2, db = b2 - b1
        da = self.a - other.a
        db = other.b - self.b
        if db >= 0:
            return da < 0 or da * da < 2 * db * db
        return da < 0 and da * da > 2 * db * db

    def __le__(self, other):
        return not other < self

    def __eq__(self, other):
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))


_STEP = {(1, 0): _Z2(1, 0), (0, 1): _Z2(1, 0), (-1, 0): _Z2(1, 0), (0, -1): _Z2(1, 0),
         (1, 1): _Z2(0, 1), (1, -1): _Z2(0, 1), (-1, 1): _Z2(0, 1), (-1, -1): _Z2(0, 1)}


@dataclass
class SkeletonResult:
    polygon: Polygon
    pitch: Fraction
    nodes: int
    # 8-neighbour grid paths are within a factor (1 + 0.0824) of the
    # Euclidean geodesic between their endpoints, plus 2*sqrt2*pitch at the ends
    grid_error: str = "length <= 1.0824 * geodesic + 2*sqrt(2)*pitch"
    trimmed: tuple = (0, 0)


class _GridGraph:
    def __init__(self, boxes: Sequence[SquareBox], h: Fraction):
        self.h = h
        self.boxes = boxes
        node_boxes: dict = {}
        for bi, b in enumerate(boxes):
            x0, y0, x1, y1 = b.bounds()
            i0, i1 = _ceil_div(x0, h), _floor_div(x1, h)
            j0, j1 = _ceil_div(y0, h), _floor_div(y1, h)
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    node_boxes.setdefault((i, j), []).append(bi)
        self.node_boxes = node_boxes
        self._adj: dict = {}

    def point(self, node) -> Point:
        return Point(node[0] * self.h, node[1] * self.h)

    def neighbours(self, u):
        got = self._adj.get(u)
        if got is not None:
            return got
        out = []
        bu = self.node_boxes[u]
        for d, w in _STEP.items():
            v = (u[0] + d[0], u[1] + d[1])
            bv = self.node_boxes.get(v)
            if bv is None:
                continue
            if set(bu) & set(bv) or self._edge_inside(u, v, bu, bv):
                out.append((v, w))
        self._adj[u] = out
        return out

    def _edge_inside(self, u, v, bu, bv) -> bool:
        a, b = self.point(u), self.point(v)
        spans = []
        for bi in set(bu) | set(bv):
            c = clip_segment(a, b, self.boxes[bi])
            if c is not None:
                spans.append(c)
        spans.sort()
        reach = Fraction(0)
        for t0, t1 in spans:
            if t0 > reach:
                return False
            reach = max(reach, t1)
        return reach >= 1

    def shortest_path(self, a, b) -> list:
        _, prev = self.dijkstra(a, target=b)
        return _walk(prev, b)

    def dijkstra(self, src, target=None):
        dist = {src: _Z2(0, 0)}
        prev = {src: None}
        heap = [(_HeapKey(dist[src], 0), src)]
        counter = 1
        done = set()
        while heap:
            key, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == target:
                break
            du = dist[u]
            for v, w in self.neighbours(u):
                nd = du + w
                old = dist.get(v)
                if old is None or nd < old:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (_HeapKey(nd, counter), v))
                    counter += 1
        return dist, prev


class _HeapKey:
    __slots__ = ("d", "c")

    def __init__(self, d, c):
        self.d = d
        self.c = c

    def __lt__(self, other):
        if self.d == other.d:
            return self.c < other.c
        return self.d < other.d


def _floor_div(x: Fraction, h: Fraction) -> int:
    return int(x // h)


def _ceil_div(x: Fraction, h: Fraction) -> int:
    return -int((-x) // h)


def _simplify(points: Sequence[Point]) -> list:
    """Drop vertices that lie strictly inside a straight run."""
    out = [points[0]]
    for p in points[1:]:
        if p == out[-1]:
            continue
        if len(out) >= 2:
            a, b = out[-2], out[-1]
            d1, d2 = b - a, p - b
            if d1.cross(d2) == 0 and d1.dot(d2) > 0:
                out[-1] = p
                continue
        out.append(p)
    return out


class _CoverCertifier:
    """Certifies union(boxes) within tol of a polygon, box by box.

    A box is certified by one segment F with max_corner d_F <= tol
    (d_F is convex, so the whole box is then within tol of F).
    """

    def __init__(self, boxes, tol: Fraction, depth: int = 3):
        self.boxes = boxes
        self.tol = tol
        self.tol_sq = tol * tol
        self.depth = depth

    def certify_box(self, box: SquareBox, feats: _Features, depth: int,
                    lo: int = 0, hi: Optional[int] = None) -> Optional[set]:
        # cheap test first: d_F(corner) <= d_F(centre) + r*sqrt2 < d_F(centre) + 3r/2
        margin = self.tol - 3 * box.radius / 2
        if margin > 0:
            d, j = feats.nearest(box.center, lo, hi, self.tol_sq)
            if d is not None and d <= margin * margin:
                return {j}
        cs = box.corners()
        vals = [feats.nearest(c, lo, hi, self.tol_sq) for c in cs]
        if any(v[0] is None or v[0] > self.tol_sq for v in vals):
            return None
        for j in {v[1] for v in vals}:
            if all(feats.dist_sq(j, c) <= self.tol_sq for c in cs):
                return {j}
        if depth == 0:
            return None
        used = set()
        for qd in box.quadrants():
            got = self.certify_box(qd, feats, depth - 1, lo, hi)
            if got is None:
                return None
            used |= got
        return used

    def node_certify(self, box: SquareBox, graph, path_index: dict, lo: int, hi: int):
        """Certificate from a single path node near the box centre.

        Node v at distance <= tol - 3r/2 from the centre puts every corner
        within tol of v, and v lies on steps v-1 and v of the path.
        """
        margin = self.tol - 3 * box.radius / 2
        if margin <= 0:
            return None
        h = graph.h
        c = box.center
        ci, cj = _floor_div(c.x, h), _floor_div(c.y, h)
        reach = int(margin // h) + 1
        m2 = margin * margin
        best = None
        for i in range(ci - reach, ci + reach + 2):
            for j in range(cj - reach, cj + reach + 2):
                idx = path_index.get((i, j))
                if idx is None or not lo <= idx <= hi:
                    continue
                if (i * h - c.x) ** 2 + (j * h - c.y) ** 2 <= m2:
                    # prefer nodes far from the ends, they survive trimming
                    key = min(idx - lo, hi - idx)
                    if best is None or key > best[0]:
                        best = (key, idx)
        return None if best is None else best[1]

    def certify(self, poly, indices, lo: int = 0, hi: Optional[int] = None) -> Optional[dict]:
        feats = poly if isinstance(poly, _Features) else _Features(poly)
        out = {}
        for bi in indices:
            got = self.certify_box(self.boxes[bi], feats, self.depth, lo, hi)
            if got is None:
                return None
            out[bi] = got
        return out


def cover_skeleton(q: CompactCover, tol) -> Polygon:
    return skeleton_report(q, tol).polygon


def skeleton_report(q: CompactCover, tol, pitch: Optional[Fraction] = None,
                    max_rounds: int = 32) -> SkeletonResult:
    """Short polygon inside union(q) whose Hausdorff distance to union(q) is <= tol.

    Works on the 8-neighbour grid graph of pitch ``tol/4`` (capped by the
    smallest box radius): takes the shortest path between a graph-diameter
    pair of nodes. Where that geodesic misses part of the cover by more than
    tol, the path is re-routed through waypoints in the missed regions.
    Finally both ends are trimmed as far as the certified predicate allows.
    """
    tol = Q(tol)
    if tol <= 0:
        raise ContractError("tolerance must be positive")
    boxes = list(q.boxes)
    if len(connected_components(boxes)) != 1:
        raise ContractError("cover is disconnected")
    rmin = min(b.radius for b in boxes)
    h = pitch if pitch is not None else min(tol / 4, rmin)
    for _attempt in range(4):
        g = _GridGraph(boxes, h)
        if g.node_boxes:
            start = min(g.node_boxes)
            dist, _ = g.dijkstra(start)
            if len(dist) == len(g.node_boxes):
                break
        h = h / 2
    else:
        raise ContractError("grid graph of the cover is disconnected at the finest pitch tried")
    u = _farthest(dist)
    dist_u, prev_u = g.dijkstra(u)
    v = _farthest(dist_u)
    cert = _CoverCertifier(boxes, tol)
    way = [u, v]
    nodes = _walk(prev_u, v)
    for _round in range(max_rounds):
        pts = [g.point(x) for x in nodes]
        base, failed = _certify_path(cert, boxes, g, nodes, pts, 0, len(pts) - 1)
        if not failed:
            break
        # the geodesic cuts a corner of the cover: route through the missed parts
        way = _add_waypoints(g, boxes, failed, way, nodes, tol)
        nodes = [way[0]]
        for a, b in zip(way, way[1:]):
            nodes.extend(g.shortest_path(a, b)[1:])
    else:
        raise ContractError("cover is not within tol of any skeleton found (not curve-like at this tol)")
    last = len(pts) - 1

    def ok(lo, hi):
        # boxes certified by nodes/steps inside [lo, hi] stay certified
        redo = [bi for bi, (a, b) in base.items() if a < lo or b > hi]
        return not _certify_path(cert, boxes, g, nodes, pts, lo, hi, redo, stop_early=True)[1]

    lo_keep = _trim(lambda i: ok(i, last), 0, last)
    hi_keep = last - _trim(lambda i: ok(lo_keep, last - i), 0, last - lo_keep)
    sub = pts[lo_keep:hi_keep + 1]
    poly = Polygon(_simplify(sub)) if len(sub) > 1 else Polygon([sub[0]])
    return SkeletonResult(poly, h, len(g.node_boxes), trimmed=(lo_keep, last - hi_keep))


def _walk(prev: dict, v) -> list:
    out = []
    while v is not None:
        out.append(v)
        v = prev[v]
    out.reverse()
    return out


def _certify_path(cert, boxes, g, nodes, pts, lo, hi, indices=None, stop_early=False):
    """Certify boxes against the sub-path nodes[lo..hi].

    Returns ({box: (first, last) certifying node index}, [uncertified boxes]).
    """
    if indices is None:
        indices = range(len(boxes))
    path_index = {}
    for i in range(lo, hi + 1):
        path_index.setdefault(nodes[i], i)
    out = {}
    failed = []
    feats = None
    for bi in indices:
        idx = cert.node_certify(boxes[bi], g, path_index, lo, hi)
        if idx is not None:
            out[bi] = (idx, idx)
            continue
        if lo == hi:
            got = cert.certify_box(boxes[bi], _Features(Polygon([pts[lo]])), cert.depth)
            if got is None:
                failed.append(bi)
                if stop_early:
                    break
            else:
                out[bi] = (lo, lo)
            continue
        if feats is None:
            # features are the grid steps; step i joins pts[i] and pts[i+1]
            feats = _step_features(g, pts)
        got = cert.certify_box(boxes[bi], feats, cert.depth, lo, hi)
        if got is None:
            failed.append(bi)
            if stop_early:
                break
        else:
            out[bi] = (min(got), max(got) + 1)
    return out, failed


_FEATURE_CACHE: dict = {}


def _step_features(g, pts):
    key = (id(g), id(pts))
    hit = _FEATURE_CACHE.get(key)
    if hit is not None and hit[0] is pts:
        return hit[1]
    _FEATURE_CACHE.clear()
    feats = _Features(Polygon(pts))
    _FEATURE_CACHE[key] = (pts, feats)
    return feats


def _add_waypoints(g, boxes, failed, way, nodes, tol):
    """Insert one node per missed region into the waypoint list, ordered
    by the position of its nearest node along the current path."""
    picked = []
    for bi in failed:
        c = boxes[bi].center
        if any(max(abs(c.x - p.x), abs(c.y - p.y)) <= tol for p in picked):
            continue
        picked.append(c)
    pos = {}
    for i, node in enumerate(nodes):
        pos.setdefault(node, i)
    way_pos = [pos[w] for w in way]
    new = []
    for c in picked:
        w = _node_near(g, c)
        if w in pos and w in way:
            continue
        # nearest path node by Euclidean distance
        best = min(range(len(nodes)), key=lambda i: (nodes[i][0] * g.h - c.x) ** 2 + (nodes[i][1] * g.h - c.y) ** 2)
        new.append((best, w))
    merged = [(p, 0, w) for p, w in zip(way_pos, way)] + [(p, 1, w) for p, w in new]
    merged.sort(key=lambda t: (t[0], t[1]))
    # the last waypoint must stay last
    out = [w for _, _, w in merged if w != way[-1]] + [way[-1]]
    dedup = [out[0]]
    for w in out[1:]:
        if w != dedup[-1]:
            dedup.append(w)
    return dedup


def _node_near(g, c: Point):
    """Grid node of the cover closest to c (c is a box centre, so the box
    contains a node within one pitch)."""
    h = g.h
    ci, cj = _floor_div(c.x, h), _floor_div(c.y, h)
    best = None
    for i in range(ci - 1, ci + 3):
        for j in range(cj - 1, cj + 3):
            if (i, j) in g.node_boxes:
                d = (i * h - c.x) ** 2 + (j * h - c.y) ** 2
                if best is None or d < best[0]:
                    best = (d, (i, j))
    if best is None:
        raise ContractError("box without grid nodes")
    return best[1]


def _trim(pred, lo: int, hi: int) -> int:
    """Largest i in [lo, hi] with pred(i), given pred monotone and pred(lo)."""
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _farthest(dist: dict):
    best = None
    for node, d in dist.items():
        if best is None or best[0] < d or (best[0] == d and node < best[1]):
            best = (d, node)
    return best[1]


def cover_to_kname(c: CoverName) -> KName:
    """Stage n is a skeleton of Q_{n+2} at tolerance 2**-(n+2).

    With d_H(union Q_m, C) < 2**-m this gives d_H(p_n, C) <= 2**-(n+1) and
    therefore d_H(p_n, p_{n+1}) <= 2**-n.
    """
    return KName(lambda n: cover_skeleton(c(n + 2), pow2(-(n + 2))),
                 label=f"skeleton({c.label})", script={"skeleton_of": c.script})


# ---------------------------------------------------------------- lengths

def left_length(k: KName) -> LeftCEReal:
    """Left c.e. approximation of the length of the curve named by ``k``.

    Stage n: skeleton of the cover stage Q_n at tolerance 2**-n; l'_n is the
    running maximum of certified lower length bounds (precision n+2).
    """
    cover = kname_to_cover(k)

    def raw(n):
        sk = cover_skeleton(cover(n), pow2(-n))
        return polygon_length(sk, n + 2).lo

    raw_memo = _Memo(raw)

    def stage(n):
        return max(raw_memo(i) for i in range(n + 1))

    return LeftCEReal(stage, label=f"len({k.label})")


def n_condition_residual(f: PathFunction, total: Optional[Fraction], grid: Fraction,
                         n: int) -> DyadicInterval:
    """Certified max over grid t of |length(f on [0,t]) - t * total|.

    ``total`` defaults to the length of f itself.
    """
    from .geometry import grid_points
    if total is None:
        tot = path_length(f, n + 4)
    else:
        tot = DyadicInterval.exact(total)
    lo = hi = Fraction(0)
    for t in grid_points(Q(grid)):
        diff = path_length(f, n + 4, t) - tot * t
        lo = max(lo, max(Fraction(0), max(diff.lo, -diff.hi)))
        hi = max(hi, max(abs(diff.lo), abs(diff.hi)))
    return DyadicInterval(lo, hi)


def _rational_seq(r) -> Callable[[int], Fraction]:
    if isinstance(r, LeftCEReal):
        return r
    if callable(r):
        return lambda n: Q(r(n))
    raise ContractError("length sequence must be callable")


def normalize(k: KName, r, budget: int = 64) -> ParamName:
    """N-name for the curve of ``k`` given a rational sequence r_n -> l(C).

    Stage n searches s_n > max(n, s_{n-1}) with |l(p_s) - r_s| <= 2**-(n+2),
    takes the length-normalized parametrization of p_{s_n} (orientation
    chosen to match the previous stage) and checks a posteriori that
    sup |f_{n-1} - f_n| <= 2**-n, advancing s_n when the check fails.
    """
    rseq = _rational_seq(r)
    chosen: dict = {}
    orient: dict = {}
    lock = threading.RLock()

    def build(n):
        with lock:
            if n in chosen:
                return chosen[n][1]
            prev = build(n - 1) if n > 0 else None
            s_prev = chosen[n - 1][0] if n > 0 else -1
            s = max(n, s_prev) + 1
            limit = s + budget
            while s <= limit:
                p = k(s)
                lengths = polygon_length(p, n + 6)
                gap = lengths - rseq(s)
                if max(abs(gap.lo), abs(gap.hi)) <= pow2(-(n + 2)):
                    cands = [("forward", p)]
                    if len(p) > 1:
                        cands.append(("reversed", p.reversed()))
                    for tag, poly in cands:
                        f = normalized_path(poly, n + 4)
                        if prev is None or sup_path_distance(prev, f, n + 4).hi <= pow2(-n):
                            chosen[n] = (s, f)
                            orient[n] = tag
                            return f
                s += 1
            raise BudgetExceeded(f"normalize: promise not witnessed at budget (stage {n})")

    return ParamName("N", build, label=f"normalize({k.label})",
                     orientation=lambda n: (build(n), orient[n])[1])
