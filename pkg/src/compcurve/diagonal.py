"""Sweep detection, disjoint-box search and a finite-injury priority simulator.

The simulator plays a curve construction against a finite roster of
scripted opponents. Each requirement R_e asks for a box around a point of
the constructed curve that is certified disjoint from opponent e's curve
(or, for the M vs N game, a certificate that the opponent's parametrization
is not length-normalized).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .constructors import place, zigzag_canonical
from .exact import ContractError, DyadicInterval, Q, floor_dyadic, pow2, sqrt_interval
from .geometry import (
    P,
    PathFunction,
    Point,
    Polygon,
    SquareBox,
    box_seg_sq_dist,
    clip_segment,
    eval_path,
    point_set_sq_dist,
    polygon_length,
    seg_sq_dist,
    sq_dist,
    sup_path_distance,
    within_hausdorff,
)
from .names import KName, ParamName

KINDS = ("K_vs_R", "R_vs_M", "M_vs_N")


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class Sweep:
    t0: Fraction
    t1: Fraction
    t2: Fraction
    t3: Fraction
    q: Point
    p: Point
    delta: Fraction  # certified lower bound on |p - q|

    def chain_indices(self):
        return self.t0, self.t3


def vertex_chain(f: PathFunction):
    """Knots and values with pauses dropped and every segment split at each
    path vertex lying inside it, so geometrically equal legs carry equal
    vertex runs."""
    ks, vs = [f.knots[0]], [f.values[0]]
    for k, v in zip(f.knots[1:], f.values[1:]):
        if v == vs[-1]:
            # a pause; keep the latest knot so the chain stays a function of time
            ks[-1] = k if len(vs) > 1 else ks[-1]
            continue
        ks.append(k)
        vs.append(v)
    pts = set(vs)
    rk, rv = [ks[0]], [vs[0]]
    for i in range(len(vs) - 1):
        a, b = vs[i], vs[i + 1]
        d = b - a
        inner = []
        for z in pts:
            w = z - a
            if d.cross(w) == 0:
                u = d.dot(w) / d.norm_sq()
                if 0 < u < 1:
                    inner.append(u)
        for u in sorted(inner):
            rk.append(ks[i] + (ks[i + 1] - ks[i]) * u)
            rv.append(a + d * u)
        rk.append(ks[i + 1])
        rv.append(b)
    return rk, rv


def _is_sweep(vs, i: int, m: int) -> bool:
    if m < 1 or i < 0 or i + 3 * m > len(vs) - 1:
        return False
    for k in range(m + 1):
        if vs[i + k] != vs[i + 2 * m - k] or vs[i + k] != vs[i + 2 * m + k]:
            return False
    return True


def detect_sweeps(f: PathFunction, eps) -> list:
    """Maximal exact-retrace sweeps of f with |p - q| >= eps.

    A sweep is a vertex run q ... p, its exact reversal p ... q and the
    same run again; it is maximal when it cannot be extended by one vertex
    on both sides.
    """
    eps = Q(eps)
    if eps <= 0:
        raise ContractError("eps must be positive")
    ks, vs = vertex_chain(f)
    n = len(vs)
    out = []
    for i in range(n):
        for m in range(1, (n - 1 - i) // 3 + 1):
            if not _is_sweep(vs, i, m):
                continue
            if i > 0 and _is_sweep(vs, i - 1, m + 1):
                continue
            if _is_sweep(vs, i, m + 1):
                continue
            q, p = vs[i], vs[i + m]
            d2 = sq_dist(p, q)
            if d2 < eps * eps:
                continue
            out.append(Sweep(ks[i], ks[i + m], ks[i + 2 * m], ks[i + 3 * m], q, p,
                             max(sqrt_interval(d2, 40).lo, eps)))
    return out


# ---------------------------------------------------------------- disjoint boxes

def _opp_sq_dist_box(box: SquareBox, opp: Polygon) -> Fraction:
    if len(opp) == 1:
        return box.sq_dist_point(opp[0])
    return min(box_seg_sq_dist(box, a, b) for a, b in opp.segments())


def find_disjoint_box(target: Polygon, opponent, opp_err, parent: SquareBox, grid,
                      max_radius: Optional[Fraction] = None):
    """(z, box) with z on target, box centred at z inside parent and
    certified dist(box, opponent) > opp_err; None when the grid has no such z."""
    opp_err, grid = Q(opp_err), Q(grid)
    opp = opponent.trace() if isinstance(opponent, PathFunction) else opponent
    cands = []
    segs = target.segments() if len(target) > 1 else [(target[0], target[0])]
    steps = max(int(1 / grid), 1)
    for a, b in segs:
        for k in range(steps + 1):
            z = a + (b - a) * Fraction(k, steps)
            if parent.contains_point_strictly(z):
                cands.append(z)
    best = None
    for z in cands:
        d2 = point_set_sq_dist(z, opp)
        d = sqrt_interval(d2, 40).lo
        r = min((d - opp_err) / 2, parent.linf_margin(z))
        if max_radius is not None:
            r = min(r, Q(max_radius))
        if r <= 0:
            continue
        if best is None or r > best[0]:
            best = (r, z)
    if best is None:
        return None
    r, z = best
    # a tidy dyadic radius just below r
    m = 2
    while floor_dyadic(r, m) == 0:
        m += 2
    r = floor_dyadic(r, m)
    box = SquareBox(z, r)
    if _opp_sq_dist_box(box, opp) > opp_err * opp_err and parent.contains_box(box):
        return z, box
    return None


# ---------------------------------------------------------------- opponents

class OpponentProgram:
    """Scripted opponent: stage t costs ``cost * (t + 1)`` steps.

    ``respond(s, budget)`` returns the stage-s path (promised within 2**-s
    of the opponent's limit function) or None when the budget is too small.
    """

    def __init__(self, name: str, stage: Optional[Callable[[int], PathFunction]], *,
                 cost: int = 1, claim: str = "R", params: Optional[dict] = None):
        self.name = name
        self._stage = stage
        self.cost = cost
        self.claim = claim
        self.params = params or {}

    def __repr__(self):
        return f"OpponentProgram({self.name})"

    @property
    def total(self) -> bool:
        return self._stage is not None

    def respond(self, s: int, budget: int) -> Optional[PathFunction]:
        """Stage s of the opponent's name if ``budget`` steps suffice."""
        if self._stage is None or budget < self.cost * (s + 1):
            return None
        return self._stage(s)


def _seg(a, b):
    a = a if isinstance(a, Point) else P(*a)
    b = b if isinstance(b, Point) else P(*b)
    return a, b


def divergent() -> OpponentProgram:
    return OpponentProgram("divergent", None, params={})


def tracer(a=(0, 0), b=(1, 0), cost: int = 1, claim: str = "N") -> OpponentProgram:
    A, B = _seg(a, b)
    f = PathFunction([Fraction(0), Fraction(1)], [A, B])
    return OpponentProgram("tracer", lambda t: f, cost=cost, claim=claim,
                           params={"a": A, "b": B, "cost": cost})


def avoider(a=(0, 0), b=(1, 0), offset=Fraction(1, 2), cost: int = 1) -> OpponentProgram:
    A, B = _seg(a, b)
    n = (B - A).perp() * Q(offset)
    f = PathFunction([Fraction(0), Fraction(1)], [A + n, B + n])
    return OpponentProgram("avoider", lambda t: f, cost=cost, claim="N",
                           params={"a": A, "b": B, "offset": Q(offset), "cost": cost})


def sweeper(a=(0, 0), b=(1, 0), q=Fraction(1, 2), delta=Fraction(1, 8), cost: int = 1) -> OpponentProgram:
    """Traces ab but runs q -> p -> q -> p on the way (an exact sweep)."""
    A, B = _seg(a, b)
    q, delta = Q(q), Q(delta)
    Qp, Pp = A + (B - A) * q, A + (B - A) * (q + delta)
    vals = [A, Qp, Pp, Qp, Pp, B]
    knots = [Fraction(i, 5) for i in range(6)]
    f = PathFunction(knots, vals)
    return OpponentProgram("sweeper", lambda t: f, cost=cost, claim="R",
                           params={"a": A, "b": B, "q": q, "delta": delta, "cost": cost})


def off_midpoint_tracer(a=(0, 0), b=(1, 0), w=Fraction(1, 4), cost: int = 1) -> OpponentProgram:
    """Traces ab with the midpoint reached at parameter w instead of 1/2."""
    A, B = _seg(a, b)
    w = Q(w)
    f = PathFunction([Fraction(0), w, Fraction(1)], [A, (A + B) / 2, B])
    return OpponentProgram("off_midpoint_tracer", lambda t: f, cost=cost, claim="N",
                           params={"a": A, "b": B, "w": w, "cost": cost})


TEMPLATES = {
    "divergent": divergent,
    "tracer": tracer,
    "avoider": avoider,
    "sweeper": sweeper,
    "off_midpoint_tracer": off_midpoint_tracer,
}


# ---------------------------------------------------------------- simulator state

@dataclass
class RequirementState:
    e: int
    box: Optional[SquareBox] = None
    z: Optional[Point] = None
    work: Optional[SquareBox] = None
    chord: Optional[tuple] = None
    retraced: bool = False
    anchor: Optional[Point] = None
    status: str = "idle"  # idle, silent, waiting, gadget, satisfied
    case: Optional[str] = None
    injuries: int = 0
    boxes: list = field(default_factory=list)  # (stage, box) history of the current life
    actions: list = field(default_factory=list)  # (stage, length increment interval)
    margin: Optional[Fraction] = None
    opp_stage: Optional[int] = None


@dataclass
class LogEntry:
    stage: int
    e: int
    case: str
    box: Optional[SquareBox]
    margin: Optional[Fraction] = None
    note: str = ""

    def line(self) -> str:
        from .exact import fmt_rational
        box = "-" if self.box is None else (
            f"({fmt_rational(self.box.center.x)},{fmt_rational(self.box.center.y)})"
            f"r{fmt_rational(self.box.radius)}")
        mg = "-" if self.margin is None else fmt_rational(self.margin)
        tail = f" {self.note}" if self.note else ""
        return f"s={self.stage} e={self.e} case={self.case} box={box} margin={mg}{tail}"


@dataclass
class Witness:
    z: Point
    history: list  # (stage, e, box)
    margins: dict  # e -> Fraction margin, or None when vacuous


@dataclass
class DiagResult:
    kind: str
    name: object  # KName or ParamName
    witness: Witness
    log: list
    states: list
    curves: list  # PathFunction per stage 0..S
    polygons: list  # image polygon per stage 0..S

    def log_lines(self) -> list:
        return [entry.line() for entry in self.log]


def _collapse_retraces(vals: list) -> list:
    """Image chain of a path: drop exact back-and-forth runs A B A B -> A B."""
    out = []
    for v in vals:
        if out and out[-1] == v:
            continue
        out.append(v)
        while len(out) >= 4 and out[-1] == out[-3] and out[-2] == out[-4]:
            del out[-2:]
    return out


def image_polygon(f: PathFunction) -> Polygon:
    return Polygon(_collapse_retraces(list(f.values)))


def _segments_of(f: PathFunction):
    """(index, a, b) for non-degenerate knot intervals."""
    out = []
    for i in range(len(f.values) - 1):
        a, b = f.values[i], f.values[i + 1]
        if a != b:
            out.append((i, a, b))
    return out


def _chord(f: PathFunction, box: SquareBox):
    """Single straight piece of f inside box: (i, t0, t1, P0, P1), else None."""
    hits = [(i, a, b) for i, a, b in _segments_of(f) if box_seg_sq_dist(box, a, b) == 0]
    if len(hits) != 1:
        return None
    i, a, b = hits[0]
    c = clip_segment(a, b, box)
    if c is None or c[0] == c[1]:
        return None
    u0, u1 = c
    k0, k1 = f.knots[i], f.knots[i + 1]
    return i, k0 + (k1 - k0) * u0, k0 + (k1 - k0) * u1, a + (b - a) * u0, a + (b - a) * u1


def _splice(f: PathFunction, i: int, t0: Fraction, t1: Fraction, pts: list, weights: list) -> PathFunction:
    """Replace f on [t0, t1] (inside knot interval i) by pts at knots
    t0 + (t1 - t0) * cumulative(weights)."""
    total = sum(weights)
    knots = list(f.knots[: i + 1])
    vals = list(f.values[: i + 1])
    acc = Fraction(0)
    inner_k = [t0]
    for w in weights:
        acc += w
        inner_k.append(t0 + (t1 - t0) * acc / total)
    inner_k[-1] = t1
    for k, v in zip(inner_k, pts):
        if k == knots[-1]:
            vals[-1] = v
            continue
        knots.append(k)
        vals.append(v)
    for k, v in zip(f.knots[i + 1:], f.values[i + 1:]):
        if k == knots[-1]:
            continue
        knots.append(k)
        vals.append(v)
    return PathFunction(knots, vals)


# ---------------------------------------------------------------- simulator

class _Sim:
    def __init__(self, kind, roster, S, budget, grid_steps=64, max_teeth=1024):
        if kind not in KINDS:
            raise ContractError(f"unknown diagonalization kind {kind!r}")
        if S < 1 or budget < 1:
            raise ContractError("stages and budget must be >= 1")
        self.kind = kind
        self.roster = list(roster)
        self.S = S
        self.budget = budget
        self.grid_steps = grid_steps
        self.max_teeth = max_teeth
        self.f = PathFunction([Fraction(0), Fraction(1)], [P(0, 0), P(1, 0)])
        self.root = SquareBox(P(Fraction(1, 2), 0), Fraction(1, 2))
        self.states = [RequirementState(e) for e in range(len(self.roster))]
        self.log: list = []
        self.curves = [self.f]
        self.edited = False

    # -- opponent probing

    def probe(self, e: int, s: int):
        """Largest t <= s with stages 0..t all answered; (t, path) or (None, None)."""
        prog = self.roster[e]
        steps = self.budget * (s + 1)
        best = (None, None)
        for t in range(s + 1):
            got = prog.respond(t, steps)
            if got is None:
                break
            again = prog.respond(t, steps)
            if again != got:
                raise ContractError(f"opponent {e} ({prog.name}) is not deterministic at stage {t}")
            best = (t, got)
        return best

    # -- geometry helpers

    def side(self, e: int, s: int) -> Fraction:
        if self.kind == "K_vs_R":
            return pow2(-(2 * e + 2))
        if self.kind == "R_vs_M":
            return pow2(-max(s + 2, 2 * e + 3))
        return pow2(-2 * e)

    def working_box(self, e: int, s: int, parent: SquareBox, hint: Optional[Point]):
        r = self.side(e, s) / 2
        cands = []
        if hint is not None:
            cands.append(hint)
        for i, a, b in _segments_of(self.f):
            for k in range(1, 16):
                z = a + (b - a) * Fraction(k, 16)
                if parent.contains_point_strictly(z):
                    cands.append(z)
        for _ in range(24):
            for z in cands:
                if parent.linf_margin(z) < r:
                    continue
                box = SquareBox(z, r)
                if _chord(self.f, box) is not None:
                    return box
            r /= 2
        return None

    def injure_below(self, e: int, s: int):
        for st in self.states[e + 1:]:
            if st.status != "idle":
                st.injuries += 1
                self.log.append(LogEntry(s, st.e, "injured", None, note=f"by={e}"))
            st.box = st.z = st.work = st.chord = None
            st.retraced = False
            st.status = "idle"
            st.case = None
            st.boxes = []
            st.margin = None

    def set_box(self, st, s, box, z, status, case, margin=None, note=""):
        if st.box is not None and box != st.box:
            self.injure_below(st.e, s)
        st.box, st.z, st.status, st.case, st.margin = box, z, status, case, margin
        st.boxes.append((s, box))
        self.log.append(LogEntry(s, st.e, case, box, margin, note))

    def length(self) -> DyadicInterval:
        return polygon_length(image_polygon(self.f), 40)

    # -- per-kind gadgets

    def gadget(self, st, s: int, opp: PathFunction, err: Fraction) -> Optional[str]:
        ch = self.chord(st)
        if ch is None:
            return None
        i, t0, t1, p0, p1 = ch
        d = p1 - p0
        dlen_hi = sqrt_interval(d.norm_sq(), 40).hi
        before = self.length()
        if self.kind == "K_vs_R":
            eps_c = Fraction(1, 8)
            # sweep-free position along the chord
            forb = [sw for sw in detect_sweeps(opp, eps_c * sqrt_interval(d.norm_sq(), 40).lo)]
            q_c = None
            for k in range(1, 6):
                cand = Fraction(k, 8)
                z = p0 + d * cand
                ok = True
                for sw in forb:
                    chain = Polygon.merged([eval_path(opp, t) for t in (sw.t0, sw.t1)])
                    if point_set_sq_dist(z, chain) <= (eps_c * dlen_hi) ** 2:
                        ok = False
                        break
                if ok:
                    q_c = cand
                    break
            if q_c is None:
                return None
            delta_abs = min(pow2(-(s + 1)), eps_c * sqrt_interval(d.norm_sq(), 40).lo)
            delta_c = floor_dyadic(delta_abs / dlen_hi, s + 8 + dlen_hi.denominator.bit_length())
            if delta_c <= 0:
                return None
            canon = [P(q_c + eps_c, 0), P(q_c, delta_c), P(q_c + 2 * eps_c, 0)]
            pts = [p0] + place(canon, p0, p1) + [p1]
            # parameter proportional to canonical position along the chord
            a_, b_ = q_c + eps_c, q_c + 2 * eps_c
            weights = [a_, Fraction(1, 2) * eps_c, Fraction(1, 2) * eps_c, 1 - b_]
            self.f = _splice(self.f, i, t0, t1, pts, weights)
            note = f"sweep_sim q={q_c} eps={eps_c} delta={delta_c}"
        elif self.kind == "R_vs_M":
            passes = _count_passes(opp, p0, p1)
            if passes >= 3:
                return "zswept"
            if passes != 1:
                return None
            delta_c = min(Fraction(1), floor_dyadic(pow2(-(s + 1)) / dlen_hi, s + 8))
            if delta_c <= 0:
                return None
            # replace the retrace triple P0 P1 P0 P1 by the Z-sweep
            vals = list(self.f.values)
            j = _find_triple(vals, p0, p1)
            if j is None:
                return None
            zb, zc = place([P(1, delta_c), P(0, -delta_c)], p0, p1)
            vals[j + 1], vals[j + 2] = zb, zc
            self.f = PathFunction(self.f.knots, vals)
            note = f"zsweep delta={delta_c}"
        else:
            # time follows horizontal progress and the verticals share a total
            # weight h, so the path moves by at most 2h|d| <= 2**-(s+1)
            need = dlen_hi * pow2(s - 1)
            m = max(1, -(-need.numerator // need.denominator))
            if m > self.max_teeth:
                return None
            canon = zigzag_canonical(m)
            h = Fraction(1, 8 * m)
            steps = list(zip(canon, canon[1:]))
            nvert = sum(1 for a, b in steps if a.x == b.x)
            weights = [b.x - a.x if a.x != b.x else h / nvert for a, b in steps]
            self.f = _splice(self.f, i, t0, t1, place(canon, p0, p1), weights)
            note = f"zigzag_double m={m}"
        after = self.length()
        st.actions.append((s, after - before))
        return note

    # -- main loop

    def run(self):
        for s in range(self.S):
            self.edited = False
            for st in self.states:
                e = st.e
                parent = self.root if e == 0 else self.states[e - 1].box
                if parent is None or (e > 0 and self.states[e - 1].status not in ("satisfied", "silent")):
                    break
                if st.status == "satisfied":
                    continue
                if not self.step(st, s, parent):
                    break
            self.curves.append(self.f)
        return self.finish()

    def step(self, st, s: int, parent: SquareBox) -> bool:
        """Advance requirement st; False blocks lower-priority requirements."""
        e = st.e
        if st.work is not None and st.status != "gadget":
            if self.chord(st) is None:
                st.work = st.chord = None
        t, opp = self.probe(e, s)
        st.opp_stage = t
        if self.kind == "R_vs_M" and opp is not None and not st.retraced and st.work is not None:
            # provisional box of a silent opponent: start over at the current scale
            st.work = st.chord = None
        if st.work is None:
            hint = self.states[e - 1].z if e > 0 else self.root.center
            work = self.working_box(e, s, st.box or parent, st.z or hint)
            if work is None:
                self.log.append(LogEntry(s, e, "no_room", None))
                return False
            ch = _chord(self.f, work)
            if self.kind == "R_vs_M" and opp is not None:
                if self.edited:
                    return False
                # retrace the chord three times; moves the path by at most |chord|
                self.injure_below(e, s)
                # only the middle third, so single-pass pieces stay in the box
                i, t0, t1, p0, p1 = ch
                d, dt = p1 - p0, t1 - t0
                a, b = p0 + d / 3, p0 + d * Fraction(2, 3)
                self.f = _splice(self.f, i, t0 + dt / 3, t0 + dt * Fraction(2, 3), [a, b, a, b], [1, 1, 1])
                self.edited = True
                st.retraced = True
                st.work, st.chord, st.anchor = work, (a, b), p0 + d / 6
            else:
                st.work, st.chord = work, (ch[3], ch[4])
                st.anchor = (ch[3] + ch[4]) / 2
        p0, p1 = st.chord
        if opp is None:
            if st.status == "idle":
                self.set_box(st, s, st.work, st.anchor, "silent", "silent")
            return True
        err = pow2(-t)
        opp_img = opp.trace()
        # (a) opponent far from the whole working box
        d2 = _opp_sq_dist_box(st.work, opp_img)
        if d2 > err * err:
            margin = sqrt_interval(d2, 40).lo - err
            self.set_box(st, s, st.work, st.anchor, "satisfied", "far", margin, note=f"t={t}")
            return True
        # (b) the curve inside the box differs from the opponent
        local = self.local_polygon(st.work)
        hit = find_disjoint_box(local, opp_img, err, st.work, Fraction(1, self.grid_steps))
        if hit is not None:
            z, box = hit
            margin = sqrt_interval(point_set_sq_dist(z, opp_img), 40).lo - err
            case = "gadget" if st.status == "gadget" else "differs"
            self.set_box(st, s, box, z, "satisfied", case, margin, note=f"t={t}")
            return True
        if st.status == "gadget":
            self.log.append(LogEntry(s, e, "awaiting", None, note=f"t={t}"))
            return False
        # (c) opponent close to the curve in the box; act once it is precise enough
        chord_len = sqrt_interval((p1 - p0).norm_sq(), 40).lo
        if err > chord_len * (Fraction(1, 16) if self.kind == "M_vs_N" else Fraction(1, 8)):
            self.log.append(LogEntry(s, e, "undecided", None, note=f"t={t}"))
            return st.box is not None
        if self.kind == "M_vs_N" and self.midpoint_probe(st, s, opp, err):
            return True
        if self.edited:
            self.log.append(LogEntry(s, e, "undecided", None, note=f"t={t} stage edited"))
            return st.box is not None
        note = self.gadget(st, s, opp, err)
        if note is None:
            self.log.append(LogEntry(s, e, "undecided", None, note=f"t={t} no gadget"))
            return st.box is not None
        if st.box is not None:
            self.injure_below(e, s)
        st.status = "gadget"
        st.box = None
        if note == "zswept":
            # the opponent already sweeps here; keep the straight piece and wait
            self.log.append(LogEntry(s, e, "zswept", st.work, note=f"t={t}"))
            return False
        self.edited = True
        self.log.append(LogEntry(s, e, "deploy", st.work, note=note))
        return False

    def chord(self, st):
        """Current (i, t0, t1, P0, P1) of the recorded chord, None if edited away."""
        if st.chord is None:
            return None
        p0, p1 = st.chord
        if self.kind == "R_vs_M" and st.retraced:
            j = _find_triple(list(self.f.values), p0, p1)
            return None if j is None else (j, self.f.knots[j], self.f.knots[j + 3], p0, p1)
        ch = _chord(self.f, st.work)
        if ch is None or (ch[3], ch[4]) != (p0, p1):
            return None
        return ch

    def local_polygon(self, box: SquareBox) -> Polygon:
        """Pieces of the curve image inside box, as one chain of clipped points."""
        pts = []
        for i, a, b in _segments_of(self.f):
            c = clip_segment(a, b, box)
            if c is None:
                continue
            u0, u1 = c
            pa, pb = a + (b - a) * u0, a + (b - a) * u1
            if not pts or pts[-1] != pa:
                pts.append(pa)
            if pb != pts[-1]:
                pts.append(pb)
        return Polygon(pts) if pts else Polygon([box.center])

    def midpoint_probe(self, st, s: int, opp: PathFunction, err: Fraction) -> bool:
        """Certify that opponent e is not length-normalized along the chord."""
        p0, p1 = st.chord
        chord_len = sqrt_interval((p1 - p0).norm_sq(), 40).lo
        t1 = _nearest_param(opp, p0)
        t2 = _nearest_param(opp, p1)
        mid = eval_path(opp, (t1 + t2) / 2)
        target = (p0 + p1) / 2
        tol = 2 * err + chord_len / 64
        dev = sqrt_interval(sq_dist(mid, target), 40).lo
        if dev > tol:
            self.set_box(st, s, st.work, target, "satisfied", "midpoint", dev - tol,
                         note=f"t1={t1} t2={t2}")
            return True
        return False

    def finish(self) -> DiagResult:
        polys = [image_polygon(f) for f in self.curves]
        deepest = None
        for st in self.states:
            if st.box is None or st.status not in ("satisfied", "silent"):
                break
            deepest = st
        K = polys[-1]
        if deepest is not None:
            z = deepest.z
            if not _on_polygon(z, K):
                local = self.local_polygon(deepest.box)
                z = local[0]
        else:
            z = P(Fraction(1, 2), 0) if _on_polygon(P(Fraction(1, 2), 0), K) else K[0]
        margins = {}
        for st in self.states:
            if st.status == "silent" or st.box is None:
                margins[st.e] = None
                continue
            if st.case == "midpoint":
                margins[st.e] = st.margin
                continue
            t, opp = self.probe(st.e, self.S - 1)
            if opp is None:
                margins[st.e] = None
                continue
            d = sqrt_interval(point_set_sq_dist(z, opp.trace()), 40).lo
            margins[st.e] = d - pow2(-t)
        history = [(s, st.e, b) for st in self.states for s, b in st.boxes]
        wit = Witness(z, history, margins)
        curves = list(self.curves)
        if self.kind == "K_vs_R":
            name = KName.from_table(polys, label="diag_K_vs_R")
        else:
            flavor = "R" if self.kind == "R_vs_M" else "M"
            name = ParamName(flavor, lambda n: curves[min(n, len(curves) - 1)],
                             label=f"diag_{self.kind}",
                             script={"table": curves, "extrapolate": "repeat_last"})
        return DiagResult(self.kind, name, wit, self.log, self.states, curves, polys)


def _on_polygon(z: Point, K: Polygon) -> bool:
    if len(K) == 1:
        return z == K[0]
    return any(seg_sq_dist(z, a, b) == 0 for a, b in K.segments())


def _nearest_param(f: PathFunction, z: Point) -> Fraction:
    """Parameter of a point of f nearest to z (exact projection per piece)."""
    best = None
    for i in range(len(f.values) - 1):
        a, b = f.values[i], f.values[i + 1]
        k0, k1 = f.knots[i], f.knots[i + 1]
        d = b - a
        c = d.norm_sq()
        if c == 0:
            u = Fraction(0)
        else:
            u = min(max((z - a).dot(d) / c, Fraction(0)), Fraction(1))
        pt = a + d * u
        dist = sq_dist(pt, z)
        if best is None or dist < best[0]:
            best = (dist, k0 + (k1 - k0) * u)
    return best[1]


def _count_passes(f: PathFunction, p0: Point, p1: Point) -> int:
    """How often f travels between the two ends of a chord (zones of
    radius |chord|/4 around p0 and p1)."""
    rho2 = (p1 - p0).norm_sq() / 16
    last = None
    passes = 0
    for a, b in zip(f.values, f.values[1:]):
        if a == b:
            continue
        hits = []
        for zone, c in (("L", p0), ("R", p1)):
            if seg_sq_dist(c, a, b) <= rho2:
                d = b - a
                cn = d.norm_sq()
                u = min(max((c - a).dot(d) / cn, Fraction(0)), Fraction(1))
                hits.append((u, zone))
        for _, zone in sorted(hits):
            if last is not None and zone != last:
                passes += 1
            last = zone
    return passes


def _find_triple(vals, p0, p1):
    for j in range(len(vals) - 3):
        if vals[j] == p0 and vals[j + 1] == p1 and vals[j + 2] == p0 and vals[j + 3] == p1:
            return j
    return None


def diagonalize(kind: str, roster: Sequence[OpponentProgram], S: int, budget: int) -> DiagResult:
    """Run the finite-injury construction for S stages (pure and deterministic)."""
    return _Sim(kind, roster, S, budget).run()


# ---------------------------------------------------------------- audits

def audit(res: DiagResult) -> dict:
    """Certified checks of a finished run; each value is (ok, detail)."""
    out = {}
    # length increments per action and per requirement
    inc_ok = True
    tot_ok = True
    for st in res.states:
        total = Fraction(0)
        for s, inc in st.actions:
            if inc.hi > pow2(-2 * st.e):
                inc_ok = False
            total += max(inc.hi, Fraction(0))
        if total > pow2(-st.e):
            tot_ok = False
    out["action_increment"] = (inc_ok, "every action adds <= 2^-2e")
    out["requirement_total"] = (tot_ok, "requirement e adds <= 2^-e in total")
    out["injuries"] = (all(st.injuries <= (1 << st.e) - 1 for st in res.states),
                       [st.injuries for st in res.states])
    nested = True
    for st in res.states:
        if st.e > 0 and st.box is not None and res.states[st.e - 1].box is not None:
            nested = nested and res.states[st.e - 1].box.contains_box(st.box)
    out["nesting"] = (nested, "B_e inside B_{e-1}")
    mod_ok = True
    for s in range(len(res.polygons) - 1):
        if not within_hausdorff(res.polygons[s], res.polygons[s + 1], pow2(-s)):
            mod_ok = False
        if res.kind != "K_vs_R":
            if sup_path_distance(res.curves[s], res.curves[s + 1], s + 4).hi > pow2(-s):
                mod_ok = False
    out["stage_modulus"] = (mod_ok, "d_H(K_s, K_s+1) <= 2^-s")
    # a silent requirement counts only if its opponent never produced a stage
    sat = [st for st in res.states
           if st.status == "satisfied" or (st.status == "silent" and st.opp_stage is None)]
    out["all_satisfied"] = (len(sat) == len(res.states), [st.status for st in res.states])
    margins_ok = all(m is None or m > 0 for m in res.witness.margins.values())
    out["margins"] = (margins_ok and len(sat) == len(res.states), res.witness.margins)
    out["witness_on_curve"] = (_on_polygon(res.witness.z, res.polygons[-1]), res.witness.z)
    return out
