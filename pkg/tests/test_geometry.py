import itertools
import random
from fractions import Fraction as F

import pytest

from compcurve.constructors import koch, koch_param
from compcurve.exact import ContractError, sqrt_interval
from compcurve.geometry import (
    P,
    CompactCover,
    PathFunction,
    Polygon,
    SquareBox,
    box_seg_sq_dist,
    clip_segment,
    eval_normalized,
    eval_path,
    hausdorff,
    injectivity_lower_bound,
    is_simple,
    normalized_knots_exact,
    normalized_path,
    point_set_sq_dist,
    polygon_length,
    segments_intersect,
    seg_sq_dist,
    sq_dist,
    sup_path_distance,
    within_hausdorff,
)


# ---------------------------------------------------------------- oracles

def brute_simple(p: Polygon) -> bool:
    segs = list(p.segments())
    for i, j in itertools.combinations(range(len(segs)), 2):
        (a, b), (c, d) = segs[i], segs[j]
        if j == i + 1:
            # neighbours may only share the joint vertex
            if seg_sq_dist(c, a, b) == 0 and seg_sq_dist(d, a, b) == 0:
                return False
            if seg_sq_dist(a, c, d) == 0 or (seg_sq_dist(b, c, d) == 0 and b != c):
                return False
            continue
        if segments_intersect(a, b, c, d):
            return False
    return True


def samples(p: Polygon, per_seg: int):
    out = []
    for a, b in p.segments():
        out.extend(a + (b - a) * F(k, per_seg) for k in range(per_seg + 1))
    return out


def sampled_directed_lower(A: Polygon, B: Polygon, per_seg=16) -> F:
    """max over samples of A of the exact distance to B (a lower bound)."""
    return max(point_set_sq_dist(z, B) for z in samples(A, per_seg))


def knot_sup_sq(f, g):
    """Sup of |f - g|^2 over the merged knots (exact for piecewise-linear paths)."""
    ts = sorted(set(f.knots) | set(g.knots))
    return max(sq_dist(eval_path(f, t), eval_path(g, t)) for t in ts)


L = Polygon([P(0, 0), P(1, 0), P(1, 1)])


# ---------------------------------------------------------------- tests

def test_polygon_length_koch():
    for n in range(5):
        iv = polygon_length(koch(n), 30)
        assert iv.contains_interval(iv) and iv.width <= F(1, 2 ** 30)
        root = sqrt_interval(2 ** n, 30)
        assert iv.lo <= root.hi and root.lo <= iv.hi


def test_koch_vertex_count():
    assert [len(koch(n)) for n in range(4)] == [2, 5, 17, 65]


def test_hausdorff_parallel_segments():
    A = Polygon([P(0, 0), P(1, 0)])
    B = Polygon([P(0, 1), P(1, 1)])
    iv = hausdorff(A, B, 20)
    assert iv.contains(1)


def test_hausdorff_koch_base():
    iv = hausdorff(koch(0), koch(1), 30)
    assert iv.contains(F(1, 4)) and iv.width <= F(1, 2 ** 30)


@pytest.mark.parametrize("seed", range(4))
def test_hausdorff_against_sampling(seed):
    rng = random.Random(seed)
    pts = lambda k: Polygon.merged([P(F(rng.randint(-8, 8), 4), F(rng.randint(-8, 8), 4)) for _ in range(k)])
    A, B = pts(5), pts(4)
    iv = hausdorff(A, B, 16)
    low = max(sampled_directed_lower(A, B), sampled_directed_lower(B, A))
    assert iv.hi ** 2 >= low
    # the supremum of a distance to a polygon is attained on a fine enough sample
    fine = max(sampled_directed_lower(A, B, 256), sampled_directed_lower(B, A, 256))
    assert iv.lo ** 2 <= fine + F(1, 2 ** 6)


def test_within_hausdorff_decision():
    assert within_hausdorff(koch(0), koch(1), F(1, 4))
    assert not within_hausdorff(koch(0), koch(1), F(1, 4) - F(1, 2 ** 20))


@pytest.mark.parametrize("n", range(4))
def test_is_simple_matches_bruteforce_koch(n):
    assert is_simple(koch(n)) == brute_simple(koch(n)) is True


def test_is_simple_random_polygons():
    rng = random.Random(7)
    for _ in range(60):
        verts = Polygon.merged([P(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(rng.randint(2, 7))])
        if len(verts) < 2:
            continue
        assert is_simple(verts) == brute_simple(verts), verts


def test_is_simple_retrace_and_overlap():
    assert not is_simple(Polygon([P(0, 0), P(2, 0), P(1, 0)]))
    assert not is_simple(Polygon([P(0, 0), P(1, 0), P(1, 1), P(0, -1)]))


def test_sup_distance_matches_knot_oracle():
    for n in range(4):
        f, g = koch_param(n), koch_param(n + 1)
        iv = sup_path_distance(f, g, 30)
        s = knot_sup_sq(f, g)
        assert iv.lo ** 2 <= s <= iv.hi ** 2


def test_normalized_knots_and_eval():
    knots = normalized_knots_exact(L)
    assert knots == [F(0), F(1, 2), F(1)]
    bx, by = eval_normalized(L, F(3, 4), 20)
    assert bx.contains(1) and by.contains(F(1, 2))
    f = normalized_path(L, 0)
    assert eval_path(f, F(1, 2)) == P(1, 0)


def test_eval_normalized_irrational_lengths():
    p = Polygon([P(0, 0), P(1, 1), P(2, 1)])
    bx, by = eval_normalized(p, F(1, 2), 24)
    # half of sqrt(2) + 1 measured from the start lies on the diagonal
    h = (sqrt_interval(2, 40) + 1) * F(1, 2) / sqrt_interval(2, 40)
    assert bx.width <= F(1, 2 ** 24)
    assert bx.lo <= h.hi and h.lo <= bx.hi


def test_eval_normalized_rejects_bad_parameter():
    with pytest.raises(ContractError):
        eval_normalized(L, F(3, 2), 5)


def test_injectivity_bound_koch():
    for n in (2, 3):
        iv = injectivity_lower_bound(koch_param(n), F(1, 4 ** n), 20)
        assert iv.lo >= F(1, 3)


def test_box_primitives():
    box = SquareBox(P(0, 0), F(1))
    assert clip_segment(P(-2, 0), P(2, 0), box) == (F(1, 4), F(3, 4))
    assert clip_segment(P(2, 2), P(3, 3), box) is None
    assert box_seg_sq_dist(box, P(3, 0), P(3, 5)) == 4
    assert box.linf_margin(P(F(1, 2), 0)) == F(1, 2)
    assert box.contains_box(SquareBox(P(F(1, 2), 0), F(1, 2)))


def test_cover_connectivity():
    a = SquareBox(P(0, 0), F(1, 2))
    b = SquareBox(P(1, 0), F(1, 2))
    c = SquareBox(P(5, 0), F(1, 2))
    assert CompactCover([a, b]).is_connected()
    assert not CompactCover([a, c]).is_connected()


def test_path_function_contract():
    with pytest.raises(ContractError):
        PathFunction([F(0), F(1, 2)], [P(0, 0), P(1, 0)])
