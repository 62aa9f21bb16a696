import random
from fractions import Fraction as F

import pytest

from compcurve.constructors import koch_param, retrace_triple, zsweep
from compcurve.diagonal import (
    OpponentProgram,
    audit,
    detect_sweeps,
    diagonalize,
    divergent,
    find_disjoint_box,
    off_midpoint_tracer,
    sweeper,
    tracer,
    avoider,
)
from compcurve.exact import ContractError, pow2
from compcurve.geometry import P, PathFunction, Polygon, SquareBox, eval_path, point_set_sq_dist

from oracles import brute_sweeps


def scanned(f, eps):
    return {(s.t0, s.t1, s.t2, s.t3) for s in detect_sweeps(f, eps)}


def uniform(points):
    n = len(points) - 1
    return PathFunction([F(i, n) for i in range(n + 1)], points)


FIXTURES = {
    "triple": retrace_triple((P(0, 0), P(1, 0))),
    "koch2": koch_param(2),
    "zsweep": uniform(list(zsweep(1, F(1, 4)).vertices)),
    "interior_turn": uniform([P(0, 0), P(2, 0), P(1, 0), P(2, 0)]),
    "bent_triple": uniform([P(0, 0), P(1, 0), P(1, 1), P(1, 0), P(0, 0), P(1, 0), P(1, 1), P(2, 2)]),
    "two_sweeps": uniform([P(0, 0), P(1, 0), P(0, 0), P(1, 0), P(1, 2), P(1, 3), P(1, 2), P(1, 3)]),
    "back_only": uniform([P(0, 0), P(1, 0), P(0, 0)]),
}


def test_sweep_examples():
    (sw,) = detect_sweeps(FIXTURES["triple"], F(1, 2))
    assert (sw.t0, sw.t1, sw.t2, sw.t3) == (0, F(1, 3), F(2, 3), 1)
    assert sw.delta == 1
    assert detect_sweeps(FIXTURES["koch2"], F(1, 10)) == []
    assert detect_sweeps(FIXTURES["zsweep"], F(1, 10)) == []


def test_sweep_requires_positive_eps():
    with pytest.raises(ContractError):
        detect_sweeps(FIXTURES["triple"], 0)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_sweeps_match_bruteforce_fixtures(name):
    f = FIXTURES[name]
    for eps in (F(1, 10), F(1, 2), F(3, 2)):
        assert scanned(f, eps) == brute_sweeps(f, eps)


def test_sweeps_match_bruteforce_random():
    rng = random.Random(11)
    steps = [P(1, 0), P(-1, 0), P(0, 1), P(0, -1)]
    for _ in range(40):
        pts = [P(0, 0)]
        while len(pts) < rng.randint(3, 10):
            if len(pts) >= 2 and rng.random() < 0.4:
                pts.append(pts[-2])  # step back along the last segment
            else:
                pts.append(pts[-1] + rng.choice(steps))
        f = uniform(pts)
        assert scanned(f, F(1, 2)) == brute_sweeps(f, F(1, 2)), pts


def test_sweep_consumes_parameter_length():
    for f in FIXTURES.values():
        for sw in detect_sweeps(f, F(1, 10)):
            assert sw.t0 < sw.t1 < sw.t2 < sw.t3
            assert eval_path(f, sw.t0) == eval_path(f, sw.t2) == sw.q
            assert eval_path(f, sw.t1) == eval_path(f, sw.t3) == sw.p


# ---------------------------------------------------------------- disjoint boxes

UNIT = Polygon([P(0, 0), P(1, 0)])
PARENT = SquareBox(P(F(1, 2), F(1, 2)), F(1))


def test_disjoint_box_far_opponent():
    opp = PathFunction([F(0), F(1)], [P(0, 1), P(1, 1)])
    z, box = find_disjoint_box(UNIT, opp, F(1, 16), PARENT, F(1, 16))
    assert point_set_sq_dist(z, UNIT) == 0 and box.center == z
    assert PARENT.contains_box(box)
    assert box.radius <= (1 - F(1, 16)) / 2


def test_disjoint_box_contained_opponent():
    opp = PathFunction([F(0), F(1)], [P(0, 0), P(1, 0)])
    for grid in (F(1, 4), F(1, 64)):
        assert find_disjoint_box(UNIT, opp, F(1, 16), PARENT, grid) is None


def test_disjoint_box_left_half():
    opp = PathFunction([F(0), F(1)], [P(0, 0), P(F(1, 2), 0)])
    z, box = find_disjoint_box(UNIT, opp, F(1, 32), PARENT, F(1, 16))
    assert z.x >= F(3, 4)
    # the box misses the opponent by more than its modulus
    assert point_set_sq_dist(box.center, Polygon([P(0, 0), P(F(1, 2), 0)])) > (F(1, 32) + box.radius * 2) ** 2


# ---------------------------------------------------------------- simulator

def test_divergent_leaves_seed():
    res = diagonalize("K_vs_R", [divergent()], 8, 10)
    assert res.witness.z == P(F(1, 2), 0)
    assert all(p == UNIT for p in res.polygons)
    assert res.states[0].injuries == 0
    assert all(ok for ok, _ in audit(res).values())


def test_tracer_single_sweep_sim():
    res = diagonalize("K_vs_R", [tracer()], 12, 100)
    deploys = [e for e in res.log if e.case == "deploy"]
    assert len(deploys) == 1 and "sweep_sim" in deploys[0].note
    assert res.witness.margins[0] > 0
    (s, inc), = res.states[0].actions
    assert inc.hi <= 1
    assert all(ok for ok, _ in audit(res).values())


def test_midpoint_probe_without_edit():
    res = diagonalize("M_vs_N", [off_midpoint_tracer(w=F(1, 4))], 12, 100)
    assert [e.case for e in res.log if e.case not in ("undecided",)][0] == "midpoint"
    assert all(c == res.curves[0] for c in res.curves)
    assert all(ok for ok, _ in audit(res).values())


@pytest.mark.parametrize("opp", [tracer(claim="R"), sweeper()], ids=["tracer", "sweeper"])
def test_r_vs_m_audits(opp):
    # requirement 1 works in boxes of side 2^-max(s+2, 5), so it needs a longer run
    res = diagonalize("R_vs_M", [divergent(), opp], 14, 100)
    assert all(ok for ok, _ in audit(res).values()), audit(res)


def test_m_vs_n_with_exact_tracer():
    res = diagonalize("M_vs_N", [off_midpoint_tracer(), tracer()], 12, 100)
    assert all(ok for ok, _ in audit(res).values()), audit(res)


def test_injury_recorded_and_bounded():
    res = diagonalize("K_vs_R", [tracer(cost=300), avoider()], 20, 100)
    assert res.states[1].injuries >= 1
    rep = audit(res)
    assert rep["injuries"][0] and rep["nesting"][0]


def test_run_is_deterministic():
    roster = lambda: [divergent(), avoider(), tracer(claim="R")]
    a = diagonalize("K_vs_R", roster(), 12, 100)
    b = diagonalize("K_vs_R", roster(), 12, 100)
    assert a.log_lines() == b.log_lines()
    assert a.witness.z == b.witness.z


def test_nondeterministic_opponent_reported():
    calls = iter(range(10 ** 6))

    def flaky(t):
        k = next(calls)
        return PathFunction([F(0), F(1)], [P(0, F(k, 1000)), P(1, 0)])

    with pytest.raises(ContractError, match="not deterministic"):
        diagonalize("K_vs_R", [OpponentProgram("flaky", flaky)], 4, 10)


def test_bad_kind_and_stage_count():
    with pytest.raises(ContractError):
        diagonalize("K_vs_X", [divergent()], 4, 10)
    with pytest.raises(ContractError):
        diagonalize("K_vs_R", [divergent()], 0, 10)


def test_witness_margin_against_final_stage():
    roster = [divergent(), avoider(), tracer(claim="R")]
    res = diagonalize("K_vs_R", roster, 12, 100)
    z = res.witness.z
    for st in res.states:
        if st.opp_stage is None:
            continue
        t = st.opp_stage
        opp = roster[st.e].respond(t, 10 ** 6).trace()
        assert point_set_sq_dist(z, opp) > pow2(-t) ** 2
