import random

from gen_helpers import random_total_ts
from tlt_synth.reachability import (
    ctrl_reach,
    invariant,
    rcis,
    reach_max,
    reach_min,
    robust_invariant,
)
from tlt_synth.systems import ControlledTransitionSystem, StateSet, TransitionSystem


def full(ts):
    return ts.full_set()


def members(result):
    return sorted(result.set_)


def test_reach_min_traffic_goldens(traffic_light):
    gb = StateSet.from_indices(5, [2, 4])  # {g, b} states
    assert members(reach_min(traffic_light, full(traffic_light), gb)) == [0, 1, 2, 3, 4]


def test_reach_min_empty_stay(traffic_light):
    gb = StateSet.from_indices(5, [2, 4])
    res = reach_min(traffic_light, StateSet.empty(5), gb)
    assert res.set_ == gb


def test_reach_min_empty_target(traffic_light):
    res = reach_min(traffic_light, full(traffic_light), StateSet.empty(5))
    assert res.set_.is_empty()


def test_reach_max_traffic(traffic_light):
    gb = StateSet.from_indices(5, [2, 4])
    assert members(reach_max(traffic_light, full(traffic_light), gb)) == [0, 1, 2, 3, 4]
    assert reach_max(traffic_light, full(traffic_light), StateSet.empty(5)).set_.is_empty()


def chain_ts():
    # 0 -> 1 -> 2 -> 2
    return TransitionSystem(3, [[1], [2], [2]], [0], [], [set(), set(), set()])


def test_deterministic_chain_collapses_min_max():
    ts = chain_ts()
    target = StateSet.from_indices(3, [2])
    stay = full(ts)
    assert reach_min(ts, stay, target).set_ == reach_max(ts, stay, target).set_
    assert members(reach_min(ts, stay, target)) == [0, 1, 2]


def test_robust_invariant_traffic(traffic_light):
    assert members(robust_invariant(traffic_light, full(traffic_light))) == [0, 1, 2, 3, 4]


def test_robust_invariant_empty(traffic_light):
    assert robust_invariant(traffic_light, StateSet.empty(5)).set_.is_empty()


def test_robust_invariant_chain():
    ts = chain_ts()
    assert members(robust_invariant(ts, StateSet.from_indices(3, [0, 2]))) == [2]


def test_invariant_traffic_vanishes(traffic_light):
    # both the stated set and the intersection it was derived from are empty
    assert invariant(traffic_light, StateSet.from_indices(5, [0, 1, 3])).set_.is_empty()
    assert invariant(traffic_light, StateSet.from_indices(5, [1, 2, 3, 4])).set_.is_empty()


def test_invariant_full_and_ping_pong(traffic_light):
    assert members(invariant(traffic_light, full(traffic_light))) == [0, 1, 2, 3, 4]
    pp = TransitionSystem(2, [[1], [0]], [0], [], [set(), set()])
    assert members(invariant(pp, full(pp))) == [0, 1]


def test_ctrl_reach_four_state(four_state_cts):
    target = StateSet.from_indices(4, [1, 3])
    res = ctrl_reach(four_state_cts, full(four_state_cts), target)
    assert members(res) == [0, 1, 2, 3]
    assert ctrl_reach(four_state_cts, full(four_state_cts), full(four_state_cts)).set_ == full(four_state_cts)
    got = ctrl_reach(four_state_cts, StateSet.empty(4), target)
    assert got.set_ == target


def test_rcis_four_state(four_state_cts):
    target = StateSet.from_indices(4, [1, 3])
    assert members(rcis(four_state_cts, target)) == [1, 3]
    assert rcis(four_state_cts, full(four_state_cts)).set_ == full(four_state_cts)


def test_rcis_no_self_preserving_input():
    cts = ControlledTransitionSystem(
        2, ["u0"], [[[1]], [[0]]], [0], [], [set(), set()]
    )
    assert rcis(cts, StateSet.from_indices(2, [0])).set_.is_empty()


def test_layers_record_entry_round(traffic_light):
    gb = StateSet.from_indices(5, [2, 4])
    res = reach_min(traffic_light, full(traffic_light), gb)
    assert res.layers[2] == 0 and res.layers[4] == 0
    assert res.layers[1] == 1  # its successors {2,4} are the target
    assert res.layers[0] == 2 and res.layers[3] == 3


def test_monotone_inclusions_random():
    rng = random.Random(5)
    for _ in range(100):
        ts = random_total_ts(rng, max_states=6)
        n = ts.n_states
        o1 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.6])
        o2 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.4])
        assert reach_min(ts, o1, o2).set_.issubset(reach_max(ts, o1, o2).set_)
        assert robust_invariant(ts, o1).set_.issubset(invariant(ts, o1).set_)


def test_fixed_point_property_random():
    rng = random.Random(6)
    for _ in range(60):
        ts = random_total_ts(rng, max_states=6)
        n = ts.n_states
        o1 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.6])
        o2 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.4])
        fix = reach_min(ts, o1, o2).set_
        again = {x for x in o1 if ts.post(x).issubset(fix)} | set(fix)
        assert StateSet.from_indices(n, again) == fix
        inv = robust_invariant(ts, o1).set_
        keep = {x for x in inv if ts.post(x).issubset(inv)}
        assert StateSet.from_indices(n, keep) == inv


def test_result_invariant_under_relabeling():
    """Permuting state ids conjugates every operator's result."""
    rng = random.Random(7)
    for _ in range(40):
        ts = random_total_ts(rng, max_states=6)
        n = ts.n_states
        perm = list(range(n))
        rng.shuffle(perm)
        succ2 = [None] * n
        labels2 = [None] * n
        for x in range(n):
            succ2[perm[x]] = [perm[y] for y in ts.successors[x]]
            labels2[perm[x]] = set(ts.labels[x])
        ts2 = TransitionSystem(n, succ2, [perm[x] for x in ts.initial], ts.alphabet, labels2)
        o1 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.6])
        o2 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.4])
        o1p = StateSet.from_indices(n, [perm[x] for x in o1])
        o2p = StateSet.from_indices(n, [perm[x] for x in o2])
        got = reach_min(ts2, o1p, o2p).set_
        want = StateSet.from_indices(n, [perm[x] for x in reach_min(ts, o1, o2).set_])
        assert got == want


def brute_force_reach_min_member(ts, x0, o1, o2, bound):
    """Definition of the all-trajectories reach set, unrolled: some k at which
    every length-k walk has stayed in o1 before and sits in o2.  Walk pasts
    are clean by construction (a violation ends the search), so the frontier
    collapses to its set of end states."""
    frontier = {x0}
    for _ in range(bound + 1):
        if all(x in o2 for x in frontier):
            return True
        if any(x not in o1 for x in frontier):
            return False
        frontier = {y for x in frontier for y in ts.successors[x]}
    return False


def test_reach_min_agrees_with_brute_force():
    rng = random.Random(8)
    for _ in range(60):
        ts = random_total_ts(rng, max_states=6)
        n = ts.n_states
        o1 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.7])
        o2 = StateSet.from_indices(n, [x for x in range(n) if rng.random() < 0.3])
        fix = reach_min(ts, o1, o2).set_
        for x0 in range(n):
            assert (x0 in fix) == brute_force_reach_min_member(ts, x0, o1, o2, 8)
