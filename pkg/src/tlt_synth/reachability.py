"""Fixed-point reachability operators over StateSets.

Four autonomous operators (minimal/maximal reach, robust/plain invariant)
and two controlled ones (controlled reach, robust controlled invariant).
All iterate monotone set maps that stabilize within |S| rounds on the
finite subset lattice; each result records, per member state, the first
iteration at which it entered the fixed-point iterate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .systems import ControlledTransitionSystem, StateSet, TransitionSystem


@dataclass(frozen=True)
class ReachResult:
    set_: StateSet
    layers: tuple[int | None, ...]  # first iteration k with x in Q_k; None if absent
    iterations: int

    def layer(self, x: int) -> int | None:
        return self.layers[x]


def _grow(
    universe: int,
    candidates: StateSet,
    q0: StateSet,
    step_ok,
) -> ReachResult:
    """Least fixed point of Q -> {x in candidates | step_ok(x, Q)} | Q from q0."""
    layers: list[int | None] = [None] * universe
    for x in q0:
        layers[x] = 0
    q = q0.mask
    pending = candidates.mask & ~q
    rounds = 0
    while True:
        added = 0
        mask = pending
        while mask:
            low = mask & -mask
            x = low.bit_length() - 1
            mask ^= low
            if step_ok(x, q):
                added |= low
        if not added:
            break
        rounds += 1
        if rounds > universe:
            raise AssertionError("fixed point failed to stabilize within |S| rounds")
        q |= added
        pending &= ~added
        for x in StateSet(universe, added):
            layers[x] = rounds
    return ReachResult(StateSet(universe, q), tuple(layers), rounds)


def _shrink(universe: int, q0: StateSet, step_ok) -> ReachResult:
    """Greatest fixed point of Q -> {x in Q | step_ok(x, Q)} from q0."""
    q = q0.mask
    rounds = 0
    while True:
        keep = 0
        mask = q
        while mask:
            low = mask & -mask
            x = low.bit_length() - 1
            mask ^= low
            if step_ok(x, q):
                keep |= low
        if keep == q:
            break
        rounds += 1
        if rounds > universe:
            raise AssertionError("fixed point failed to stabilize within |S| rounds")
        q = keep
    layers = tuple(0 if (q >> x) & 1 else None for x in range(universe))
    return ReachResult(StateSet(universe, q), layers, rounds)


def reach_min(ts: TransitionSystem, omega1: StateSet, omega2: StateSet) -> ReachResult:
    """States from which every trajectory reaches omega2 staying in omega1 before."""
    post = ts._post
    return _grow(
        ts.n_states, omega1, omega2, lambda x, q: post[x].mask & ~q == 0
    )


def reach_max(ts: TransitionSystem, omega1: StateSet, omega2: StateSet) -> ReachResult:
    """States from which some trajectory reaches omega2 staying in omega1 before."""
    post = ts._post
    return _grow(
        ts.n_states, omega1, omega2, lambda x, q: post[x].mask & q != 0
    )


def robust_invariant(ts: TransitionSystem, omega: StateSet) -> ReachResult:
    """Largest subset of omega where all successors stay inside."""
    post = ts._post
    return _shrink(ts.n_states, omega, lambda x, q: post[x].mask & ~q == 0)


def invariant(ts: TransitionSystem, omega: StateSet) -> ReachResult:
    """Largest subset of omega where some successor stays inside."""
    post = ts._post
    return _shrink(ts.n_states, omega, lambda x, q: post[x].mask & q != 0)


def _ctrl_step_ok(cts: ControlledTransitionSystem):
    post = cts._post
    admissible = cts._admissible

    def ok(x: int, q: int) -> bool:
        for u in admissible[x]:
            if post[x][u].mask & ~q == 0:
                return True
        return False

    return ok


def ctrl_reach(
    cts: ControlledTransitionSystem, omega1: StateSet, omega2: StateSet
) -> ReachResult:
    """States from which some input choice forces reaching omega2 through omega1."""
    return _grow(cts.n_states, omega1, omega2, _ctrl_step_ok(cts))


def rcis(cts: ControlledTransitionSystem, omega: StateSet) -> ReachResult:
    """Largest robust controlled invariant subset of omega."""
    return _shrink(cts.n_states, omega, _ctrl_step_ok(cts))


def one_step_all(ts: TransitionSystem, target: StateSet) -> StateSet:
    """{x | Post(x) subseteq target}: the 1-step universal predecessor."""
    return StateSet.from_indices(
        ts.n_states,
        (x for x in range(ts.n_states) if ts._post[x].mask & ~target.mask == 0),
    )


def one_step_some(ts: TransitionSystem, target: StateSet) -> StateSet:
    """{x | Post(x) intersects target}: the 1-step existential predecessor."""
    return StateSet.from_indices(
        ts.n_states,
        (x for x in range(ts.n_states) if ts._post[x].mask & target.mask != 0),
    )


def one_step_forcible(cts: ControlledTransitionSystem, target: StateSet) -> StateSet:
    """{x | exists admissible u with Post(x, u) subseteq target}."""
    ok = _ctrl_step_ok(cts)
    return StateSet.from_indices(
        cts.n_states, (x for x in range(cts.n_states) if ok(x, target.mask))
    )
