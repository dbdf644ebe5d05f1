"""Shared random generators for property and acceptance tests."""

from __future__ import annotations

import itertools
import random

from tlt_synth.ltl import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eventually,
    Always,
    Formula,
    Next,
    Not,
    Or,
    Until,
    WeakUntil,
)
from tlt_synth.systems import ControlledTransitionSystem, TransitionSystem
from tlt_synth.tlt import build_controlled_tlt, tlt_satisfies
from tlt_synth.verify import lassos_from

ATOMS = ["a", "b", "c"]


def random_total_ts(rng: random.Random, max_states: int = 5, max_atoms: int = 3) -> TransitionSystem:
    n = rng.randint(2, max_states)
    atoms = ATOMS[: rng.randint(1, max_atoms)]
    succ = [
        rng.sample(range(n), min(rng.choices([1, 2, 3], weights=[5, 4, 1])[0], n))
        for _ in range(n)
    ]
    labels = [set(a for a in atoms if rng.random() < 0.4) for _ in range(n)]
    return TransitionSystem(n, succ, [rng.randrange(n)], atoms, labels)


def random_deterministic_ts(rng: random.Random, max_states: int = 5, max_atoms: int = 3) -> TransitionSystem:
    n = rng.randint(2, max_states)
    atoms = ATOMS[: rng.randint(1, max_atoms)]
    succ = [[rng.randrange(n)] for _ in range(n)]
    labels = [set(a for a in atoms if rng.random() < 0.4) for _ in range(n)]
    return TransitionSystem(n, succ, [rng.randrange(n)], atoms, labels)


def random_wupnf(rng: random.Random, depth: int, atoms: list[str]) -> Formula:
    if depth == 0:
        lit = rng.choice(["atom", "natom", "true", "false"])
        if lit == "atom":
            return Atom(rng.choice(atoms))
        if lit == "natom":
            return Not(Atom(rng.choice(atoms)))
        return TRUE if lit == "true" else FALSE
    kind = rng.choices(
        ["and", "or", "next", "until", "wuntil", "lit"], weights=[2, 2, 2, 3, 2, 2]
    )[0]
    if kind == "lit":
        return random_wupnf(rng, 0, atoms)
    if kind == "next":
        return Next(random_wupnf(rng, depth - 1, atoms))
    left = random_wupnf(rng, depth - 1, atoms)
    right = random_wupnf(rng, depth - 1, atoms)
    return {"and": And, "or": Or, "until": Until, "wuntil": WeakUntil}[kind](left, right)


def random_formula(rng: random.Random, depth: int, atoms: list[str]) -> Formula:
    """General LTL (sugar and inner negations allowed)."""
    if depth == 0:
        lit = rng.choice(["atom", "atom", "true", "false"])
        if lit == "atom":
            return Atom(rng.choice(atoms))
        return TRUE if lit == "true" else FALSE
    kind = rng.choice(["and", "or", "not", "next", "until", "wuntil", "ev", "alw", "lit"])
    if kind == "lit":
        return random_formula(rng, 0, atoms)
    if kind == "not":
        return Not(random_formula(rng, depth - 1, atoms))
    if kind == "next":
        return Next(random_formula(rng, depth - 1, atoms))
    if kind == "ev":
        return Eventually(random_formula(rng, depth - 1, atoms))
    if kind == "alw":
        return Always(random_formula(rng, depth - 1, atoms))
    left = random_formula(rng, depth - 1, atoms)
    right = random_formula(rng, depth - 1, atoms)
    return {"and": And, "or": Or, "until": Until, "wuntil": WeakUntil}[kind](left, right)


def random_feasible_cts(rng: random.Random):
    """Random CTS plus a formula, built around a planted feasible policy:
    input 0 walks a chain into a closed core that carries the target atom."""
    n = rng.randint(3, 5)
    n_inputs = rng.randint(2, 3)
    pattern = rng.choice(["FG", "GF", "U"])
    atoms = ["a", "b"] if pattern == "U" else ["a", "b"][: rng.randint(1, 2)]
    labels = [set(x for x in atoms if rng.random() < 0.3) for _ in range(n)]
    target = rng.choice(atoms)
    core = sorted(rng.sample(range(n), rng.randint(1, 2)))
    for c in core:
        labels[c].add(target)
    if pattern == "U":
        other = "a" if target == "b" else "b"
        for x in range(n):
            if x not in core:
                labels[x].add(other)
        formula = Until(Atom(other), Atom(target))
    elif pattern == "FG":
        formula = Eventually(Always(Atom(target)))
        for c in range(n):
            if c not in core and target in labels[c] and rng.random() < 0.5:
                labels[c].discard(target)
    else:
        formula = Always(Eventually(Atom(target)))
    succ = [[[] for _ in range(n_inputs)] for _ in range(n)]
    order = core + [x for x in range(n) if x not in core]
    for i, x in enumerate(order):
        if x in core:
            succ[x][0] = sorted(rng.sample(core, rng.randint(1, len(core))))
        else:
            succ[x][0] = [order[max(0, i - 1)]]
    for x in range(n):
        for u in range(1, n_inputs):
            if rng.random() < 0.8:
                succ[x][u] = sorted(rng.sample(range(n), rng.randint(1, 2)))
    cts = ControlledTransitionSystem(
        n, [f"u{i}" for i in range(n_inputs)], succ, [0], atoms, labels
    )
    return cts, formula


def stationary_policy_exists(cts: ControlledTransitionSystem, formula, rng: random.Random, tries: int = 80):
    """Brute-force screen: some stationary policy makes every bounded lasso of
    the induced system satisfy the controlled tree.  Returns the tree root or
    None."""
    root = build_controlled_tlt(cts, formula)
    x0 = next(iter(cts.initial))
    if x0 not in root.set_:
        return None
    bound = 2 * cts.n_states + 2

    def feasible(policy):
        induced = cts.induced(list(policy))
        return all(tlt_satisfies(l, root) for l in lassos_from(induced, x0, bound))

    space = [sorted(cts.admissible(x)) for x in range(cts.n_states)]
    rest = list(itertools.product(*space))
    rng.shuffle(rest)
    for pol in [tuple([0] * cts.n_states)] + rest[:tries]:
        if any(pol[x] not in cts.admissible(x) for x in range(cts.n_states)):
            continue
        if feasible(pol):
            return root
    return None
