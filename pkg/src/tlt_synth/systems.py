"""Finite labeled transition systems, autonomous and controlled.

States are dense integer ids.  StateSet is an immutable bitmask over the
state universe and is the carrier for every reachability fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class UnknownAtom(KeyError):
    pass


class DeadlockState(ValueError):
    """A state with no outgoing transition (or no admissible input)."""


class StateSet:
    """Immutable subset of {0, ..., universe_size - 1}, bitmask-backed."""

    __slots__ = ("universe", "mask")

    def __init__(self, universe: int, mask: int = 0):
        if mask < 0 or mask >> universe:
            raise ValueError("mask outside universe")
        self.universe = universe
        self.mask = mask

    @classmethod
    def from_indices(cls, universe: int, indices: Iterable[int]) -> "StateSet":
        mask = 0
        for i in indices:
            if not 0 <= i < universe:
                raise ValueError(f"state {i} outside universe of size {universe}")
            mask |= 1 << i
        return cls(universe, mask)

    @classmethod
    def full(cls, universe: int) -> "StateSet":
        return cls(universe, (1 << universe) - 1)

    @classmethod
    def empty(cls, universe: int) -> "StateSet":
        return cls(universe, 0)

    def _check(self, other: "StateSet") -> None:
        if self.universe != other.universe:
            raise ValueError("universe mismatch")

    def union(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.universe, self.mask | other.mask)

    def intersection(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.universe, self.mask & other.mask)

    def difference(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.universe, self.mask & ~other.mask)

    def complement(self) -> "StateSet":
        return StateSet(self.universe, ~self.mask & ((1 << self.universe) - 1))

    def issubset(self, other: "StateSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "StateSet") -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    def is_empty(self) -> bool:
        return self.mask == 0

    def __contains__(self, state: int) -> bool:
        return 0 <= state < self.universe and (self.mask >> state) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StateSet)
            and self.universe == other.universe
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.universe, self.mask))

    def __repr__(self) -> str:
        return f"StateSet({sorted(self)})"

    # operator sugar used throughout the fixed-point code
    __or__ = union
    __and__ = intersection
    __sub__ = difference


@dataclass(frozen=True)
class Lasso:
    """Finite representation prefix . cycle^omega of an infinite trajectory."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")

    def state_at(self, k: int) -> int:
        p = len(self.prefix)
        if k < p:
            return self.prefix[k]
        return self.cycle[(k - p) % len(self.cycle)]

    def states(self) -> tuple[int, ...]:
        return self.prefix + self.cycle


class TransitionSystem:
    """Autonomous nondeterministic system; every state has >= 1 successor."""

    def __init__(
        self,
        n_states: int,
        successors: list[list[int]],
        initial: Iterable[int],
        alphabet: list[str],
        labels: list[set[str]],
    ):
        if len(successors) != n_states or len(labels) != n_states:
            raise ValueError("successors/labels length must equal n_states")
        alpha = set(alphabet)
        for x, succ in enumerate(successors):
            if not succ:
                raise DeadlockState(f"state {x} has no successor")
            for y in succ:
                if not 0 <= y < n_states:
                    raise ValueError(f"transition {x}->{y} out of range")
        for x, labs in enumerate(labels):
            unknown = labs - alpha
            if unknown:
                raise UnknownAtom(f"state {x} labeled with unknown atoms {sorted(unknown)}")
        self.n_states = n_states
        self.successors = [sorted(set(s)) for s in successors]
        self.alphabet = list(alphabet)
        self.labels = [frozenset(l) for l in labels]
        self.initial = StateSet.from_indices(n_states, initial)
        self._post = [StateSet.from_indices(n_states, s) for s in self.successors]

    def post(self, x: int) -> StateSet:
        return self._post[x]

    def label_set(self, atom: str) -> StateSet:
        if atom not in self.alphabet:
            raise UnknownAtom(atom)
        return StateSet.from_indices(
            self.n_states, (x for x in range(self.n_states) if atom in self.labels[x])
        )

    def full_set(self) -> StateSet:
        return StateSet.full(self.n_states)

    def is_deterministic(self) -> bool:
        return len(self.initial) == 1 and all(len(s) == 1 for s in self.successors)

    def is_trajectory(self, states: Iterable[int]) -> bool:
        seq = list(states)
        return all(b in self._post[a] for a, b in zip(seq, seq[1:]))

    def is_lasso(self, lasso: Lasso) -> bool:
        seq = list(lasso.prefix) + list(lasso.cycle)
        return self.is_trajectory(seq) and lasso.cycle[0] in self._post[lasso.cycle[-1]]

    def label_word(self, lasso: Lasso) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
        return (
            [self.labels[x] for x in lasso.prefix],
            [self.labels[x] for x in lasso.cycle],
        )


class ControlledTransitionSystem:
    """Controlled system; successors depend on (state, input), possibly empty.

    Every state must have at least one admissible input.
    """

    def __init__(
        self,
        n_states: int,
        input_names: list[str],
        successors: list[list[list[int]]],
        initial: Iterable[int],
        alphabet: list[str],
        labels: list[set[str]],
        cell_geometry: "GridGeometry | None" = None,
    ):
        n_inputs = len(input_names)
        if len(successors) != n_states or len(labels) != n_states:
            raise ValueError("successors/labels length must equal n_states")
        alpha = set(alphabet)
        for x, per_input in enumerate(successors):
            if len(per_input) != n_inputs:
                raise ValueError(f"state {x}: expected {n_inputs} input slots")
            if not any(per_input):
                raise DeadlockState(f"state {x} has no admissible input")
            for succ in per_input:
                for y in succ:
                    if not 0 <= y < n_states:
                        raise ValueError(f"transition {x}->{y} out of range")
        for x, labs in enumerate(labels):
            unknown = labs - alpha
            if unknown:
                raise UnknownAtom(f"state {x} labeled with unknown atoms {sorted(unknown)}")
        self.n_states = n_states
        self.n_inputs = n_inputs
        self.input_names = list(input_names)
        self.successors = [[sorted(set(s)) for s in per_input] for per_input in successors]
        self.alphabet = list(alphabet)
        self.labels = [frozenset(l) for l in labels]
        self.initial = StateSet.from_indices(n_states, initial)
        self._post = [
            [StateSet.from_indices(n_states, s) for s in per_input]
            for per_input in self.successors
        ]
        self._admissible = [
            frozenset(u for u in range(n_inputs) if self.successors[x][u])
            for x in range(n_states)
        ]
        self.cell_geometry = cell_geometry

    def post(self, x: int, u: int) -> StateSet:
        return self._post[x][u]

    def admissible(self, x: int) -> frozenset[int]:
        return self._admissible[x]

    def label_set(self, atom: str) -> StateSet:
        if atom not in self.alphabet:
            raise UnknownAtom(atom)
        return StateSet.from_indices(
            self.n_states, (x for x in range(self.n_states) if atom in self.labels[x])
        )

    def full_set(self) -> StateSet:
        return StateSet.full(self.n_states)

    def is_trajectory(self, states: list[int], inputs: list[int]) -> bool:
        if len(inputs) != len(states) - 1:
            return False
        return all(
            states[i + 1] in self._post[states[i]][inputs[i]] for i in range(len(inputs))
        )

    def label_word(self, lasso: Lasso) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
        return (
            [self.labels[x] for x in lasso.prefix],
            [self.labels[x] for x in lasso.cycle],
        )

    def induced(self, policy: list[int]) -> TransitionSystem:
        """Autonomous system under a stationary policy (one input per state)."""
        succ = [list(self.successors[x][policy[x]]) for x in range(self.n_states)]
        return TransitionSystem(
            self.n_states, succ, list(self.initial), self.alphabet,
            [set(l) for l in self.labels],
        )


@dataclass(frozen=True)
class GridGeometry:
    """Cell layout of a grid abstraction; maps cell ids to coordinate boxes."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    cells_per_axis: tuple[int, ...]
    out_state: int
    input_vectors: tuple[tuple[float, ...], ...] = field(default=())

    def cell_widths(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / n for lo, hi, n in zip(self.lows, self.highs, self.cells_per_axis)
        )

    def cell_of_point(self, point: list[float]) -> int:
        """Cell id containing a point; the OUT state if outside the domain."""
        if len(point) != len(self.lows):
            raise ValueError("point dimension mismatch")
        widths = self.cell_widths()
        idx = []
        for p, lo, hi, w, n in zip(point, self.lows, self.highs, widths, self.cells_per_axis):
            if p < lo or p > hi:
                return self.out_state
            i = min(int((p - lo) / w), n - 1)
            idx.append(i)
        return self.cell_id(idx)

    def cell_id(self, idx: list[int]) -> int:
        cid = 0
        for i, n in zip(idx, self.cells_per_axis):
            cid = cid * n + i
        return cid

    def cell_index(self, cid: int) -> tuple[int, ...]:
        idx = []
        for n in reversed(self.cells_per_axis):
            idx.append(cid % n)
            cid //= n
        return tuple(reversed(idx))

    def cell_box(self, cid: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
        idx = self.cell_index(cid)
        widths = self.cell_widths()
        lo = tuple(l + i * w for l, i, w in zip(self.lows, idx, widths))
        hi = tuple(l + (i + 1) * w for l, i, w in zip(self.lows, idx, widths))
        return lo, hi

    def cell_center(self, cid: int) -> tuple[float, ...]:
        lo, hi = self.cell_box(cid)
        return tuple((a + b) / 2 for a, b in zip(lo, hi))


def _resolve_input(token, input_names: list[str]) -> int:
    if isinstance(token, int):
        if not 0 <= token < len(input_names):
            raise ValueError(f"input index {token} out of range")
        return token
    try:
        return input_names.index(token)
    except ValueError:
        raise ValueError(f"unknown input {token!r}") from None


def system_from_dict(data: dict) -> TransitionSystem | ControlledTransitionSystem:
    """Build a system from the JSON file schema.

    ``{"states": [{"id": 0, "labels": ["r"]}, ...], "inputs": [...],
    "transitions": [[from, input?, to], ...], "initial": [0], "atoms": [...]}``
    Autonomous systems omit "inputs" and use 2-tuple transitions.
    """
    states = data["states"]
    n = len(states)
    ids = sorted(s["id"] for s in states)
    if ids != list(range(n)):
        raise ValueError("state ids must be dense 0..n-1")
    atoms = list(data["atoms"])
    labels: list[set[str]] = [set() for _ in range(n)]
    for s in states:
        labels[s["id"]] = set(s.get("labels", []))
    initial = list(data["initial"])
    if "inputs" in data:
        input_names = list(data["inputs"])
        successors: list[list[list[int]]] = [
            [[] for _ in input_names] for _ in range(n)
        ]
        for tr in data["transitions"]:
            if len(tr) != 3:
                raise ValueError(f"controlled transition must be [from, input, to]: {tr}")
            x, u, y = tr
            successors[x][_resolve_input(u, input_names)].append(y)
        return ControlledTransitionSystem(n, input_names, successors, initial, atoms, labels)
    successors_a: list[list[int]] = [[] for _ in range(n)]
    for tr in data["transitions"]:
        if len(tr) != 2:
            raise ValueError(f"autonomous transition must be [from, to]: {tr}")
        x, y = tr
        successors_a[x].append(y)
    return TransitionSystem(n, successors_a, initial, atoms, labels)


def load_system(path: str) -> TransitionSystem | ControlledTransitionSystem:
    with open(path, encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))
