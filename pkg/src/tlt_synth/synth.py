"""Online feedback control synthesis over a controlled TLT.

Each step builds a control tree (every set node replaced by the set of
inputs that keeps the trajectory compatible with that node's stage),
compresses it, and backtracks the Boolean skeleton to one feasible set.

Stage activity over the realized prefix is decided by feasible-activation
sets: for every operator node, the set of time points at which it could
have fired consistently with the clauses of the path from the root --
Boolean and Next clauses pin single positions, Until clauses flood
rightward through the parent's stay positions, Always clauses pin the
trailing run of child membership (commitments to Always bind through the
present).  A node additionally pending an Until discharge must have
remained in its own set since activation.  All of it is bitmask arithmetic
over prefix positions, recomputed exactly each step.
"""

from __future__ import annotations

import copy as _copy
import enum
import random
from dataclasses import dataclass

from .ltl import Formula
from .systems import ControlledTransitionSystem, Lasso
from .tlt import (
    BOOLEAN_OPS,
    CompressedNode,
    SetNode,
    TltOp,
    build_controlled_tlt,
    compress,
    iter_set_nodes,
)


class SessionStatus(enum.Enum):
    ACTIVE = "active"
    DEADLOCK = "deadlock"
    COMPLETED = "completed"


class SessionNotActive(RuntimeError):
    pass


class InputNotFeasible(ValueError):
    pass


class PrefixInconsistent(ValueError):
    pass


class PrefixInfeasibleUnderNewSpec(ValueError):
    pass


class Resolver:
    """Resolves environment nondeterminism: picks x_{k+1} from Post(x_k, u_k)."""

    def resolve(self, session: "SynthesisSession", successors: list[int]) -> int:
        raise NotImplementedError


class RandomResolver(Resolver):
    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def resolve(self, session, successors):
        return self.rng.choice(successors)


class ScriptedResolver(Resolver):
    def __init__(self, sequence: list[int]):
        self.sequence = list(sequence)
        self.pos = 0

    def resolve(self, session, successors):
        if self.pos >= len(self.sequence):
            raise ValueError("scripted resolver exhausted")
        nxt = self.sequence[self.pos]
        if nxt not in successors:
            raise ValueError(f"scripted successor {nxt} not in Post; have {successors}")
        self.pos += 1
        return nxt


class AdversarialResolver(Resolver):
    """Pick the successor that leaves the controller the fewest options."""

    def resolve(self, session, successors):
        if len(successors) == 1:
            return successors[0]
        best, best_size = None, None
        for cand in sorted(successors):
            size = len(session._preview_feasible(cand))
            if best_size is None or size < best_size:
                best, best_size = cand, size
        return best


@dataclass
class StepRecord:
    k: int
    state: int
    feasible: tuple[int, ...]
    chosen: int
    next: int

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "state": self.state,
            "feasible": list(self.feasible),
            "chosen": self.chosen,
            "next": self.next,
        }


@dataclass
class ControlTree:
    """Control sets per TLT node id, plus which nodes were stage-active."""

    root: SetNode
    sets: dict[int, frozenset[int]]
    active: frozenset[int]


class SynthesisSession:
    def __init__(
        self,
        cts: ControlledTransitionSystem,
        formula: Formula,
        resolver: Resolver,
        x0: int,
        memo: dict | None = None,
    ):
        self.cts = cts
        self.formula = formula
        self.resolver = resolver
        self.memo: dict = {} if memo is None else memo
        self.root = build_controlled_tlt(cts, formula, self.memo)
        self.prefix: list[int] = [x0]
        self.inputs: list[int] = []
        self.history: list[StepRecord] = []
        self.fingerprints: list[frozenset[int]] = []
        self.status = SessionStatus.ACTIVE
        self._node_masks: dict[int, int] = {}
        self._init_masks()
        self._last_feasible: frozenset[int] | None = None
        self._last_control: ControlTree | None = None

    # ---- membership masks over prefix positions ----

    def _init_masks(self) -> None:
        self._node_masks = {n.id: 0 for n in iter_set_nodes(self.root)}
        for pos, x in enumerate(self.prefix):
            self._extend_masks(pos, x)

    def _extend_masks(self, pos: int, x: int) -> None:
        bit = 1 << pos
        for node in iter_set_nodes(self.root):
            if x in node.set_:
                self._node_masks[node.id] |= bit

    # ---- feasible activation sets ----

    def _activation_sets(self) -> tuple[dict[int, int], dict[int, int]]:
        """Per set node: feasible firing times of its entry operator, and the
        helper masks used by the activity conditions."""
        k = len(self.prefix) - 1
        allbits = (1 << (k + 1)) - 1
        masks = self._node_masks

        def upfrom(s: int) -> int:
            if s == 0:
                return 0
            low = s & -s
            return allbits & ~(low - 1)

        def flood(seeds: int, stay: int) -> int:
            # {t : exists p in seeds with [p, t-1] subseteq stay}, plus seeds
            sm = seeds & stay
            return (seeds | ((stay + sm) ^ stay)) & allbits

        def trailing_run(member: int) -> int:
            inv = ~member & allbits
            return allbits & ~((1 << inv.bit_length()) - 1)

        entry: dict[int, int] = {}
        entry[self.root.id] = 1 if self.prefix[0] in self.root.set_ else 0
        for node in iter_set_nodes(self.root):
            op = node.child
            if op is None:
                continue
            e_p = entry[node.id]
            m_p = masks[node.id]
            for child in op.children:
                m_c = masks[child.id]
                if op.op in BOOLEAN_OPS:
                    e_c = upfrom(e_p) & m_p & m_c
                elif op.op is TltOp.NEXT:
                    e_c = ((m_p << 1) & allbits) & m_c & upfrom(e_p)
                elif op.op is TltOp.UNTIL:
                    e_c = flood(e_p, m_p) & m_c
                else:  # ALWAYS
                    e_c = trailing_run(m_c) & upfrom(e_p)
                entry[child.id] = e_c
        trailing = {
            node.id: trailing_run(masks[node.id]) for node in iter_set_nodes(self.root)
        }
        return entry, trailing

    def _active_nodes(self) -> frozenset[int]:
        entry, trailing = self._activation_sets()
        x = self.prefix[-1]
        active = set()
        for node in iter_set_nodes(self.root):
            e = entry[node.id]
            if e == 0:
                continue
            op = node.child
            if op is None:
                active.add(node.id)
            elif op.op is TltOp.UNTIL:
                if e & trailing[node.id]:
                    active.add(node.id)
            elif op.op is TltOp.NEXT:
                if x in node.set_:
                    active.add(node.id)
            else:  # Boolean or Always: activation alone suffices
                active.add(node.id)
        return frozenset(active)

    # ---- control tree (Algorithm 4) ----

    def _forcing_inputs(self, target_mask: int) -> frozenset[int]:
        x = self.prefix[-1]
        cts = self.cts
        return frozenset(
            u
            for u in cts.admissible(x)
            if cts.post(x, u).mask & ~target_mask == 0
        )

    def _rci_of(self, node: SetNode):
        from .reachability import rcis

        key = ("rcis", node.set_.mask)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = rcis(self.cts, node.set_)
        return hit

    def control_tree(self, k: int | None = None) -> ControlTree:
        if k is not None and k != len(self.prefix) - 1:
            raise PrefixInconsistent(
                f"control tree requested at k={k}, session is at k={len(self.prefix) - 1}"
            )
        active = self._active_nodes()
        empty: frozenset[int] = frozenset()
        full = frozenset(self.cts.admissible(self.prefix[-1]))
        sets: dict[int, frozenset[int]] = {}

        def fill(node: SetNode, parent_op: TltOp | None) -> frozenset[int]:
            op = node.child
            child_sets = (
                [fill(c, op.op) for c in op.children] if op is not None else []
            )
            if node.id not in active:
                sets[node.id] = empty
                return empty
            if op is None:
                if parent_op is TltOp.ALWAYS:
                    value = self._forcing_inputs(self._rci_of(node).set_.mask)
                else:
                    value = full
            elif op.op is TltOp.AND:
                value = frozenset.intersection(*child_sets)
            elif op.op is TltOp.OR:
                value = frozenset.union(*child_sets)
            elif op.op is TltOp.NEXT:
                value = self._forcing_inputs(op.children[0].set_.mask)
            elif op.op is TltOp.UNTIL:
                # stay at this stage or discharge into the child subtree; for
                # difference-form reach nodes the union restores the full
                # reach set, so a forcing input always exists from inside it
                value = self._forcing_inputs(
                    node.set_.mask | op.children[0].set_.mask
                )
            else:  # ALWAYS: hold the state inside the invariant set
                value = self._forcing_inputs(node.set_.mask)
            sets[node.id] = value
            return value

        fill(self.root, None)
        return ControlTree(self.root, sets, active)

    # ---- Algorithms 2 + 5 ----

    def synth_step(self) -> frozenset[int]:
        if self.status is not SessionStatus.ACTIVE:
            raise SessionNotActive(f"session is {self.status.value}")
        ct = self.control_tree()
        compressed = compress(self.root, value=lambda n: ct.sets[n.id])
        feasible = backtrack_control_set(compressed)
        self._last_control = ct
        self._last_feasible = feasible
        if len(self.fingerprints) == len(self.prefix) - 1:
            self.fingerprints.append(ct.active)
        if not feasible:
            self.status = SessionStatus.DEADLOCK
        return feasible

    def _preview_feasible(self, successor: int) -> frozenset[int]:
        clone = self.fork()
        clone.prefix.append(successor)
        clone.inputs.append(-1)
        clone._extend_masks(len(clone.prefix) - 1, successor)
        try:
            return clone.synth_step()
        except SessionNotActive:  # pragma: no cover
            return frozenset()

    def apply_input(self, u: int, successor: int | None = None) -> int:
        if self.status is not SessionStatus.ACTIVE:
            raise SessionNotActive(f"session is {self.status.value}")
        feasible = self._last_feasible
        if feasible is None or len(self.fingerprints) < len(self.prefix):
            feasible = self.synth_step()
            if not feasible:
                raise SessionNotActive("session deadlocked")
        if u not in feasible:
            raise InputNotFeasible(f"input {u} not in feasible set {sorted(feasible)}")
        x = self.prefix[-1]
        succs = self.cts.successors[x][u]
        if successor is None:
            successor = self.resolver.resolve(self, succs)
        elif successor not in succs:
            raise ValueError(f"successor {successor} not in Post({x}, {u})")
        k = len(self.prefix) - 1
        self.history.append(StepRecord(k, x, tuple(sorted(feasible)), u, successor))
        self.prefix.append(successor)
        self.inputs.append(u)
        self._extend_masks(len(self.prefix) - 1, successor)
        self._last_feasible = None
        return successor

    def fork(self) -> "SynthesisSession":
        clone = object.__new__(SynthesisSession)
        clone.cts = self.cts
        clone.formula = self.formula
        clone.resolver = _copy.deepcopy(self.resolver)
        clone.memo = self.memo
        clone.root = self.root
        clone.prefix = list(self.prefix)
        clone.inputs = list(self.inputs)
        clone.history = list(self.history)
        clone.fingerprints = list(self.fingerprints)
        clone.status = self.status
        clone._node_masks = dict(self._node_masks)
        clone._last_feasible = self._last_feasible
        clone._last_control = self._last_control
        return clone

    def mark_completed(self) -> None:
        """Operator-declared end of the session; terminal like deadlock."""
        if self.status is not SessionStatus.ACTIVE:
            raise SessionNotActive(f"session is {self.status.value}")
        self.status = SessionStatus.COMPLETED

    def update_spec(self, new_formula: Formula) -> None:
        if self.status is not SessionStatus.ACTIVE:
            raise SessionNotActive(f"session is {self.status.value}")
        root = build_controlled_tlt(self.cts, new_formula, self.memo)
        if self.prefix[0] not in root.set_:
            raise PrefixInfeasibleUnderNewSpec(
                "initial state lies outside the root of the new tree"
            )
        self.formula = new_formula
        self.root = root
        self._init_masks()
        self.fingerprints = self.fingerprints[: len(self.prefix) - 1]
        self._last_feasible = None
        self._last_control = None
        if not self.synth_step():
            self.status = SessionStatus.DEADLOCK

    # ---- progress heuristic ----

    def _pending_reach_nodes(self, active: frozenset[int]) -> list[SetNode]:
        """Stage-active reach nodes whose discharge the tree still needs.

        A subtree is satisfied when its leaves are active (their delimiting
        clauses held at some past step; Always leaves are actively
        maintained); satisfied Or-alternatives release their siblings."""
        satisfied: dict[int, bool] = {}

        def compute(node: SetNode) -> bool:
            if node.child is None:
                ok = node.id in active
            else:
                kids = [compute(c) for c in node.child.children]
                if node.child.op is TltOp.AND:
                    ok = all(kids)
                elif node.child.op is TltOp.OR:
                    ok = any(kids)
                else:
                    ok = kids[0]
            satisfied[node.id] = ok
            return ok

        compute(self.root)
        needed: dict[int, bool] = {self.root.id: not satisfied[self.root.id]}
        for node in iter_set_nodes(self.root):
            if node.child is None:
                continue
            kids = node.child.children
            base = needed[node.id]
            release = node.child.op is TltOp.OR and any(
                satisfied[c.id] for c in kids
            )
            for c in kids:
                needed[c.id] = base and not release and not satisfied[c.id]
        x = self.prefix[-1]
        return [
            n
            for n in iter_set_nodes(self.root)
            if n.id in active
            and needed[n.id]
            and n.layers is not None
            and n.rule in ("until_full", "until_diff")
            and x in n.set_
        ]

    def progress_filter(self, cs: frozenset[int]) -> frozenset[int]:
        """Restrict cs to inputs driving down the reach-set layers of the
        still-needed stage-active reach nodes; unchanged when no layer data
        applies."""
        if not cs:
            raise ValueError("progress_filter requires a nonempty control set")
        if self._last_control is None:
            self.synth_step()
        active = self._last_control.active
        x = self.prefix[-1]
        nodes = self._pending_reach_nodes(active)
        if not nodes:
            return cs
        big = 1 << 30

        def eff_layer(node: SetNode, s: int) -> int:
            target = node.child.children[0].set_ if node.child is not None else None
            if target is not None and s in target:
                return 0
            if s in node.set_:
                layer = node.layers[s]
                return layer if layer is not None else big
            return big

        def key(u: int) -> int:
            total = 0
            for node in nodes:
                worst = 0
                for s in self.cts.successors[x][u]:
                    worst = max(worst, eff_layer(node, s))
                total += worst
            return total

        scored = {u: key(u) for u in cs}
        best = min(scored.values())
        if all(v == best for v in scored.values()):
            return cs
        return frozenset(u for u, v in scored.items() if v == best)

    def extract_lasso(self) -> Lasso | None:
        """Tail-biased cycle detection on (state, active-stage) pairs."""
        keys = [
            (x, fp) for x, fp in zip(self.prefix, self.fingerprints)
        ]
        for j in range(len(keys) - 1, 0, -1):
            for i in range(j - 1, -1, -1):
                if keys[i] == keys[j]:
                    return Lasso(tuple(self.prefix[:i]), tuple(self.prefix[i:j]))
        return None


def backtrack_control_set(compressed: CompressedNode) -> frozenset[int]:
    """Bottom-up Boolean backtracking: And folds children by intersection,
    Or by union, each joined to the parent's own set by union."""
    if compressed.is_leaf():
        return compressed.value
    child_vals = [backtrack_control_set(c) for c in compressed.children]
    if compressed.op is TltOp.AND:
        inner = frozenset.intersection(*child_vals)
    else:
        inner = frozenset.union(*child_vals)
    return compressed.value | inner


def guided_choice(session: SynthesisSession, feasible: frozenset[int]) -> int:
    """Operator policy: steer by layers of the constraint-intersected reach.

    The pending Until nodes' own layer maps ignore sibling Always branches
    (an online-added obstacle constraint lives in a sibling subtree), so
    descending them can stall against a constraint wall.  This policy
    recomputes reach layers over the joint stay set: the frozen Until stay
    regions intersected with every stage-active Always invariant set.
    Deterministic; falls back to the lowest feasible index when no Until
    discharge is pending.
    """
    from .reachability import ctrl_reach

    if session._last_control is None:
        session.synth_step()
    active = session._last_control.active
    pending = [
        n
        for n in session._pending_reach_nodes(active)
        if n.child is not None and n.child.op is TltOp.UNTIL
    ]
    if not pending:
        return min(feasible)
    cts = session.cts
    stay = cts.full_set()
    for n in iter_set_nodes(session.root):
        if n.id in active and n.rule == "always_inv":
            stay = stay & n.set_
    for n in pending:
        if n.stay is not None:
            stay = stay & n.stay
    x = session.prefix[-1]
    big = 1 << 30
    keys = {}
    for u in sorted(feasible):
        total = 0
        for n in pending:
            target = n.child.children[0].set_
            memo_key = ("ctrl_reach", (stay | target).mask, target.mask)
            guide = session.memo.get(memo_key)
            if guide is None:
                guide = session.memo[memo_key] = ctrl_reach(cts, stay | target, target)
            worst = 0
            for succ in cts.successors[x][u]:
                if succ in target:
                    layer = 0
                elif succ in guide.set_:
                    layer = guide.layers[succ] or 0
                else:
                    layer = big
                worst = max(worst, layer)
            total += worst
        keys[u] = total
    best = min(keys.values())
    return min(u for u, v in keys.items() if v == best)


def choose_steering_input(session: SynthesisSession, pool: frozenset[int]) -> int:
    """Pick the input whose worst successor keeps the most next-step options.

    Deterministic tie-break on the input index.  Layer-tied pools (which the
    progress filter passes through unchanged) otherwise collapse to an
    arbitrary index choice that can steer into low-freedom corners.
    """
    candidates = sorted(pool)
    if len(candidates) == 1:
        return candidates[0]
    x = session.prefix[-1]
    best_u, best_score = candidates[0], -1
    for u in candidates:
        worst = None
        for succ in session.cts.successors[x][u]:
            size = len(session._preview_feasible(succ))
            if worst is None or size < worst:
                worst = size
        score = worst if worst is not None else 0
        if score > best_score:
            best_u, best_score = u, score
    return best_u


def make_resolver(spec: str, seed: int = 0, script: list[int] | None = None) -> Resolver:
    if spec == "random":
        return RandomResolver(seed)
    if spec == "adversarial":
        return AdversarialResolver()
    if spec == "scripted":
        return ScriptedResolver(script or [])
    raise ValueError(f"unknown resolver {spec!r}")


def run_session(
    session: SynthesisSession,
    steps: int,
    choose: str = "lowest",
    progress: bool = False,
    rng: random.Random | None = None,
) -> list[StepRecord]:
    """Drive a session for up to ``steps`` inputs; stops on deadlock."""
    for _ in range(steps):
        if session.status is not SessionStatus.ACTIVE:
            break
        feasible = session.synth_step()
        if not feasible:
            break
        pool = session.progress_filter(feasible) if progress else feasible
        if choose == "lowest":
            u = min(pool)
        elif choose == "random":
            u = (rng or random.Random(0)).choice(sorted(pool))
        elif choose == "steer":
            u = choose_steering_input(session, pool)
        else:
            raise ValueError(f"unknown chooser {choose!r}")
        session.apply_input(u)
    return session.history
