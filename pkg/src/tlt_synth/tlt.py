"""Temporal logic trees: alternating set/operator trees built from weak-until
positive normal form formulae via reachability operators.

Three flavors share one construction, differing only in the operator suite:
universal (all-trajectory reach + robust invariant), existential (some-
trajectory reach + invariant), and controlled (forcible reach + robust
controlled invariant).

Construction, by structural induction:

* literals are single set nodes (atom label set, its complement, full, empty);
* And/Or joins two subtree roots under a Boolean operator node whose new
  parent set is the intersection/union of the subtree roots;
* Next adds the exact one-step predecessor set above the subtree;
* Until with a literal ``true`` left side builds the plain chain
  ``[reach(S, X2)] U [phi2-tree]`` (the shape the worked examples use);
* general Until replaces every leaf Y of the left tree with
  ``reach(Y, X2) \\ X2``, re-propagates ancestor sets bottom-up by each
  node's own rule, hangs a fresh copy of the phi2-tree under every replaced
  leaf via an Until operator, and joins the result with one more phi2 copy
  under a top-level Or;
* WeakUntil is the Or of the Until construction and the invariant-over-
  phi1-tree construction; a literal ``false`` right side keeps only the
  invariant branch.

A left U/W argument that is a pure Boolean combination of literals is
collapsed to its value as a single set node first; per-state semantics of
such formulae are exactly set membership, and the worked examples draw
these regions as one node.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from . import ltl
from .ltl import Formula
from .reachability import (
    ctrl_reach,
    invariant,
    one_step_all,
    one_step_forcible,
    one_step_some,
    rcis,
    reach_max,
    reach_min,
    robust_invariant,
)
from .systems import ControlledTransitionSystem, StateSet, TransitionSystem


class TltOp(enum.Enum):
    AND = "and"
    OR = "or"
    NEXT = "next"
    UNTIL = "until"
    ALWAYS = "always"


BOOLEAN_OPS = (TltOp.AND, TltOp.OR)


@dataclass
class OpNode:
    id: int
    op: TltOp
    children: list["SetNode"]


@dataclass
class SetNode:
    id: int
    set_: StateSet
    formula: Formula
    rule: str  # const | and | or | next | until_full | until_diff | always_inv
    stay: StateSet | None = None  # frozen stay set for until_diff recomputation
    layers: tuple[int | None, ...] | None = None
    child: OpNode | None = None

    def is_leaf(self) -> bool:
        return self.child is None


class IncompleteCoding(KeyError):
    pass


def iter_set_nodes(root: SetNode):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if node.child is not None:
            stack.extend(reversed(node.child.children))


def iter_op_nodes(root: SetNode):
    for node in iter_set_nodes(root):
        if node.child is not None:
            yield node.child


def validate_tree(root: SetNode) -> None:
    """Structural invariants: alternation, leaf/root kinds, operator arity."""
    for node in iter_set_nodes(root):
        op = node.child
        if op is None:
            continue
        if op.op in BOOLEAN_OPS:
            if len(op.children) < 2:
                raise AssertionError(f"{op.op} node {op.id} has {len(op.children)} children")
        elif len(op.children) != 1:
            raise AssertionError(f"{op.op} node {op.id} has {len(op.children)} children")
        for c in op.children:
            if not isinstance(c, SetNode):
                raise AssertionError("operator child is not a set node")


class _Suite:
    """The reachability operator suite that parameterizes a construction."""

    def __init__(self, reach, inv, one_step, full, label):
        self.reach = reach
        self.inv = inv
        self.one_step = one_step
        self.full = full
        self.label = label


def _universal_suite(ts: TransitionSystem, memo: dict) -> _Suite:
    return _Suite(
        _memoized(memo, "reach_min", lambda o1, o2: reach_min(ts, o1, o2)),
        _memoized(memo, "robust_invariant", lambda o: robust_invariant(ts, o)),
        lambda t: one_step_all(ts, t),
        ts.full_set(),
        ts.label_set,
    )


def _existential_suite(ts: TransitionSystem, memo: dict) -> _Suite:
    return _Suite(
        _memoized(memo, "reach_max", lambda o1, o2: reach_max(ts, o1, o2)),
        _memoized(memo, "invariant", lambda o: invariant(ts, o)),
        lambda t: one_step_some(ts, t),
        ts.full_set(),
        ts.label_set,
    )


def _controlled_suite(cts: ControlledTransitionSystem, memo: dict) -> _Suite:
    return _Suite(
        _memoized(memo, "ctrl_reach", lambda o1, o2: ctrl_reach(cts, o1, o2)),
        _memoized(memo, "rcis", lambda o: rcis(cts, o)),
        lambda t: one_step_forcible(cts, t),
        cts.full_set(),
        cts.label_set,
    )


def _memoized(memo: dict, tag: str, fn):
    def wrapped(*sets: StateSet):
        key = (tag,) + tuple(s.mask for s in sets)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = fn(*sets)
        return hit

    return wrapped


def _is_literal_boolean(f: Formula) -> bool:
    if isinstance(f, (ltl.TrueF, ltl.FalseF, ltl.Atom)):
        return True
    if isinstance(f, ltl.Not):
        return isinstance(f.operand, ltl.Atom)
    if isinstance(f, (ltl.And, ltl.Or)):
        return _is_literal_boolean(f.left) and _is_literal_boolean(f.right)
    return False


class _Builder:
    def __init__(self, suite: _Suite):
        self.suite = suite
        self.counter = itertools.count()

    def fresh_id(self) -> int:
        return next(self.counter)

    def set_node(self, **kw) -> SetNode:
        return SetNode(id=self.fresh_id(), **kw)

    def literal_set(self, f: Formula) -> StateSet:
        s = self.suite
        if isinstance(f, ltl.TrueF):
            return s.full
        if isinstance(f, ltl.FalseF):
            return StateSet.empty(s.full.universe)
        if isinstance(f, ltl.Atom):
            return s.label(f.name)
        if isinstance(f, ltl.Not):
            return s.full - s.label(f.operand.name)
        if isinstance(f, ltl.And):
            return self.literal_set(f.left) & self.literal_set(f.right)
        if isinstance(f, ltl.Or):
            return self.literal_set(f.left) | self.literal_set(f.right)
        raise TypeError(f"not a literal Boolean formula: {f!r}")

    def build(self, f: Formula) -> SetNode:
        s = self.suite
        if isinstance(f, (ltl.TrueF, ltl.FalseF, ltl.Atom, ltl.Not)):
            return self.set_node(set_=self.literal_set(f), formula=f, rule="const")
        if isinstance(f, (ltl.And, ltl.Or)):
            left = self.build(f.left)
            right = self.build(f.right)
            is_and = isinstance(f, ltl.And)
            combined = left.set_ & right.set_ if is_and else left.set_ | right.set_
            op = OpNode(self.fresh_id(), TltOp.AND if is_and else TltOp.OR, [left, right])
            return self.set_node(
                set_=combined, formula=f, rule="and" if is_and else "or", child=op
            )
        if isinstance(f, ltl.Next):
            sub = self.build(f.operand)
            op = OpNode(self.fresh_id(), TltOp.NEXT, [sub])
            return self.set_node(
                set_=s.one_step(sub.set_), formula=f, rule="next", child=op
            )
        if isinstance(f, ltl.Until):
            return self.build_until(f)
        if isinstance(f, ltl.WeakUntil):
            if isinstance(f.right, ltl.FalseF):
                return self.build_always(f.left, f)
            u_root = self.build_until(ltl.Until(f.left, f.right))
            box_root = self.build_always(f.left, ltl.WeakUntil(f.left, ltl.FALSE))
            op = OpNode(self.fresh_id(), TltOp.OR, [u_root, box_root])
            return self.set_node(
                set_=u_root.set_ | box_root.set_, formula=f, rule="or", child=op
            )
        raise TypeError(f"formula not in weak-until positive normal form: {f!r}")

    def build_always(self, f1: Formula, provenance: Formula) -> SetNode:
        sub = self.build(f1)
        result = self.suite.inv(sub.set_)
        op = OpNode(self.fresh_id(), TltOp.ALWAYS, [sub])
        return self.set_node(
            set_=result.set_,
            formula=provenance,
            rule="always_inv",
            layers=result.layers,
            child=op,
        )

    def build_until(self, f: ltl.Until) -> SetNode:
        s = self.suite
        sub2 = self.build(f.right)
        if isinstance(f.left, ltl.TrueF):
            result = s.reach(s.full, sub2.set_)
            op = OpNode(self.fresh_id(), TltOp.UNTIL, [sub2])
            return self.set_node(
                set_=result.set_,
                formula=f,
                rule="until_full",
                stay=s.full,
                layers=result.layers,
                child=op,
            )
        # The left subtree acts as one stay region: states inside its root
        # satisfy the quantified left formula, so reaching the right root
        # through them witnesses the Until in both approximation directions.
        # (Replacing the left tree's leaves individually loses states when
        # the left side nests temporal operators.)
        if _is_literal_boolean(f.left):
            stay = self.literal_set(f.left)
        else:
            stay = self.build(f.left).set_
        result = s.reach(stay, sub2.set_)
        diff = self.set_node(
            set_=result.set_ - sub2.set_,
            formula=f,
            rule="until_diff",
            stay=stay,
            layers=result.layers,
            child=OpNode(self.fresh_id(), TltOp.UNTIL, [sub2]),
        )
        extra = self.copy(sub2)
        op = OpNode(self.fresh_id(), TltOp.OR, [diff, extra])
        return self.set_node(set_=diff.set_ | extra.set_, formula=f, rule="or", child=op)

    def copy(self, node: SetNode) -> SetNode:
        child = None
        if node.child is not None:
            child = OpNode(
                self.fresh_id(),
                node.child.op,
                [self.copy(c) for c in node.child.children],
            )
        return SetNode(
            id=self.fresh_id(),
            set_=node.set_,
            formula=node.formula,
            rule=node.rule,
            stay=node.stay,
            layers=node.layers,
            child=child,
        )


def _build(suite: _Suite, formula: Formula) -> SetNode:
    root = _Builder(suite).build(ltl.to_wu_pnf(formula))
    validate_tree(root)
    return root


def build_universal_tlt(
    ts: TransitionSystem, formula: Formula, memo: dict | None = None
) -> SetNode:
    return _build(_universal_suite(ts, {} if memo is None else memo), formula)


def build_existential_tlt(
    ts: TransitionSystem, formula: Formula, memo: dict | None = None
) -> SetNode:
    return _build(_existential_suite(ts, {} if memo is None else memo), formula)


def build_tlt(
    ts: TransitionSystem,
    formula: Formula,
    quantifier: ltl.Quantifier,
    memo: dict | None = None,
) -> SetNode:
    """Quantifier-dispatched construction over an autonomous system."""
    if quantifier is ltl.Quantifier.FORALL:
        return build_universal_tlt(ts, formula, memo)
    return build_existential_tlt(ts, formula, memo)


def build_controlled_tlt(
    cts: ControlledTransitionSystem, formula: Formula, memo: dict | None = None
) -> SetNode:
    return _build(_controlled_suite(cts, {} if memo is None else memo), formula)


@dataclass(frozen=True)
class CompletePath:
    """Alternating X0 o1 X1 ... oN XN sequence from the root to a leaf."""

    sets: tuple[SetNode, ...]
    ops: tuple[OpNode, ...]

    def __len__(self) -> int:
        return len(self.sets)


def complete_paths(root: SetNode) -> list[CompletePath]:
    paths: list[CompletePath] = []

    def walk(node: SetNode, sets: list[SetNode], ops: list[OpNode]):
        sets = sets + [node]
        if node.child is None:
            paths.append(CompletePath(tuple(sets), tuple(ops)))
            return
        for c in node.child.children:
            walk(c, sets, ops + [node.child])

    walk(root, [], [])
    return paths


@dataclass(frozen=True)
class BooleanFragment:
    """A minimal Boolean fragment of a complete path.

    ``leading``/``trailing`` are the delimiting Boolean operator nodes
    (absent at the path ends); ``sets`` are the set nodes strictly between
    them, with ``inner_ops`` the non-Boolean operators interleaved.
    """

    leading: OpNode | None
    sets: tuple[SetNode, ...]
    inner_ops: tuple[OpNode, ...]
    trailing: OpNode | None


def minimal_boolean_fragments(path: CompletePath) -> list[BooleanFragment]:
    fragments = []
    sets: list[SetNode] = []
    inner: list[OpNode] = []
    leading: OpNode | None = None
    for i, node in enumerate(path.sets):
        sets.append(node)
        op = path.ops[i] if i < len(path.ops) else None
        if op is not None and op.op in BOOLEAN_OPS:
            fragments.append(BooleanFragment(leading, tuple(sets), tuple(inner), op))
            leading, sets, inner = op, [], []
        elif op is not None:
            inner.append(op)
    fragments.append(BooleanFragment(leading, tuple(sets), tuple(inner), None))
    return fragments


@dataclass
class CompressedNode:
    """Node of an Algorithm-2 compressed tree; only Boolean operators remain."""

    value: object  # StateSet for TLTs, frozenset of input indices for control trees
    op: TltOp | None
    children: list["CompressedNode"]
    merged_ids: tuple[int, ...]

    def is_leaf(self) -> bool:
        return self.op is None


def compress(root: SetNode, value=None) -> CompressedNode:
    """Collapse every minimal Boolean fragment to the union of its set nodes.

    ``value`` maps a SetNode to the payload being merged (defaults to the
    node's state set); payloads must support ``|``.
    """
    get = value if value is not None else (lambda n: n.set_)

    def segment(node: SetNode) -> CompressedNode:
        merged = get(node)
        ids = [node.id]
        cur = node
        while cur.child is not None and cur.child.op not in BOOLEAN_OPS:
            cur = cur.child.children[0]
            merged = merged | get(cur)
            ids.append(cur.id)
        if cur.child is None:
            return CompressedNode(merged, None, [], tuple(ids))
        op = cur.child
        return CompressedNode(
            merged, op.op, [segment(c) for c in op.children], tuple(ids)
        )

    return segment(root)


def _lasso_member(lasso, k: int, sset: StateSet) -> bool:
    return lasso.state_at(k) in sset


def _always_holds(lasso, k: int, sset: StateSet) -> bool:
    """x_j in sset for all j >= k on the lasso."""
    p = len(lasso.prefix)
    for j in range(k, p):
        if lasso.prefix[j] not in sset:
            return False
    return all(c in sset for c in lasso.cycle)


def path_satisfies(
    lasso,
    path: CompletePath,
    coding: dict[int, int],
    prefix_mode: bool = False,
    prefix_len: int | None = None,
) -> bool:
    """Clause-by-clause satisfaction of one complete path under a time coding.

    ``coding`` maps operator-node ids to activation times, nondecreasing
    along the path (k0 = 0 is implicit on the root).  In prefix mode only
    positions up to ``prefix_len`` are inspected and Always clauses are
    checked on the window [k_i, prefix_len].
    """
    if prefix_mode and prefix_len is None:
        raise ValueError("prefix_mode requires prefix_len")
    times = []
    for op in path.ops:
        if op.id not in coding:
            raise IncompleteCoding(f"operator node {op.id} missing from coding")
        times.append(coding[op.id])
    prev = 0
    for t in times:
        if t < prev:
            raise ValueError("coding must be nondecreasing along the path")
        prev = t
    if prefix_mode and any(t > prefix_len for t in times):
        return False
    if not _lasso_member(lasso, 0, path.sets[0].set_):
        return False
    if prefix_mode and not _lasso_member(lasso, prefix_len, path.sets[-1].set_):
        return False
    k_prev = 0
    for i, op in enumerate(path.ops):
        k = times[i]
        before, here = path.sets[i].set_, path.sets[i + 1].set_
        if op.op in BOOLEAN_OPS:
            if not (_lasso_member(lasso, k, before) and _lasso_member(lasso, k, here)):
                return False
        elif op.op is TltOp.NEXT:
            if k < 1:
                return False
            if not (_lasso_member(lasso, k - 1, before) and _lasso_member(lasso, k, here)):
                return False
        elif op.op is TltOp.UNTIL:
            if any(not _lasso_member(lasso, j, before) for j in range(k_prev, k)):
                return False
            if not _lasso_member(lasso, k, here):
                return False
        elif op.op is TltOp.ALWAYS:
            if prefix_mode:
                if any(not _lasso_member(lasso, j, here) for j in range(k, prefix_len + 1)):
                    return False
            else:
                if not _always_holds(lasso, k, here):
                    return False
        k_prev = k
    return True


def coding_bound(lasso, root: SetNode) -> int:
    n_ops = sum(1 for _ in iter_op_nodes(root))
    return len(lasso.prefix) + len(lasso.cycle) * (n_ops + 1)


def tlt_satisfies(lasso, root: SetNode) -> bool:
    """True iff some time coding makes the backtracked tree evaluate true.

    Witness search is a dynamic program over activation times bounded by
    |prefix| + |cycle| * (n_ops + 1); times are shared where paths share
    operator nodes, exactly as a whole-tree coding requires.
    """
    bound = coding_bound(lasso, root)
    memo: dict[tuple[int, int], bool] = {}

    def feasible(node: SetNode, t: int) -> bool:
        if node.child is None:
            return True
        key = (node.id, t)
        hit = memo.get(key)
        if hit is not None:
            return hit
        op = node.child
        ok = False
        if op.op in BOOLEAN_OPS:
            combine = all if op.op is TltOp.AND else any
            for k in range(t, bound + 1):
                if not _lasso_member(lasso, k, node.set_):
                    continue
                if combine(
                    _lasso_member(lasso, k, c.set_) and feasible(c, k)
                    for c in op.children
                ):
                    ok = True
                    break
        elif op.op is TltOp.NEXT:
            child = op.children[0]
            for k in range(max(t, 1), bound + 1):
                if (
                    _lasso_member(lasso, k - 1, node.set_)
                    and _lasso_member(lasso, k, child.set_)
                    and feasible(child, k)
                ):
                    ok = True
                    break
        elif op.op is TltOp.UNTIL:
            child = op.children[0]
            for k in range(t, bound + 1):
                if k > t and not _lasso_member(lasso, k - 1, node.set_):
                    break  # stay interval [t, k-1] just broke
                if _lasso_member(lasso, k, child.set_) and feasible(child, k):
                    ok = True
                    break
        elif op.op is TltOp.ALWAYS:
            child = op.children[0]
            for k in range(t, bound + 1):
                if _always_holds(lasso, k, child.set_) and feasible(child, k):
                    ok = True
                    break
        memo[key] = ok
        return ok

    return _lasso_member(lasso, 0, root.set_) and feasible(root, 0)


def tlt_satisfies_naive(lasso, root: SetNode) -> bool:
    """Reference implementation: enumerate whole-tree codings, evaluate each
    complete path clause-wise, and backtrack And/Or over the compressed tree.
    Exponential; used to cross-check tlt_satisfies on small instances.
    """
    bound = coding_bound(lasso, root)
    ops = list(iter_op_nodes(root))
    paths = complete_paths(root)
    ctree = compress(root)

    def admissible_codings():
        # nondecreasing along every root-to-leaf path
        parent_op: dict[int, OpNode | None] = {}

        def visit(node: SetNode, above: OpNode | None):
            if node.child is not None:
                parent_op[node.child.id] = above
                for c in node.child.children:
                    visit(c, node.child)

        visit(root, None)
        for combo in itertools.product(range(bound + 1), repeat=len(ops)):
            coding = {op.id: t for op, t in zip(ops, combo)}
            if all(
                parent_op[op.id] is None or coding[parent_op[op.id].id] <= coding[op.id]
                for op in ops
            ):
                yield coding

    def backtrack(cnode: CompressedNode, leaf_values: dict[int, bool]) -> bool:
        if cnode.is_leaf():
            return leaf_values[cnode.merged_ids[-1]]
        vals = [backtrack(c, leaf_values) for c in cnode.children]
        return all(vals) if cnode.op is TltOp.AND else any(vals)

    for coding in admissible_codings():
        leaf_values = {}
        for path in paths:
            restricted = {op.id: coding[op.id] for op in path.ops}
            ok = path_satisfies(lasso, path, restricted)
            leaf_values[path.sets[-1].id] = ok
        if backtrack(ctree, leaf_values):
            return True
    return False


def tree_to_json(root: SetNode, member_limit: int = 64) -> dict:
    """Serialize for `tlt dump`: ids, kinds, cardinalities, provenance."""
    nodes = []

    def visit(node: SetNode):
        entry = {
            "id": node.id,
            "kind": "set",
            "cardinality": len(node.set_),
            "formula": ltl.format_ltl(node.formula),
            "rule": node.rule,
            "children": [],
        }
        if len(node.set_) <= member_limit:
            entry["members"] = sorted(node.set_)
        if node.child is not None:
            op = node.child
            entry["children"] = [op.id]
            nodes.append(entry)
            op_entry = {
                "id": op.id,
                "kind": "op",
                "op": op.op.value,
                "children": [c.id for c in op.children],
            }
            nodes.append(op_entry)
            for c in op.children:
                visit(c)
        else:
            nodes.append(entry)

    visit(root)
    return {"root": root.id, "nodes": nodes}


def trees_isomorphic(a: SetNode, b: SetNode, require_equal_sets: bool = True) -> bool:
    """Node-wise structural comparison of two trees."""
    if require_equal_sets and a.set_ != b.set_:
        return False
    if (a.child is None) != (b.child is None):
        return False
    if a.child is None:
        return True
    if a.child.op is not b.child.op or len(a.child.children) != len(b.child.children):
        return False
    return all(
        trees_isomorphic(x, y, require_equal_sets)
        for x, y in zip(a.child.children, b.child.children)
    )
