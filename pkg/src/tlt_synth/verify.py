"""Model-checking verdicts and the independent lasso-enumeration oracle.

``eval_lasso`` decides LTL satisfaction exactly on ultimately periodic
words by backward fixed-point sweeps (two passes around the cycle suffice:
one to seed the wrap value, one to propagate it).  The enumeration oracle
is deliberately independent of the tree construction; property tests play
them against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from . import ltl
from .ltl import Formula
from .systems import Lasso, StateSet, TransitionSystem
from .tlt import build_existential_tlt, build_universal_tlt


def eval_lasso(
    prefix: Sequence[Iterable[str]], cycle: Sequence[Iterable[str]], formula: Formula
) -> bool:
    """Exact satisfaction of ``prefix . cycle^omega`` against ``formula``."""
    if not cycle:
        raise ValueError("cycle must be nonempty")
    atoms = sorted(ltl.atoms_of(formula))
    index = {a: i for i, a in enumerate(atoms)}

    def mask(labels: Iterable[str]) -> int:
        m = 0
        for a in labels:
            i = index.get(a)
            if i is not None:
                m |= 1 << i
        return m

    return eval_word_masks(
        tuple(mask(l) for l in prefix), tuple(mask(l) for l in cycle), formula, index
    )


def eval_word_masks(
    prefix: tuple[int, ...],
    cycle: tuple[int, ...],
    formula: Formula,
    atom_index: dict[str, int],
) -> bool:
    """Mask-encoded fast path of eval_lasso; positions are prefix + one cycle."""
    p, c = len(prefix), len(cycle)
    n = p + c
    word = prefix + cycle

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else p

    def arrays(f: Formula) -> list[bool]:
        if isinstance(f, ltl.TrueF):
            return [True] * n
        if isinstance(f, ltl.FalseF):
            return [False] * n
        if isinstance(f, ltl.Atom):
            bit = 1 << atom_index[f.name]
            return [bool(w & bit) for w in word]
        if isinstance(f, ltl.Not):
            return [not v for v in arrays(f.operand)]
        if isinstance(f, ltl.And):
            l, r = arrays(f.left), arrays(f.right)
            return [a and b for a, b in zip(l, r)]
        if isinstance(f, ltl.Or):
            l, r = arrays(f.left), arrays(f.right)
            return [a or b for a, b in zip(l, r)]
        if isinstance(f, ltl.Next):
            sub = arrays(f.operand)
            return [sub[nxt(i)] for i in range(n)]
        if isinstance(f, ltl.Until):
            s1, s2 = arrays(f.left), arrays(f.right)
            return _fix(s1, s2, p, c, seed=False)
        if isinstance(f, ltl.WeakUntil):
            s1, s2 = arrays(f.left), arrays(f.right)
            return _fix(s1, s2, p, c, seed=True)
        if isinstance(f, ltl.Eventually):
            sub = arrays(f.operand)
            return _fix([True] * n, sub, p, c, seed=False)
        if isinstance(f, ltl.Always):
            sub = arrays(f.operand)
            return _fix(sub, [False] * n, p, c, seed=True)
        raise TypeError(f"not a formula: {f!r}")

    return arrays(formula)[0]


def _fix(s1: list[bool], s2: list[bool], p: int, c: int, seed: bool) -> list[bool]:
    """val[i] = s2[i] or (s1[i] and val[next(i)]), least (seed False) or
    greatest (seed True) fixed point around the cycle."""
    n = p + c
    val = [seed] * n
    for _ in range(2):
        for i in range(n - 1, p - 1, -1):
            nxt = val[p] if i == n - 1 else val[i + 1]
            val[i] = s2[i] or (s1[i] and nxt)
    for i in range(p - 1, -1, -1):
        val[i] = s2[i] or (s1[i] and val[i + 1])
    return val


@dataclass(frozen=True)
class Verdict:
    kind: str  # proved | refuted | unknown
    via: str | None  # thm3(i) | thm3(ii) | thm4(i) | thm4(ii) | None
    witness: tuple[int, ...] | None

    def to_json(self) -> dict:
        out = {"verdict": self.kind}
        if self.via is not None:
            out["via"] = self.via
        if self.witness is not None:
            out["witness"] = {"states": list(self.witness)}
        return out


def model_check(ts: TransitionSystem, formula: Formula, memo: dict | None = None) -> Verdict:
    """Sound verdict via the tree approximations.

    Proved when the initial set sits inside the universal-tree root, or
    misses the existential tree of the negation entirely; Refuted when a
    necessary condition fails; Unknown otherwise (impossible on
    deterministic systems, where the approximations are tight).
    """
    memo = {} if memo is None else memo
    initial = ts.initial
    neg = ltl.negate(formula)
    uni = build_universal_tlt(ts, formula, memo)
    if initial.issubset(uni.set_):
        return Verdict("proved", "thm3(i)", tuple(sorted(initial)))
    exi_neg = build_existential_tlt(ts, neg, memo)
    if initial.isdisjoint(exi_neg.set_):
        return Verdict("proved", "thm3(ii)", tuple(sorted(initial)))
    exi = build_existential_tlt(ts, formula, memo)
    if not initial.issubset(exi.set_):
        return Verdict("refuted", "thm4(i)", tuple(sorted(initial - exi.set_)))
    uni_neg = build_universal_tlt(ts, neg, memo)
    offending = initial & uni_neg.set_
    if not offending.is_empty():
        return Verdict("refuted", "thm4(ii)", tuple(sorted(offending)))
    return Verdict("unknown", None, None)


def proved_via_both(ts: TransitionSystem, formula: Formula) -> tuple[bool, bool]:
    """Check both sufficient conditions independently (used by acceptance)."""
    memo: dict = {}
    uni = build_universal_tlt(ts, formula, memo)
    exi_neg = build_existential_tlt(ts, ltl.negate(formula), memo)
    return ts.initial.issubset(uni.set_), ts.initial.isdisjoint(exi_neg.set_)


def lassos_from(ts: TransitionSystem, x0: int, max_len: int) -> Iterator[Lasso]:
    """All lassos from x0 with |prefix| + |cycle| <= max_len."""
    succ = ts.successors
    walk = [x0]

    def extend() -> Iterator[Lasso]:
        last = walk[-1]
        nexts = set(succ[last])
        for m in range(len(walk)):
            if walk[m] in nexts:
                yield Lasso(tuple(walk[:m]), tuple(walk[m:]))
        if len(walk) < max_len:
            for y in succ[last]:
                walk.append(y)
                yield from extend()
                walk.pop()

    yield from extend()


@dataclass(frozen=True)
class OracleOutcome:
    kind: str  # holds | refuted | inconclusive
    lasso: Lasso | None = None


class _WordCache:
    def __init__(self, ts: TransitionSystem, formula: Formula):
        self.formula = formula
        atoms = sorted(ltl.atoms_of(formula))
        self.index = {a: i for i, a in enumerate(atoms)}
        self.state_mask = [
            sum(1 << self.index[a] for a in ts.labels[x] if a in self.index)
            for x in range(ts.n_states)
        ]
        self.cache: dict[tuple[tuple[int, ...], tuple[int, ...]], bool] = {}

    def eval(self, lasso: Lasso) -> bool:
        key = (
            tuple(self.state_mask[x] for x in lasso.prefix),
            tuple(self.state_mask[x] for x in lasso.cycle),
        )
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = eval_word_masks(
                key[0], key[1], self.formula, self.index
            )
        return hit


def forall_refuting_lasso(
    ts: TransitionSystem, x0: int, formula: Formula, max_len: int,
    cache: _WordCache | None = None,
) -> Lasso | None:
    cache = cache or _WordCache(ts, formula)
    for lasso in lassos_from(ts, x0, max_len):
        if not cache.eval(lasso):
            return lasso
    return None


def exists_satisfying_lasso(
    ts: TransitionSystem, x0: int, formula: Formula, max_len: int,
    cache: _WordCache | None = None,
) -> Lasso | None:
    cache = cache or _WordCache(ts, formula)
    for lasso in lassos_from(ts, x0, max_len):
        if cache.eval(lasso):
            return lasso
    return None


def oracle_forall(
    ts: TransitionSystem, x0: int, formula: Formula, max_len: int
) -> OracleOutcome:
    """Enumerate lassos from x0 up to max_len; refute via eval_lasso.

    Exhaustiveness of the lasso space is conservatively flagged at
    max_len >= 2 |S|; below that a clean sweep reports Inconclusive.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    refuting = forall_refuting_lasso(ts, x0, formula, max_len)
    if refuting is not None:
        return OracleOutcome("refuted", refuting)
    if max_len >= 2 * ts.n_states:
        return OracleOutcome("holds")
    return OracleOutcome("inconclusive")


def forall_satisfaction_set(
    ts: TransitionSystem, formula: Formula, max_len: int
) -> StateSet:
    """States with no refuting lasso at the given bound."""
    return satisfaction_sets(ts, formula, max_len)[0]


def exists_satisfaction_set(
    ts: TransitionSystem, formula: Formula, max_len: int
) -> StateSet:
    """States with at least one satisfying lasso at the given bound."""
    return satisfaction_sets(ts, formula, max_len)[1]


def satisfaction_sets(
    ts: TransitionSystem, formula: Formula, max_len: int
) -> tuple[StateSet, StateSet]:
    """(all-lassos-satisfy, some-lasso-satisfies) per state, one enumeration."""
    cache = _WordCache(ts, formula)
    forall_good = []
    exists_good = []
    for x in range(ts.n_states):
        all_sat, any_sat = True, False
        for lasso in lassos_from(ts, x, max_len):
            if cache.eval(lasso):
                any_sat = True
                if not all_sat:
                    break
            else:
                all_sat = False
                if any_sat:
                    break
        if all_sat:
            forall_good.append(x)
        if any_sat:
            exists_good.append(x)
    return (
        StateSet.from_indices(ts.n_states, forall_good),
        StateSet.from_indices(ts.n_states, exists_good),
    )
