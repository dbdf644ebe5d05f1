"""LTL formulae: immutable AST, concrete-syntax parser, negation, and the
weak-until positive normal form used by the tree construction.

Concrete syntax (ASCII):

    formula := wu
    wu      := or (("U" | "W") wu)?          # right-associative
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := ("!" | "X" | "F" | "G") unary | atom | "true" | "false" | "(" formula ")"

`X F G U W true false` are keywords; any other identifier matching
[A-Za-z_][A-Za-z0-9_]* is an atom.  `&` and `|` chains fold to the right,
so ``a & b & c`` is ``And(a, And(b, c))``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Quantifier(enum.Enum):
    """Trajectory quantifier prefixing a formula: over all trajectories from
    a state, or over some trajectory."""

    FORALL = "forall"
    EXISTS = "exists"


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class WeakUntil(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


TRUE = TrueF()
FALSE = FalseF()

_KEYWORDS = {"X", "F", "G", "U", "W", "true", "false"}


class LtlSyntaxError(ValueError):
    """Malformed formula text; carries the byte offset and expected tokens."""

    def __init__(self, offset: int, expected: set[str], found: str):
        self.offset = offset
        self.expected = sorted(expected)
        self.found = found
        super().__init__(
            f"at offset {offset}: expected one of {', '.join(self.expected)}; found {found!r}"
        )


@dataclass(frozen=True)
class _Token:
    kind: str  # "atom", "op", "lparen", "rparen", "true", "false", "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "!&|()":
            kind = {"(": "lparen", ")": "rparen"}.get(c, "op")
            tokens.append(_Token(kind, c, i))
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in ("true", "false"):
                tokens.append(_Token(word, word, i))
            elif word in _KEYWORDS:
                tokens.append(_Token("op", word, i))
            else:
                tokens.append(_Token("atom", word, i))
            i = j
            continue
        raise LtlSyntaxError(i, {"atom", "operator", "("}, c)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, expected: set[str]) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise LtlSyntaxError(tok.offset, expected, tok.text or "<end>")
        return self.advance()

    def formula(self) -> Formula:
        left = self.or_()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("U", "W"):
            self.advance()
            right = self.formula()
            return Until(left, right) if tok.text == "U" else WeakUntil(left, right)
        return left

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.peek().kind == "op" and self.peek().text == "|":
            self.advance()
            parts.append(self.and_())
        return _fold_right(Or, parts)

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.peek().kind == "op" and self.peek().text == "&":
            self.advance()
            parts.append(self.unary())
        return _fold_right(And, parts)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "X", "F", "G"):
            self.advance()
            inner = self.unary()
            return {"!": Not, "X": Next, "F": Eventually, "G": Always}[tok.text](inner)
        if tok.kind == "atom":
            self.advance()
            return Atom(tok.text)
        if tok.kind == "true":
            self.advance()
            return TRUE
        if tok.kind == "false":
            self.advance()
            return FALSE
        if tok.kind == "lparen":
            self.advance()
            inner = self.formula()
            self.expect("rparen", {")"})
            return inner
        raise LtlSyntaxError(
            tok.offset, {"atom", "true", "false", "!", "X", "F", "G", "("}, tok.text or "<end>"
        )


def _fold_right(op, parts: list[Formula]) -> Formula:
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = op(part, result)
    return result


def parse_ltl(text: str) -> Formula:
    """Parse concrete syntax into a Formula; raises LtlSyntaxError on bad input."""
    parser = _Parser(_tokenize(text))
    result = parser.formula()
    tok = parser.peek()
    if tok.kind != "end":
        raise LtlSyntaxError(tok.offset, {"<end>", "U", "W", "&", "|"}, tok.text)
    return result


# Precedence levels for printing: higher binds tighter.
_PREC_UW = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4


def _prec(f: Formula) -> int:
    if isinstance(f, (Until, WeakUntil)):
        return _PREC_UW
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    return _PREC_UNARY


def format_ltl(f: Formula) -> str:
    """Canonical printer; parse_ltl(format_ltl(f)) == f."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + _wrap(f.operand, _PREC_UNARY)
    if isinstance(f, Next):
        return "X " + _wrap(f.operand, _PREC_UNARY)
    if isinstance(f, Eventually):
        return "F " + _wrap(f.operand, _PREC_UNARY)
    if isinstance(f, Always):
        return "G " + _wrap(f.operand, _PREC_UNARY)
    if isinstance(f, And):
        # right-folded chains print flat; a left And operand needs parens
        return _wrap_strict(f.left, _PREC_AND) + " & " + _wrap(f.right, _PREC_AND)
    if isinstance(f, Or):
        return _wrap_strict(f.left, _PREC_OR) + " | " + _wrap(f.right, _PREC_OR)
    if isinstance(f, Until):
        return _wrap_strict(f.left, _PREC_UW) + " U " + _wrap(f.right, _PREC_UW)
    if isinstance(f, WeakUntil):
        return _wrap_strict(f.left, _PREC_UW) + " W " + _wrap(f.right, _PREC_UW)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, prec: int) -> str:
    # operand on the associative side: parenthesize only strictly looser operators
    if _prec(f) < prec:
        return "(" + format_ltl(f) + ")"
    return format_ltl(f)


def _wrap_strict(f: Formula, prec: int) -> str:
    # operand on the non-associative side: parenthesize equal precedence too
    if _prec(f) <= prec:
        return "(" + format_ltl(f) + ")"
    return format_ltl(f)


def negate(f: Formula) -> Formula:
    """Negation with one-level double-negation elimination."""
    if isinstance(f, Not):
        return f.operand
    return Not(f)


def atoms_of(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms_of(f.operand)
    if isinstance(f, (And, Or, Until, WeakUntil)):
        return atoms_of(f.left) | atoms_of(f.right)
    return set()


def is_wu_pnf(f: Formula) -> bool:
    """Negations only directly above atoms; temporal operators only X, U, W."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return True
    if isinstance(f, Not):
        return isinstance(f.operand, Atom)
    if isinstance(f, Next):
        return is_wu_pnf(f.operand)
    if isinstance(f, (And, Or, Until, WeakUntil)):
        return is_wu_pnf(f.left) and is_wu_pnf(f.right)
    return False  # Eventually / Always are sugar, eliminated by to_wu_pnf


def to_wu_pnf(f: Formula) -> Formula:
    """Rewrite into the weak-until positive normal form.

    Rewrites: F p => true U p; G p => p W false; !X p => X !p;
    !(p U q) => (p & !q) W (!p & !q); !(p W q) => (p & !q) U (!p & !q);
    De Morgan for & and |; !true => false.  Negated F/G go through their
    duals directly (!F p => G !p, !G p => F !p) so the output stays small.
    """
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, And):
        return And(to_wu_pnf(f.left), to_wu_pnf(f.right))
    if isinstance(f, Or):
        return Or(to_wu_pnf(f.left), to_wu_pnf(f.right))
    if isinstance(f, Next):
        return Next(to_wu_pnf(f.operand))
    if isinstance(f, Until):
        return Until(to_wu_pnf(f.left), to_wu_pnf(f.right))
    if isinstance(f, WeakUntil):
        return WeakUntil(to_wu_pnf(f.left), to_wu_pnf(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, to_wu_pnf(f.operand))
    if isinstance(f, Always):
        return WeakUntil(to_wu_pnf(f.operand), FALSE)
    if isinstance(f, Not):
        g = f.operand
        if isinstance(g, TrueF):
            return FALSE
        if isinstance(g, FalseF):
            return TRUE
        if isinstance(g, Atom):
            return f
        if isinstance(g, Not):
            return to_wu_pnf(g.operand)
        if isinstance(g, And):
            return Or(to_wu_pnf(Not(g.left)), to_wu_pnf(Not(g.right)))
        if isinstance(g, Or):
            return And(to_wu_pnf(Not(g.left)), to_wu_pnf(Not(g.right)))
        if isinstance(g, Next):
            return Next(to_wu_pnf(Not(g.operand)))
        if isinstance(g, Eventually):
            return WeakUntil(to_wu_pnf(Not(g.operand)), FALSE)
        if isinstance(g, Always):
            return Until(TRUE, to_wu_pnf(Not(g.operand)))
        if isinstance(g, Until):
            p = to_wu_pnf(g.left)
            np, nq = to_wu_pnf(Not(g.left)), to_wu_pnf(Not(g.right))
            return WeakUntil(And(p, nq), And(np, nq))
        if isinstance(g, WeakUntil):
            p = to_wu_pnf(g.left)
            np, nq = to_wu_pnf(Not(g.left)), to_wu_pnf(Not(g.right))
            return Until(And(p, nq), And(np, nq))
    raise TypeError(f"not a formula: {f!r}")
