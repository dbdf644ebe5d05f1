"""Temporal-logic-tree model checking and online control synthesis."""

from .ltl import Formula, LtlSyntaxError, format_ltl, negate, parse_ltl, to_wu_pnf
from .systems import (
    ControlledTransitionSystem,
    Lasso,
    StateSet,
    TransitionSystem,
    load_system,
)

__all__ = [
    "Formula",
    "LtlSyntaxError",
    "parse_ltl",
    "format_ltl",
    "negate",
    "to_wu_pnf",
    "StateSet",
    "TransitionSystem",
    "ControlledTransitionSystem",
    "Lasso",
    "load_system",
]

__version__ = "0.1.0"
