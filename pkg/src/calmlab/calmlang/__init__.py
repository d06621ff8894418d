"""The rule language: grammar, parser, validator, pretty-printer.

Programs are lists of relation declarations and rules::

    rel local_edge(x, y) [input]
    rel nbr(@owner, @peer) [input]
    chan copy(@dest, x, y)
    rel path(x, y) [output]

    edge(X, Y) :- local_edge(X, Y).
    edge(X, Y) :- copy(_, X, Y).
    copy(P, X, Y) :- local_edge(X, Y), id(M), nbr(M, P).
    path(X, Y) :- edge(X, Y).
    path(X, Z) :- edge(X, Y), path(Y, Z).

Non-monotone constructs are visually distinct: negation is ``!lit(...)``,
aggregates are ``count<X>`` / ``min<X>`` / ``max<X>`` in rule heads.
See docs/language.md for the full grammar.
"""

from .syntax import (
    AggTerm,
    BodyElem,
    BoolOrTerm,
    ColSpec,
    Comparison,
    Const,
    GSetTerm,
    Literal,
    MaxIntTerm,
    Negation,
    Program,
    RelDecl,
    Rule,
    Term,
    TwoPTerm,
    Var,
    Wildcard,
)
from .parser import ParseError, parse_program
from .printer import program_to_text
from .validate import (
    RESERVED_RELATIONS,
    Schema,
    ValidatedProgram,
    ValidatedRule,
    ValidationError,
    validate_program,
)

__all__ = [
    "AggTerm",
    "BodyElem",
    "BoolOrTerm",
    "ColSpec",
    "Comparison",
    "Const",
    "GSetTerm",
    "Literal",
    "MaxIntTerm",
    "Negation",
    "ParseError",
    "Program",
    "RESERVED_RELATIONS",
    "RelDecl",
    "Rule",
    "Schema",
    "Term",
    "TwoPTerm",
    "ValidatedProgram",
    "ValidatedRule",
    "ValidationError",
    "Var",
    "Wildcard",
    "parse_program",
    "program_to_text",
    "validate_program",
]
