"""AST node types. Every node keeps its source position for diagnostics;
positions are excluded from structural equality so a parse/print round trip
compares equal."""

from __future__ import annotations

from dataclasses import dataclass, field

Pos = tuple  # (line, col)

NOPOS: Pos = (0, 0)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class Wildcard:
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class Const:
    value: object  # scalar Value
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class GSetTerm:
    elems: tuple
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class MaxIntTerm:
    arg: object
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class BoolOrTerm:
    arg: object
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class TwoPTerm:
    added: tuple
    tombstoned: tuple
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class AggTerm:
    """count<X> / min<X> / max<X>; head position only."""

    kind: str  # count | min | max
    var: Var
    pos: Pos = field(default=NOPOS, compare=False)


Term = object  # Var | Wildcard | Const | lattice terms | AggTerm (head only)

LATTICE_TERM_TYPES = (GSetTerm, MaxIntTerm, BoolOrTerm, TwoPTerm)


@dataclass(frozen=True)
class Literal:
    relation: str
    args: tuple
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class Negation:
    literal: Literal
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <=
    left: object
    right: object
    pos: Pos = field(default=NOPOS, compare=False)


BodyElem = object  # Literal | Negation | Comparison


@dataclass(frozen=True)
class Rule:
    head: Literal
    body: tuple  # tuple[BodyElem]; empty for ground-fact rules
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class ColSpec:
    name: str
    role: str  # data | addr
    lattice: str | None = None  # gset | maxint | boolor | 2p
    pos: Pos = field(default=NOPOS, compare=False)


@dataclass(frozen=True)
class RelDecl:
    name: str
    cols: tuple  # tuple[ColSpec]
    channel: bool
    persistence: str  # persisted | event
    is_input: bool = False
    is_output: bool = False
    pos: Pos = field(default=NOPOS, compare=False)

    @property
    def arity(self) -> int:
        return len(self.cols)


@dataclass(frozen=True)
class Program:
    decls: tuple  # tuple[RelDecl]
    rules: tuple  # tuple[Rule]
    filename: str = field(default="<input>", compare=False)


def term_vars(t) -> list[Var]:
    """Named variables occurring in a term (wildcards excluded)."""
    if isinstance(t, Var):
        return [t]
    if isinstance(t, AggTerm):
        return [t.var]
    if isinstance(t, GSetTerm):
        return [v for e in t.elems for v in term_vars(e)]
    if isinstance(t, (MaxIntTerm, BoolOrTerm)):
        return term_vars(t.arg)
    if isinstance(t, TwoPTerm):
        return [v for e in t.added + t.tombstoned for v in term_vars(e)]
    return []


def literal_vars(lit: Literal) -> list[Var]:
    return [v for a in lit.args for v in term_vars(a)]
