"""Static checks that turn a parsed Program into a ValidatedProgram.

Beyond the classic datalog safety conditions (range restriction, bound
negation, bound comparisons) this enforces the network-facing invariants:
channel relations route on an address-typed first column, input/output
markers only make sense on persisted relations, and lattice-typed columns
stay out of channels, events, and negated literals.

Validation also fixes a per-rule evaluation plan: positive literals join in
source order and each filter (comparison or negation) runs as soon as its
variables are bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..values import Address
from .syntax import (
    AggTerm,
    ColSpec,
    Comparison,
    Const,
    GSetTerm,
    LATTICE_TERM_TYPES,
    Literal,
    MaxIntTerm,
    BoolOrTerm,
    Negation,
    Program,
    RelDecl,
    Rule,
    TwoPTerm,
    Wildcard,
    literal_vars,
    term_vars,
)

RESERVED_RELATIONS = ("id", "all")

_LATTICE_OF_TERM = {GSetTerm: "gset", MaxIntTerm: "maxint", BoolOrTerm: "boolor", TwoPTerm: "2p"}


class ValidationError(Exception):
    def __init__(self, message: str, pos=(0, 0), filename: str = "<input>"):
        self.message = message
        self.line, self.col = pos
        self.filename = filename
        super().__init__(f"{filename}:{self.line}:{self.col}: {message}")


@dataclass(frozen=True)
class Schema:
    name: str
    cols: tuple  # tuple[ColSpec]
    kind: str  # persisted | event | channel
    is_input: bool = False
    is_output: bool = False
    reserved: bool = False

    @property
    def arity(self) -> int:
        return len(self.cols)

    @property
    def lattice_cols(self) -> tuple:
        return tuple(i for i, c in enumerate(self.cols) if c.lattice)

    @property
    def scalar_cols(self) -> tuple:
        return tuple(i for i, c in enumerate(self.cols) if not c.lattice)


@dataclass(frozen=True)
class ValidatedRule:
    rule: Rule
    index: int
    plan: tuple  # body elements ordered so filters run once bound
    positives: tuple  # positive body literals, source order
    negations: tuple
    comparisons: tuple
    agg: AggTerm | None
    agg_pos: int | None


@dataclass(frozen=True)
class ValidatedProgram:
    program: Program
    schemas: dict  # name -> Schema (includes reserved id/all)
    rules: tuple  # tuple[ValidatedRule]

    def rels(self, kind: str | None = None, input=None, output=None) -> frozenset:
        out = []
        for s in self.schemas.values():
            if kind is not None and s.kind != kind:
                continue
            if input is not None and s.is_input != input:
                continue
            if output is not None and s.is_output != output:
                continue
            out.append(s.name)
        return frozenset(out)

    @property
    def channel_rels(self) -> frozenset:
        return self.rels(kind="channel")

    @property
    def input_rels(self) -> frozenset:
        return self.rels(input=True)

    @property
    def output_rels(self) -> frozenset:
        return self.rels(output=True)

    @property
    def derived_rels(self) -> frozenset:
        return frozenset(r.rule.head.relation for r in self.rules)


def _reserved_schemas() -> dict:
    addr_col = (ColSpec("a", "addr"),)
    return {
        "id": Schema("id", addr_col, "persisted", reserved=True),
        "all": Schema("all", addr_col, "persisted", reserved=True),
    }


def _check_decl(d: RelDecl, filename: str) -> Schema:
    if d.name in RESERVED_RELATIONS:
        raise ValidationError(
            f"relation name {d.name!r} is reserved", d.pos, filename
        )
    if d.channel:
        if not d.cols or d.cols[0].role != "addr":
            raise ValidationError(
                f"channel relation {d.name} needs an address-typed first column "
                f"(write it as @{d.cols[0].name if d.cols else 'dest'})",
                d.pos,
                filename,
            )
        if d.is_input or d.is_output:
            raise ValidationError(
                f"channel relation {d.name} cannot be marked input or output",
                d.pos,
                filename,
            )
    if d.persistence == "event" and (d.is_input or d.is_output):
        raise ValidationError(
            f"event relation {d.name} cannot be marked input or output "
            "(fixture facts and quiescent reads need persisted state)",
            d.pos,
            filename,
        )
    has_lattice = any(c.lattice for c in d.cols)
    if has_lattice and (d.channel or d.persistence == "event"):
        raise ValidationError(
            f"relation {d.name}: lattice columns are only allowed in persisted relations",
            d.pos,
            filename,
        )
    kind = "channel" if d.channel else d.persistence
    return Schema(d.name, d.cols, kind, d.is_input, d.is_output)


def _check_const_for_col(value, col: ColSpec, rel: str, pos, filename: str) -> None:
    if col.role == "addr":
        if not isinstance(value, Address):
            raise ValidationError(
                f"column {col.name} of {rel} holds machine addresses", pos, filename
            )
    elif isinstance(value, Address):
        raise ValidationError(
            f"column {col.name} of {rel} is not an address column", pos, filename
        )


def _check_literal_against_schema(
    lit: Literal, schema: Schema, head: bool, filename: str
) -> None:
    if len(lit.args) != schema.arity:
        raise ValidationError(
            f"{lit.relation} has arity {schema.arity}, used with {len(lit.args)} argument(s)",
            lit.pos,
            filename,
        )
    for i, arg in enumerate(lit.args):
        col = schema.cols[i]
        if isinstance(arg, Const):
            _check_const_for_col(arg.value, col, lit.relation, arg.pos, filename)
            if col.lattice:
                raise ValidationError(
                    f"column {col.name} of {lit.relation} is a {col.lattice} lattice column; "
                    "use a variable or a lattice constructor",
                    arg.pos,
                    filename,
                )
        elif isinstance(arg, LATTICE_TERM_TYPES):
            if not head:
                raise ValidationError(
                    "lattice constructors are only allowed in rule heads", arg.pos, filename
                )
            if col.lattice is None:
                raise ValidationError(
                    f"column {col.name} of {lit.relation} is not a lattice column",
                    arg.pos,
                    filename,
                )
            want = _LATTICE_OF_TERM[type(arg)]
            if want != col.lattice:
                raise ValidationError(
                    f"column {col.name} of {lit.relation} is {col.lattice}, "
                    f"constructor builds {want}",
                    arg.pos,
                    filename,
                )
        elif isinstance(arg, AggTerm):
            if not head:
                raise ValidationError(
                    "aggregates may appear in rule heads only", arg.pos, filename
                )
            if col.lattice:
                raise ValidationError(
                    f"aggregate cannot target lattice column {col.name}", arg.pos, filename
                )


def _validate_rule(rule: Rule, index: int, schemas: dict, filename: str) -> ValidatedRule:
    head = rule.head
    if head.relation not in schemas:
        raise ValidationError(f"undeclared relation {head.relation}", head.pos, filename)
    head_schema = schemas[head.relation]
    if head_schema.reserved:
        raise ValidationError(
            f"cannot derive into reserved relation {head.relation}", head.pos, filename
        )
    _check_literal_against_schema(head, head_schema, head=True, filename=filename)

    aggs = [(i, a) for i, a in enumerate(head.args) if isinstance(a, AggTerm)]
    if len(aggs) > 1:
        raise ValidationError("at most one aggregate per rule head", head.pos, filename)
    agg_pos, agg = aggs[0] if aggs else (None, None)

    for a in head.args:
        if isinstance(a, Wildcard):
            raise ValidationError("wildcard not allowed in rule head", a.pos, filename)

    positives: list[Literal] = []
    negations: list[Negation] = []
    comparisons: list[Comparison] = []
    for elem in rule.body:
        if isinstance(elem, Literal):
            positives.append(elem)
        elif isinstance(elem, Negation):
            negations.append(elem)
        else:
            comparisons.append(elem)

    for lit in positives + [n.literal for n in negations]:
        if lit.relation not in schemas:
            raise ValidationError(f"undeclared relation {lit.relation}", lit.pos, filename)
        _check_literal_against_schema(lit, schemas[lit.relation], head=False, filename=filename)

    for n in negations:
        schema = schemas[n.literal.relation]
        if schema.lattice_cols:
            raise ValidationError(
                f"relation {n.literal.relation} has lattice columns and cannot "
                "appear under negation",
                n.pos,
                filename,
            )

    bound: set[str] = set()
    for lit in positives:
        bound.update(v.name for v in literal_vars(lit))

    # range restriction: head variables come from positive body literals
    head_var_names = []
    for i, a in enumerate(head.args):
        if i == agg_pos:
            continue
        head_var_names.extend(v.name for v in term_vars(a))
    for a in head.args:
        for v in term_vars(a):
            if v.name not in bound:
                raise ValidationError(
                    f"head variable {v.name} does not appear in a positive body literal",
                    v.pos,
                    filename,
                )
    if agg is not None and agg.var.name in head_var_names:
        raise ValidationError(
            f"aggregate variable {agg.var.name} also appears as a grouping term",
            agg.pos,
            filename,
        )
    if not rule.body:
        for a in head.args:
            if term_vars(a):
                raise ValidationError(
                    "ground-fact rule head must not contain variables", head.pos, filename
                )

    for n in negations:
        for v in literal_vars(n.literal):
            if v.name not in bound:
                raise ValidationError(
                    f"variable {v.name} under negation is not bound by a positive literal",
                    v.pos,
                    filename,
                )
    for c in comparisons:
        for side in (c.left, c.right):
            for v in term_vars(side):
                if v.name not in bound:
                    raise ValidationError(
                        f"variable {v.name} in comparison is not bound by a positive literal",
                        v.pos,
                        filename,
                    )
            if isinstance(side, LATTICE_TERM_TYPES + (AggTerm,)):
                raise ValidationError(
                    "comparisons operate on scalar terms", c.pos, filename
                )

    # evaluation plan: join positives in source order, attach each filter
    # at the earliest point where its variables are bound
    plan: list = []
    pending = [*negations, *comparisons]
    seen: set[str] = set()

    def attach_ready() -> None:
        nonlocal pending
        still = []
        for f in pending:
            vars_ = (
                literal_vars(f.literal)
                if isinstance(f, Negation)
                else [v for s in (f.left, f.right) for v in term_vars(s)]
            )
            if all(v.name in seen for v in vars_):
                plan.append(f)
            else:
                still.append(f)
        pending = still

    attach_ready()
    for lit in positives:
        plan.append(lit)
        seen.update(v.name for v in literal_vars(lit))
        attach_ready()
    assert not pending, "safety checks above guarantee filters become bound"

    return ValidatedRule(
        rule=rule,
        index=index,
        plan=tuple(plan),
        positives=tuple(positives),
        negations=tuple(negations),
        comparisons=tuple(comparisons),
        agg=agg,
        agg_pos=agg_pos,
    )


def validate_program(program: Program) -> ValidatedProgram:
    """Run all safety/arity/channel/lattice checks; raises ValidationError."""
    filename = program.filename
    schemas = _reserved_schemas()
    for d in program.decls:
        schemas[d.name] = _check_decl(d, filename)
    rules = tuple(
        _validate_rule(r, i, schemas, filename) for i, r in enumerate(program.rules)
    )
    return ValidatedProgram(program=program, schemas=schemas, rules=rules)
