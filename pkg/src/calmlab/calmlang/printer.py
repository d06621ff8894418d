"""Pretty-printer. Reparsing the printed text yields a structurally equal AST."""

from __future__ import annotations

from .syntax import (
    AggTerm,
    BoolOrTerm,
    Comparison,
    Const,
    GSetTerm,
    Literal,
    MaxIntTerm,
    Negation,
    Program,
    RelDecl,
    TwoPTerm,
    Var,
    Wildcard,
)


def term_to_text(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Wildcard):
        return "_"
    if isinstance(t, Const):
        if isinstance(t.value, bool):
            return "true" if t.value else "false"
        return str(t.value)
    if isinstance(t, AggTerm):
        return f"{t.kind}<{t.var.name}>"
    if isinstance(t, GSetTerm):
        return "gset{%s}" % ", ".join(term_to_text(e) for e in t.elems)
    if isinstance(t, MaxIntTerm):
        return f"maxint({term_to_text(t.arg)})"
    if isinstance(t, BoolOrTerm):
        return f"boolor({term_to_text(t.arg)})"
    if isinstance(t, TwoPTerm):
        return "2p{added:{%s}, tomb:{%s}}" % (
            ", ".join(term_to_text(e) for e in t.added),
            ", ".join(term_to_text(e) for e in t.tombstoned),
        )
    raise TypeError(f"unknown term {t!r}")


def literal_to_text(lit: Literal) -> str:
    return "%s(%s)" % (lit.relation, ", ".join(term_to_text(a) for a in lit.args))


def body_elem_to_text(e) -> str:
    if isinstance(e, Negation):
        return "!" + literal_to_text(e.literal)
    if isinstance(e, Comparison):
        return f"{term_to_text(e.left)} {e.op} {term_to_text(e.right)}"
    return literal_to_text(e)


def rule_to_text(r) -> str:
    if not r.body:
        return literal_to_text(r.head) + "."
    return "%s :- %s." % (
        literal_to_text(r.head),
        ", ".join(body_elem_to_text(e) for e in r.body),
    )


def decl_to_text(d: RelDecl) -> str:
    cols = []
    for c in d.cols:
        if c.role == "addr":
            cols.append("@" + c.name)
        elif c.lattice:
            cols.append(f"{c.name}: {c.lattice}")
        else:
            cols.append(c.name)
    quals = []
    if not d.channel and d.persistence == "event":
        quals.append("event")
    if d.is_input:
        quals.append("input")
    if d.is_output:
        quals.append("output")
    kw = "chan" if d.channel else "rel"
    text = "%s %s(%s)" % (kw, d.name, ", ".join(cols))
    if quals:
        text += " [%s]" % ", ".join(quals)
    return text


def program_to_text(p: Program) -> str:
    lines = [decl_to_text(d) for d in p.decls]
    if p.decls and p.rules:
        lines.append("")
    lines.extend(rule_to_text(r) for r in p.rules)
    return "\n".join(lines) + "\n"
