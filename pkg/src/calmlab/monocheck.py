"""Static monotonicity analysis.

Classification is purely syntactic and deliberately conservative: a rule is
monotone iff it has no negated literal, no aggregate, and does not read the
reserved network-membership relation ``all``. Semantic monotonicity behind
non-monotone syntax is out of scope, so false "non-monotone" verdicts are
possible but false "monotone" verdicts are not.

Reading ``id`` (the machine's own address) is surfaced as a flag and does not
affect the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calmlang import ValidatedProgram, ValidatedRule
from .calmlang.printer import rule_to_text

REASON_NEGATION = "negation"
REASON_AGGREGATION = "aggregation"
REASON_MEMBERSHIP = "membership-query"

SCHEMA_VERSION = 1


class UnstratifiableError(Exception):
    def __init__(self, cycle: tuple):
        self.cycle = cycle
        super().__init__(
            "program is unstratifiable: cycle through negation/aggregation: "
            + " -> ".join(cycle + (cycle[0],))
        )


@dataclass(frozen=True)
class MonotonicityClass:
    reasons: frozenset  # subset of the three reason strings

    @property
    def monotone(self) -> bool:
        return not self.reasons

    def __str__(self) -> str:
        if self.monotone:
            return "monotone"
        return "non-monotone{%s}" % ",".join(sorted(self.reasons))


@dataclass(frozen=True)
class DepEdge:
    head: str
    body: str
    kind: str  # positive | negative | aggregate


@dataclass(frozen=True)
class CoordinationPoint:
    rule_index: int
    line: int
    col: int
    kind: str  # negation | aggregation | membership-query
    detail: str


@dataclass(frozen=True)
class AnalysisReport:
    program_monotone: bool
    rule_classes: tuple  # tuple[MonotonicityClass]
    dependency_graph: tuple  # tuple[DepEdge]
    strata: dict | None  # relation -> stratum, None if unstratifiable
    unstratifiable_cycle: tuple | None
    coordination_points: tuple  # tuple[CoordinationPoint]
    uses_all: bool
    uses_id: bool

    def to_obj(self, vp: ValidatedProgram) -> dict:
        rules = []
        for r, cls in zip(vp.rules, self.rule_classes):
            rules.append(
                {
                    "index": r.index,
                    "rule": rule_to_text(r.rule),
                    "line": r.rule.pos[0],
                    "class": "monotone" if cls.monotone else "non-monotone",
                    "reasons": sorted(cls.reasons),
                    "reads_id": _reads(r, "id"),
                    "reads_all": _reads(r, "all"),
                }
            )
        return {
            "schema_version": SCHEMA_VERSION,
            "verdict": "monotone" if self.program_monotone else "non-monotone",
            "rules": rules,
            "dependency_graph": [
                {"head": e.head, "body": e.body, "kind": e.kind}
                for e in sorted(
                    self.dependency_graph, key=lambda e: (e.head, e.body, e.kind)
                )
            ],
            "strata": dict(sorted(self.strata.items())) if self.strata is not None else None,
            "unstratifiable_cycle": (
                list(self.unstratifiable_cycle) if self.unstratifiable_cycle else None
            ),
            "coordination_points": [
                {
                    "rule_index": p.rule_index,
                    "line": p.line,
                    "col": p.col,
                    "kind": p.kind,
                    "detail": p.detail,
                }
                for p in self.coordination_points
            ],
            "uses_all": self.uses_all,
            "uses_id": self.uses_id,
        }


def _reads(rule: ValidatedRule, rel: str) -> bool:
    if any(lit.relation == rel for lit in rule.positives):
        return True
    return any(n.literal.relation == rel for n in rule.negations)


def classify_rule(rule: ValidatedRule) -> MonotonicityClass:
    """Syntactic classification of a single validated rule."""
    reasons = set()
    if rule.negations:
        reasons.add(REASON_NEGATION)
    if rule.agg is not None:
        reasons.add(REASON_AGGREGATION)
    if _reads(rule, "all"):
        reasons.add(REASON_MEMBERSHIP)
    return MonotonicityClass(frozenset(reasons))


def dependency_graph(vp: ValidatedProgram) -> tuple:
    """Edges head -> body relation, labeled positive/negative/aggregate.

    Every body dependency of an aggregate rule is strict (the aggregate needs
    its input complete), as is every negated dependency.
    """
    edges = set()
    for r in vp.rules:
        strict_all = r.agg is not None
        for lit in r.positives:
            kind = "aggregate" if strict_all else "positive"
            edges.add(DepEdge(r.rule.head.relation, lit.relation, kind))
        for n in r.negations:
            edges.add(DepEdge(r.rule.head.relation, n.literal.relation, "negative"))
    return tuple(sorted(edges, key=lambda e: (e.head, e.body, e.kind)))


def _find_strict_cycle(edges) -> tuple | None:
    """Return a relation cycle containing a strict edge, if one exists."""
    adj: dict[str, list] = {}
    for e in edges:
        adj.setdefault(e.head, []).append(e)
        adj.setdefault(e.body, [])

    # Tarjan SCCs, then look for a strict edge inside an SCC.
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[frozenset] = []
    counter = [0]

    def strongconnect(v: str) -> None:
        work = [(v, iter(sorted(adj[v], key=lambda e: e.body)))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for e in it:
                w = e.body
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(adj[w], key=lambda e2: e2.body))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == node:
                        break
                sccs.append(frozenset(comp))

    for v in sorted(adj):
        if v not in index:
            strongconnect(v)

    scc_of = {v: comp for comp in sccs for v in comp}
    for e in sorted(edges, key=lambda e: (e.head, e.body)):
        if e.kind in ("negative", "aggregate") and scc_of[e.head] is scc_of[e.body]:
            # reconstruct a short cycle head -> body -> ... -> head inside the SCC
            comp = scc_of[e.head]
            path = _shortest_path(e.body, e.head, adj, comp)
            if path:
                return tuple([e.head] + path[:-1])
            return (e.head, e.body)
    return None


def _shortest_path(src: str, dst: str, adj: dict, comp: frozenset) -> list | None:
    from collections import deque

    prev: dict[str, str | None] = {src: None}
    q = deque([src])
    while q:
        v = q.popleft()
        if v == dst:
            path = []
            node: str | None = v
            while node is not None:
                path.append(node)
                node = prev[node]
            path.reverse()
            return path
        for e in sorted(adj[v], key=lambda e: e.body):
            w = e.body
            if w in comp and w not in prev:
                prev[w] = v
                q.append(w)
    return None


def stratify(vp: ValidatedProgram) -> list:
    """Layer predicates so strict dependencies point strictly downward.

    Returns a list of strata, each a sorted list of relation names; every
    relation read or derived by the program appears in exactly one stratum,
    at the lowest level possible. Raises UnstratifiableError on a cycle
    through negation or aggregation.
    """
    edges = dependency_graph(vp)
    cycle = _find_strict_cycle(edges)
    if cycle is not None:
        raise UnstratifiableError(cycle)

    rels = set()
    for r in vp.rules:
        rels.add(r.rule.head.relation)
        for lit in r.positives:
            rels.add(lit.relation)
        for n in r.negations:
            rels.add(n.literal.relation)
    stratum = {rel: 0 for rel in rels}
    changed = True
    guard = 0
    while changed:
        changed = False
        guard += 1
        assert guard <= len(rels) + 2, "stratification did not converge"
        for e in edges:
            need = stratum[e.body] + (1 if e.kind in ("negative", "aggregate") else 0)
            if stratum[e.head] < need:
                stratum[e.head] = need
                changed = True
    height = max(stratum.values(), default=0)
    return [
        sorted(rel for rel, s in stratum.items() if s == level)
        for level in range(height + 1)
    ]


def stratum_map(vp: ValidatedProgram) -> dict:
    return {rel: i for i, layer in enumerate(stratify(vp)) for rel in layer}


def analyze_program(vp: ValidatedProgram) -> AnalysisReport:
    """Full static report: per-rule classes, dependencies, strata, flags."""
    classes = tuple(classify_rule(r) for r in vp.rules)
    edges = dependency_graph(vp)
    points = []
    uses_all = False
    uses_id = False
    for r in vp.rules:
        if _reads(r, "id"):
            uses_id = True
        for n in r.negations:
            points.append(
                CoordinationPoint(
                    r.index, n.pos[0], n.pos[1], REASON_NEGATION,
                    f"negated literal !{n.literal.relation}",
                )
            )
        if r.agg is not None:
            points.append(
                CoordinationPoint(
                    r.index, r.agg.pos[0], r.agg.pos[1], REASON_AGGREGATION,
                    f"{r.agg.kind} aggregate",
                )
            )
        for lit in r.positives:
            if lit.relation == "all":
                uses_all = True
                points.append(
                    CoordinationPoint(
                        r.index, lit.pos[0], lit.pos[1], REASON_MEMBERSHIP,
                        "reads network membership relation all",
                    )
                )
        for n in r.negations:
            if n.literal.relation == "all":
                uses_all = True

    strata = None
    cycle = None
    try:
        strata = stratum_map(vp)
    except UnstratifiableError as e:
        cycle = e.cycle

    return AnalysisReport(
        program_monotone=all(c.monotone for c in classes),
        rule_classes=classes,
        dependency_graph=edges,
        strata=strata,
        unstratifiable_cycle=cycle,
        coordination_points=tuple(
            sorted(points, key=lambda p: (p.rule_index, p.line, p.col))
        ),
        uses_all=uses_all,
        uses_id=uses_id,
    )
