"""Single-machine relational transducer: the Ingest -> Query -> Send loop.

The Query phase is a stratified, semi-naive fixpoint over the machine's
local database. Relations behave by persistence class:

* persisted relations accumulate across iterations and never shrink during
  a run; derived facts with lattice columns merge into the stored fact that
  matches on every scalar column;
* event relations are scratch space, visible within the iteration that
  derived them and cleared afterwards;
* channel relations are special events: a channel literal in a rule body
  matches only facts delivered in this iteration's inbox, and a channel head
  buffers facts for the Send phase (locally addressed sends come back through
  the inbox on a later iteration, they are never visible early).

A machine's observable step effects (persisted growth, messages offered to
the network) are monotone functions of its history, which is what makes
quiescence detection by no-op probing sound.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import lattices, monocheck
from .calmlang import ValidatedProgram, ValidatedRule
from .calmlang.syntax import (
    AggTerm,
    BoolOrTerm,
    Comparison,
    Const,
    GSetTerm,
    Literal,
    MaxIntTerm,
    Negation,
    TwoPTerm,
    Var,
    Wildcard,
)
from .relspace import Database, Fact
from .values import Address, Int, value_sort_key

DEFAULT_EVAL_BOUND = 10_000


class DivergenceError(Exception):
    """Evaluation exceeded its per-stratum iteration bound."""


class RoutingError(Exception):
    """Inbox or outbound fact cannot be routed (undeclared relation or a
    non-address in a channel's first column)."""


class EvalError(Exception):
    """Runtime typing failure while instantiating a head (e.g. maxint over
    a non-integer binding)."""


# --- query evaluation --------------------------------------------------------


class _Space:
    """Readable/writable fact space for one evaluation run."""

    def __init__(self, vp: ValidatedProgram, persisted: dict, inbox: dict):
        self.vp = vp
        self.channels = vp.channel_rels
        # non-channel relations: persisted contents plus anything derived
        self.facts: dict[str, set] = {r: set(fs) for r, fs in persisted.items()}
        # channel relations: readable side is the inbox only
        self.inbox: dict[str, set] = {r: set(fs) for r, fs in inbox.items()}
        self.outbound: dict[str, set] = {}

    def readable(self, rel: str) -> set:
        if rel in self.channels:
            return self.inbox.get(rel, set())
        return self.facts.get(rel, set())

    def add(self, rel: str, tup: tuple) -> bool:
        """Record a derived tuple; returns True if new."""
        if rel in self.channels:
            bucket = self.outbound.setdefault(rel, set())
        else:
            bucket = self.facts.setdefault(rel, set())
        if tup in bucket:
            return False
        bucket.add(tup)
        return True


def _match_literal(lit: Literal, tup: tuple, env: dict) -> dict | None:
    """Unify a literal's args against a tuple; returns extended env or None."""
    out = env
    for term, val in zip(lit.args, tup):
        if isinstance(term, Wildcard):
            continue
        if isinstance(term, Var):
            bound = out.get(term.name)
            if bound is None:
                if out is env:
                    out = dict(env)
                out[term.name] = val
            elif bound != val:
                return None
        else:  # Const
            if term.value != val:
                return None
    return out


def _eval_term(term, env: dict):
    if isinstance(term, Var):
        return env[term.name]
    if isinstance(term, Const):
        return term.value
    raise EvalError(f"cannot evaluate term {term!r}")


def _scalar(term, env: dict):
    v = _eval_term(term, env)
    if lattices.is_lattice(v):
        raise EvalError("lattice value where a scalar is required")
    return v


def _eval_head_term(term, env: dict):
    if isinstance(term, GSetTerm):
        return lattices.GSet(frozenset(_scalar(e, env) for e in term.elems))
    if isinstance(term, MaxIntTerm):
        v = _scalar(term.arg, env)
        if not isinstance(v, Int):
            raise EvalError(f"maxint() needs an integer, got {v}")
        return lattices.MaxInt(v.value)
    if isinstance(term, BoolOrTerm):
        return lattices.BoolOr(bool(term.arg.value))
    if isinstance(term, TwoPTerm):
        return lattices.TwoPSet(
            frozenset(_scalar(e, env) for e in term.added),
            frozenset(_scalar(e, env) for e in term.tombstoned),
        )
    return _eval_term(term, env)


def _compare(op: str, left, right) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    ka, kb = value_sort_key(left), value_sort_key(right)
    return ka < kb if op == "<" else ka <= kb


def _rule_bindings(rule: ValidatedRule, space: _Space, delta_at: int | None, delta: set):
    """Generate variable environments satisfying the rule body.

    ``delta_at`` picks one positive-literal occurrence (by plan position)
    that must match against ``delta`` instead of the full relation; None
    means a full naive pass.
    """

    plan = rule.plan

    def rec(i: int, env: dict):
        if i == len(plan):
            yield env
            return
        elem = plan[i]
        if isinstance(elem, Literal):
            source = delta if i == delta_at else space.readable(elem.relation)
            for tup in source:
                env2 = _match_literal(elem, tup, env)
                if env2 is not None:
                    yield from rec(i + 1, env2)
        elif isinstance(elem, Negation):
            lit = elem.literal
            if not any(
                _match_literal(lit, tup, env) is not None
                for tup in space.readable(lit.relation)
            ):
                yield from rec(i + 1, env)
        else:  # Comparison
            if _compare(elem.op, _scalar(elem.left, env), _scalar(elem.right, env)):
                yield from rec(i + 1, env)

    yield from rec(0, {})


def _fire_rule(rule: ValidatedRule, space: _Space, delta_at, delta) -> list:
    """Head tuples derivable from the rule under the given delta restriction."""
    head = rule.rule.head
    if rule.agg is None:
        out = []
        for env in _rule_bindings(rule, space, delta_at, delta):
            out.append(tuple(_eval_head_term(t, env) for t in head.args))
        return out
    groups: dict[tuple, set] = {}
    for env in _rule_bindings(rule, space, delta_at, delta):
        key = tuple(
            _eval_head_term(t, env)
            for i, t in enumerate(head.args)
            if i != rule.agg_pos
        )
        groups.setdefault(key, set()).add(env[rule.agg.var.name])
    out = []
    for key, vals in groups.items():
        if rule.agg.kind == "count":
            agg_val = Int(len(vals))
        elif rule.agg.kind == "min":
            agg_val = min(vals, key=value_sort_key)
        else:
            agg_val = max(vals, key=value_sort_key)
        tup = list(key)
        tup.insert(rule.agg_pos, agg_val)
        out.append(tuple(tup))
    return out


# stratification is pure per program; cache it (keyed by identity, the cache
# also keeps the program alive so ids cannot be reused)
_STRATA_CACHE: dict[int, tuple] = {}


def _strata_for(vp: ValidatedProgram) -> dict:
    entry = _STRATA_CACHE.get(id(vp))
    if entry is None or entry[0] is not vp:
        strata = monocheck.stratify(vp)
        stratum_of = {rel: i for i, layer in enumerate(strata) for rel in layer}
        entry = (vp, stratum_of, len(strata))
        _STRATA_CACHE[id(vp)] = entry
    return entry[1]


def _query(
    vp: ValidatedProgram,
    persisted: dict,
    inbox: dict,
    bound: int = DEFAULT_EVAL_BOUND,
) -> _Space:
    """Stratified semi-naive fixpoint. Returns the filled fact space."""
    stratum_of = _strata_for(vp)
    levels = max(stratum_of.values(), default=0) + 1
    space = _Space(vp, persisted, inbox)

    for level in range(levels):
        rules = [
            r for r in vp.rules if stratum_of.get(r.rule.head.relation, 0) == level
        ]
        if not rules:
            continue
        # aggregates within a stratum see only completed lower strata, so an
        # aggregate rule fires once, in the naive round
        delta: dict[str, set] = {}
        for r in rules:
            for tup in _fire_rule(r, space, None, set()):
                if space.add(r.rule.head.relation, tup):
                    delta.setdefault(r.rule.head.relation, set()).add(tup)
        rounds = 0
        while delta:
            rounds += 1
            if rounds > bound:
                raise DivergenceError(
                    f"stratum {level} did not reach a fixpoint within {bound} rounds"
                )
            new_delta: dict[str, set] = {}
            for r in rules:
                if r.agg is not None:
                    continue
                for pos, elem in enumerate(r.plan):
                    if not isinstance(elem, Literal):
                        continue
                    d = delta.get(elem.relation)
                    if not d or elem.relation in vp.channel_rels:
                        continue
                    for tup in _fire_rule(r, space, pos, d):
                        if space.add(r.rule.head.relation, tup):
                            new_delta.setdefault(r.rule.head.relation, set()).add(tup)
            delta = new_delta
    return space


def _db_dict(db: Database) -> dict:
    return {r: set(tuple(f.args) for f in fs) for r, fs in db.relations.items()}


def _to_db(facts: dict) -> Database:
    return Database(
        {
            rel: frozenset(Fact(rel, tup) for tup in tups)
            for rel, tups in facts.items()
            if tups
        }
    )


def evaluate(db: Database, vp: ValidatedProgram, bound: int = DEFAULT_EVAL_BOUND) -> Database:
    """Pure fixpoint of the program over one database, no network.

    Facts of channel relations in ``db`` are treated as this iteration's
    inbox; channel facts in the result are the send buffer the Query phase
    produced. Deterministic, and idempotent on the non-channel portion.
    """
    persisted: dict = {}
    inbox: dict = {}
    for rel, fs in db.relations.items():
        schema = vp.schemas.get(rel)
        if schema is None:
            raise RoutingError(f"fact for undeclared relation {rel}")
        tups = set(tuple(f.args) for f in fs)
        if schema.kind == "channel":
            inbox[rel] = tups
        else:
            persisted[rel] = tups
    space = _query(vp, persisted, inbox, bound)
    merged = dict(space.facts)
    for rel, tups in space.outbound.items():
        merged[rel] = merged.get(rel, set()) | tups
    return _to_db(merged)


def single_machine_output(
    vp: ValidatedProgram, input_db: Database, address: str = "m1"
) -> Database:
    """Output relations computed by one machine holding the whole input."""
    me = Address(address)
    seeded = dict(_db_dict(input_db))
    seeded["id"] = {(me,)}
    seeded["all"] = {(me,)}
    space = _query(vp, seeded, {})
    return _to_db(space.facts).restrict(vp.output_rels)


# --- lattice merge-on-insert -------------------------------------------------


def _fold_lattice(rel: str, tups: set, vp: ValidatedProgram) -> set:
    schema = vp.schemas[rel]
    lat_cols = schema.lattice_cols
    if not lat_cols:
        return tups
    scalar_cols = schema.scalar_cols
    merged: dict[tuple, dict] = {}
    for tup in sorted(tups, key=lambda t: tuple(value_sort_key(v) for v in t)):
        key = tuple(tup[i] for i in scalar_cols)
        slot = merged.setdefault(key, {i: None for i in lat_cols})
        for i in lat_cols:
            cur = slot[i]
            slot[i] = tup[i] if cur is None else lattices.merge(cur, tup[i])
    out = set()
    for key, slot in merged.items():
        tup = [None] * schema.arity
        for pos, v in zip(scalar_cols, key):
            tup[pos] = v
        for pos in lat_cols:
            tup[pos] = slot[pos]
        out.add(tuple(tup))
    return out


# --- the machine -------------------------------------------------------------


@dataclass(frozen=True)
class MachineState:
    address: Address
    persisted: Database
    program: ValidatedProgram
    iteration: int = 0
    # channel facts already offered to the network, as (dest, Fact) pairs;
    # grows monotonically and keeps re-derived messages from resending forever
    sent: frozenset = frozenset()

    def semantic_key(self):
        """State identity for schedule enumeration (iteration excluded)."""
        return (self.address, self.persisted, self.sent)


@dataclass(frozen=True)
class StepResult:
    new_state: MachineState
    outbound: dict  # Address -> frozenset[Fact]
    output_delta: frozenset

    @property
    def quiet(self) -> bool:
        return not self.outbound and not self.output_delta

    def changed(self, old: MachineState) -> bool:
        return bool(self.outbound) or self.new_state.persisted != old.persisted


def init_machine(vp: ValidatedProgram, address: Address, local_input: Database,
                 members: tuple) -> MachineState:
    facts = _db_dict(local_input)
    facts["id"] = {(address,)}
    facts["all"] = {(a,) for a in members}
    return MachineState(address=address, persisted=_to_db(facts), program=vp)


def step(state: MachineState, inbox, bound: int = DEFAULT_EVAL_BOUND) -> StepResult:
    """One Ingest -> Query -> Send iteration. Pure: returns the new state."""
    vp = state.program
    persisted = _db_dict(state.persisted)
    inbox_events: dict[str, set] = {}
    for f in inbox:
        schema = vp.schemas.get(f.relation)
        if schema is None:
            raise RoutingError(f"inbox fact for undeclared relation {f.relation}")
        if schema.kind == "channel":
            inbox_events.setdefault(f.relation, set()).add(tuple(f.args))
        elif schema.is_input:
            persisted.setdefault(f.relation, set()).add(tuple(f.args))
        else:
            raise RoutingError(
                f"inbox fact {f} is neither a channel nor an input relation fact"
            )

    space = _query(vp, persisted, inbox_events, bound)

    new_persisted: dict[str, set] = {}
    for rel, tups in space.facts.items():
        schema = vp.schemas.get(rel)
        if schema is not None and schema.kind == "persisted":
            new_persisted[rel] = _fold_lattice(rel, tups, vp)

    outbound: dict[Address, set] = {}
    sent = set(state.sent)
    for rel, tups in space.outbound.items():
        for tup in tups:
            dest = tup[0]
            if not isinstance(dest, Address):
                raise RoutingError(f"channel fact {rel}{tup} has no address in column 1")
            key = (dest, Fact(rel, tup))
            if key in sent:
                continue
            sent.add(key)
            outbound.setdefault(dest, set()).add(key[1])

    old_out = {
        f
        for rel in vp.output_rels
        for f in state.persisted.relation(rel)
    }
    new_out = {
        Fact(rel, tup)
        for rel in vp.output_rels
        for tup in new_persisted.get(rel, ())
    }

    new_state = MachineState(
        address=state.address,
        persisted=_to_db(new_persisted),
        program=vp,
        iteration=state.iteration + 1,
        sent=frozenset(sent),
    )
    return StepResult(
        new_state=new_state,
        outbound={a: frozenset(fs) for a, fs in sorted(outbound.items(), key=lambda kv: kv[0].name)},
        output_delta=frozenset(new_out - old_out),
    )


def state_dump(state: MachineState) -> dict:
    """Canonical JSON-ready dump of a machine's persisted state."""
    from .relspace import db_to_obj

    return {
        "address": str(state.address),
        "iteration": state.iteration,
        "persisted": db_to_obj(state.persisted),
        "sent": sorted(f"{dest.name}<-{fact}" for dest, fact in state.sent),
    }
