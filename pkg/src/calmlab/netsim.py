"""Deterministic, seed-driven simulator of a transducer network.

A run starts by stepping every machine on its local input, then repeatedly
resolves one nondeterministic choice: pick a machine with pending messages
and deliver a nonempty subset of them (this one primitive realizes both
reordering and batching nondeterminism). Whenever the in-flight set drains,
machines are swept with empty inboxes until none of them changes; if the
sweep emitted new messages the delivery loop resumes, otherwise the network
is quiescent and the output relations are read.

Schedules are either seed-driven (64-bit seed, reproducible) or explicit
decision lists, which replay bit-identically and serve as divergence
witnesses. ``enumerate_schedules`` walks every delivery choice depth-first
with memoization on canonical network states, yielding each reachable
quiescent outcome once.
"""

from __future__ import annotations

import itertools
import random
import zlib
from collections import Counter
from dataclasses import dataclass, field

from .calmlang import ValidatedProgram
from .relspace import Database, db_to_obj, db_union, parse_fact
from .transducer import MachineState, RoutingError, init_machine, state_dump, step
from .values import Address

DEFAULT_STEP_BUDGET = 10_000
DEFAULT_ENUM_BOUND = 1_000_000


class PartitioningError(Exception):
    """Input fact unassigned, assigned twice, or unknown to the fixture."""


class ReplayError(Exception):
    """Explicit schedule decision does not match the pending message set."""


def machine_addresses(m: int) -> tuple:
    return tuple(Address(f"m{i}") for i in range(1, m + 1))


def addresses_in(db: Database) -> frozenset:
    """Machine addresses mentioned by fact arguments (gossip targets etc.).

    A fixture can only run on networks containing all of them: sending to an
    address outside the network is a routing error by design.
    """
    out = set()
    for f in db.facts():
        for a in f.args:
            if isinstance(a, Address):
                out.add(a)
    return frozenset(out)


@dataclass(frozen=True)
class Partitioning:
    machines: tuple  # tuple[Address]
    assignment: dict  # Fact -> Address

    def describe(self) -> dict:
        by_machine: dict[str, list] = {str(a): [] for a in self.machines}
        for fact, addr in self.assignment.items():
            by_machine[str(addr)].append(str(fact))
        return {m: sorted(fs) for m, fs in sorted(by_machine.items())}


def colocated(input_db: Database, machines: tuple, at: Address) -> Partitioning:
    if at not in machines:
        raise PartitioningError(f"machine {at} not in the network")
    return Partitioning(machines, {f: at for f in input_db.facts()})


def hash_partitioning(input_db: Database, machines: tuple) -> Partitioning:
    assignment = {}
    for f in input_db.facts():
        h = zlib.crc32(str(f).encode("utf-8"))
        assignment[f] = machines[h % len(machines)]
    return Partitioning(machines, assignment)


def partitioning_from_map(input_db: Database, machines: tuple, mapping: dict) -> Partitioning:
    """mapping: machine name -> list of fact strings (fixture syntax)."""
    by_addr = {a.name: a for a in machines}
    assignment: dict = {}
    for mname, fact_strs in mapping.items():
        if mname.lstrip("@") not in by_addr:
            raise PartitioningError(f"unknown machine {mname!r} in partitioning map")
        addr = by_addr[mname.lstrip("@")]
        for s in fact_strs:
            f = parse_fact(s)
            if f in assignment:
                raise PartitioningError(f"fact {f} assigned to more than one machine")
            assignment[f] = addr
    for f in input_db.facts():
        if f not in assignment:
            raise PartitioningError(f"input fact {f} not assigned to any machine")
    for f in assignment:
        if f not in input_db:
            raise PartitioningError(f"assigned fact {f} is not in the input fixture")
    return Partitioning(machines, assignment)


def enumerate_partitionings(
    input_db: Database, m: int, cap: int = 64, seed: int = 0
) -> list:
    """All assignments of input facts to m machines when their count is
    within cap; otherwise the m colocated variants plus seeded samples."""
    machines = machine_addresses(m)
    facts = list(input_db.facts())
    total = m ** len(facts)
    if total <= cap:
        out = []
        for combo in itertools.product(range(m), repeat=len(facts)):
            out.append(
                Partitioning(machines, {f: machines[i] for f, i in zip(facts, combo)})
            )
        return out
    rng = random.Random(seed)
    out = [colocated(input_db, machines, a) for a in machines]
    seen = {tuple(p.assignment[f].name for f in facts) for p in out}
    while len(out) < cap:
        combo = tuple(rng.randrange(m) for _ in facts)
        key = tuple(machines[i].name for i in combo)
        if key in seen:
            continue
        seen.add(key)
        out.append(
            Partitioning(machines, {f: machines[i] for f, i in zip(facts, combo)})
        )
    return out


# --- schedules ---------------------------------------------------------------

# one message in flight: (src address, dst address, fact)
Envelope = tuple


@dataclass(frozen=True)
class Schedule:
    """Either a seed for pseudo-random choices or an explicit decision list.

    A decision is (machine name, tuple of envelope keys); each envelope key
    is (src name, fact string). Decision lists replay bit-identically.
    The at-least-once toggle only applies to seeded schedules: a duplicated
    run's decisions under-specify the duplication points, so witnesses and
    enumeration paths are always recorded with duplication off (the
    default)."""

    seed: int | None = None
    decisions: tuple | None = None
    duplicate_every: int = 0  # at-least-once toggle: 0 = off

    def to_obj(self):
        if self.decisions is not None:
            return {
                "decisions": [
                    [dst, [[src, fact] for src, fact in keys]]
                    for dst, keys in self.decisions
                ]
            }
        return {"seed": self.seed, "duplicate_every": self.duplicate_every}

    @staticmethod
    def from_obj(obj) -> "Schedule":
        if "decisions" in obj:
            return Schedule(
                decisions=tuple(
                    (dst, tuple((src, fact) for src, fact in keys))
                    for dst, keys in obj["decisions"]
                )
            )
        return Schedule(seed=obj.get("seed", 0), duplicate_every=obj.get("duplicate_every", 0))


@dataclass
class NetworkState:
    machines: dict  # Address -> MachineState
    pending: Counter  # Envelope -> count
    trace: list = field(default_factory=list)  # (src, dst, fact, step_index)
    steps: int = 0

    def semantic_key(self):
        return (
            tuple(self.machines[a].semantic_key() for a in sorted(self.machines, key=lambda x: x.name)),
            frozenset(self.pending.items()),
        )


@dataclass(frozen=True)
class RunOutcome:
    per_machine_outputs: dict  # machine name -> Database
    union_output: Database
    trace: tuple  # ((src, dst, fact_str, step), ...)
    quiesced: bool
    steps_used: int
    message_count: int  # inter-machine deliveries (src != dst)
    decisions: tuple  # resolved schedule, replayable

    def to_obj(self) -> dict:
        return {
            "schema_version": 1,
            "quiesced": self.quiesced,
            "steps_used": self.steps_used,
            "message_count": self.message_count,
            "union_output": db_to_obj(self.union_output),
            "per_machine_outputs": {
                m: db_to_obj(db) for m, db in sorted(self.per_machine_outputs.items())
            },
            "trace": [list(entry) for entry in self.trace],
            "schedule": {
                "decisions": [
                    [dst, [[src, fact] for src, fact in keys]]
                    for dst, keys in self.decisions
                ]
            },
        }


def init_network(vp: ValidatedProgram, input_db: Database, part: Partitioning) -> NetworkState:
    """Machines hold their assigned input facts plus id/all; nothing pending."""
    for f in input_db.facts():
        if f not in part.assignment:
            raise PartitioningError(f"input fact {f} not assigned to any machine")
        if not vp.schemas.get(f.relation) or not vp.schemas[f.relation].is_input:
            raise PartitioningError(
                f"fixture fact {f} is not in an input-marked relation"
            )
    for f in part.assignment:
        if f not in input_db:
            raise PartitioningError(f"assigned fact {f} is not in the input fixture")
    machines = {}
    for a in part.machines:
        local = Database.from_facts(
            f for f, addr in part.assignment.items() if addr == a
        )
        machines[a] = init_machine(vp, a, local, part.machines)
    return NetworkState(machines=machines, pending=Counter())


def _enqueue(state: NetworkState, src: Address, outbound: dict) -> None:
    for dst, facts in outbound.items():
        if dst not in state.machines:
            raise RoutingError(f"message addressed to unknown machine {dst}")
        for f in facts:
            state.pending[(src, dst, f)] += 1


def _sweep(state: NetworkState, budget: int) -> bool:
    """Step every machine with an empty inbox until none changes.

    This both seeds derivations from local input at run start and settles
    event-dependent rules once a machine's inbox has drained. Machine step
    effects grow monotonically (persisted state and sent-cache only grow),
    so the sweep terminates. Returns False if the budget ran out. No-op
    steps are not committed, keeping enumeration state keys canonical.
    """
    while True:
        any_change = False
        for a in sorted(state.machines, key=lambda x: x.name):
            if state.steps >= budget:
                return False
            m = state.machines[a]
            res = step(m, ())
            state.steps += 1
            if res.changed(m):
                state.machines[a] = res.new_state
                _enqueue(state, a, res.outbound)
                any_change = True
        if not any_change:
            return True


class _SeededChooser:
    def __init__(self, seed: int, duplicate_every: int = 0):
        self.rng = random.Random(seed)
        self.duplicate_every = duplicate_every
        self.deliveries = 0
        self._dup_done = 0

    def choose(self, pending: Counter) -> tuple:
        dsts = sorted({dst.name for (_, dst, _) in pending})
        dst = self.rng.choice(dsts)
        keys = sorted(
            [env for env in pending if env[1].name == dst],
            key=lambda env: (env[0].name, str(env[2])),
        )
        chosen = [env for env in keys if self.rng.random() < 0.5]
        if not chosen:
            chosen = [keys[self.rng.randrange(len(keys))]]
        self.deliveries += len(chosen)
        return dst, chosen

    def maybe_duplicate(self, pending: Counter) -> None:
        if not self.duplicate_every or not pending:
            return
        if self.deliveries // self.duplicate_every > self._dup_done:
            self._dup_done += 1
            envs = sorted(pending, key=lambda env: (env[1].name, env[0].name, str(env[2])))
            env = envs[self.rng.randrange(len(envs))]
            pending[env] += 1


class _ReplayChooser:
    def __init__(self, decisions: tuple):
        self.decisions = list(decisions)

    def choose(self, pending: Counter) -> tuple:
        if not self.decisions:
            raise ReplayError("schedule exhausted while messages are still pending")
        dst_name, keys = self.decisions.pop(0)
        if len({tuple(k) for k in keys}) != len(keys):
            raise ReplayError("decision lists the same message twice in one batch")
        by_key = {}
        for env in pending:
            if env[1].name == dst_name:
                by_key[(env[0].name, str(env[2]))] = env
        chosen = []
        for key in keys:
            env = by_key.get(tuple(key))
            if env is None or pending[env] < 1:
                raise ReplayError(
                    f"decision delivers {key} to {dst_name} but it is not pending"
                )
            chosen.append(env)
        if not chosen:
            raise ReplayError("decision delivers an empty batch")
        return dst_name, chosen

    def maybe_duplicate(self, pending: Counter) -> None:
        pass


def run_schedule(
    initial: NetworkState,
    schedule: Schedule,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> RunOutcome:
    """Run to quiescence (or budget); same schedule => bit-identical outcome."""
    state = NetworkState(
        machines=dict(initial.machines),
        pending=Counter(initial.pending),
    )
    if schedule.decisions is not None:
        chooser = _ReplayChooser(schedule.decisions)
    else:
        chooser = _SeededChooser(schedule.seed or 0, schedule.duplicate_every)

    decisions: list = []
    message_count = 0
    quiesced = False

    ok = _sweep(state, step_budget)
    while ok:
        if not state.pending:
            quiesced = True
            break
        dst_name, chosen = chooser.choose(state.pending)
        addr = next((a for a in state.machines if a.name == dst_name), None)
        if addr is None:
            raise ReplayError(f"decision names unknown machine {dst_name!r}")
        inbox = []
        keys = []
        for env in sorted(chosen, key=lambda e: (e[0].name, str(e[2]))):
            src, dst, fact = env
            state.pending[env] -= 1
            if state.pending[env] <= 0:
                del state.pending[env]
            inbox.append(fact)
            keys.append((src.name, str(fact)))
            state.trace.append((src.name, dst.name, str(fact), state.steps))
            if src != dst:
                message_count += 1
        decisions.append((dst_name, tuple(keys)))
        m = state.machines[addr]
        res = step(m, inbox)
        state.steps += 1
        state.machines[addr] = res.new_state
        _enqueue(state, addr, res.outbound)
        chooser.maybe_duplicate(state.pending)
        if state.steps >= step_budget:
            ok = False
            break
        if not state.pending:
            ok = _sweep(state, step_budget)

    per_machine = {
        a.name: m.persisted.restrict(m.program.output_rels)
        for a, m in state.machines.items()
    }
    union = Database({})
    for db in per_machine.values():
        union = db_union(union, db)
    return RunOutcome(
        per_machine_outputs=per_machine,
        union_output=union,
        trace=tuple(state.trace),
        quiesced=quiesced and ok,
        steps_used=state.steps,
        message_count=message_count,
        decisions=tuple(decisions),
    )


# --- exhaustive schedule enumeration ------------------------------------------


@dataclass(frozen=True)
class EnumOutcome:
    union_output: Database
    per_machine_outputs: dict
    decisions: tuple  # replayable path that reached this outcome


@dataclass
class EnumerationResult:
    outcomes: list  # distinct quiescent outcomes, first-found order
    complete: bool  # False if the state bound cut the walk short
    states_explored: int

    @property
    def distinct_outputs(self) -> int:
        return len(self.outcomes)


def _nonempty_subsets(envs: list):
    """All nonempty subsets, larger batches first (fair-delivery bias)."""
    for k in range(len(envs), 0, -1):
        yield from itertools.combinations(envs, k)


def enumerate_schedules(
    initial: NetworkState,
    bound: int = DEFAULT_ENUM_BOUND,
    step_budget: int = DEFAULT_STEP_BUDGET,
    stop_after_distinct: int | None = None,
) -> EnumerationResult:
    """Depth-first walk of every (machine, inbox-subset) delivery choice,
    deduplicated by canonical network state."""

    step_memo: dict = {}

    def memo_step(mstate: MachineState, inbox: tuple):
        key = (mstate.semantic_key(), inbox)
        res = step_memo.get(key)
        if res is None:
            res = step(mstate, [f for (_, f) in inbox])
            step_memo[key] = res
        return res

    outcomes: dict = {}  # union-output Database -> EnumOutcome
    ordered: list = []
    memo: dict = {}  # state key -> frozenset of output keys below it
    counters = {"states": 0, "truncated": False}

    def settle(state: NetworkState) -> NetworkState | None:
        """Run the empty-inbox sweep; None if the step budget ran out."""
        if _sweep(state, step_budget):
            return state
        counters["truncated"] = True
        return None

    def record(state: NetworkState, path: tuple) -> frozenset:
        per_machine = {
            a.name: m.persisted.restrict(m.program.output_rels)
            for a, m in state.machines.items()
        }
        union = Database({})
        for db in per_machine.values():
            union = db_union(union, db)
        # outcomes are keyed by the union output: that is the observable the
        # confluence question compares
        if union not in outcomes:
            outcomes[union] = EnumOutcome(union, per_machine, path)
            ordered.append(outcomes[union])
        return frozenset([union])

    def explore(state: NetworkState, path: tuple) -> frozenset:
        if not state.pending:
            settled = settle(state)
            if settled is None:
                return frozenset()
            state = settled
            if not state.pending:
                return record(state, path)
        skey = state.semantic_key()
        hit = memo.get(skey)
        if hit is not None:
            return hit
        counters["states"] += 1
        if counters["states"] > bound:
            counters["truncated"] = True
            return frozenset()
        found: set = set()
        dsts = sorted({dst for (_, dst, _) in state.pending}, key=lambda a: a.name)
        for dst in dsts:
            envs = sorted(
                (env for env in state.pending if env[1] == dst),
                key=lambda env: (env[0].name, str(env[2])),
            )
            for subset in _nonempty_subsets(envs):
                if stop_after_distinct and len(outcomes) >= stop_after_distinct:
                    break
                m = state.machines[dst]
                res = memo_step(m, tuple((env[0], env[2]) for env in subset))
                child = NetworkState(
                    machines={**state.machines, dst: res.new_state},
                    pending=Counter(state.pending),
                    steps=state.steps + 1,
                )
                for env in subset:
                    child.pending[env] -= 1
                    if child.pending[env] <= 0:
                        del child.pending[env]
                _enqueue(child, dst, res.outbound)
                decision = (dst.name, tuple((env[0].name, str(env[2])) for env in subset))
                found |= explore(child, path + (decision,))
            if stop_after_distinct and len(outcomes) >= stop_after_distinct:
                break
        memo[skey] = frozenset(found)
        return memo[skey]

    start = NetworkState(machines=dict(initial.machines), pending=Counter(initial.pending))
    explore(start, ())
    complete = not counters["truncated"] and not (
        stop_after_distinct and len(outcomes) >= stop_after_distinct
    )
    return EnumerationResult(
        outcomes=ordered, complete=complete, states_explored=counters["states"]
    )


def network_dump(state: NetworkState) -> dict:
    return {
        "machines": [state_dump(state.machines[a]) for a in sorted(state.machines, key=lambda x: x.name)],
        "pending": sorted(
            f"{src.name}->{dst.name}: {fact}" for (src, dst, fact), n in state.pending.items() for _ in range(n)
        ),
        "steps": state.steps,
    }
