"""Dynamic verdict engines: confluence across schedules, coordination across
partitionings, output diffing with witness extraction.

All verdicts are instance-level. Dynamic evidence never upgrades to a
program-level claim: a single divergence witness refutes confluence on the
instance, but agreeing runs only establish "confluent on this instance under
the explored schedules" (exhaustive mode explores all of them). The static,
conservative program-level claim is monocheck's job.

Coordination is operationalized as the minimum inter-machine message count
over explored schedules; a program needs coordination on an instance when
even the partitionings that co-locate all data at a single machine cannot
quiesce without messages.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calmlang import ValidatedProgram
from .netsim import (
    DEFAULT_ENUM_BOUND,
    DEFAULT_STEP_BUDGET,
    Partitioning,
    RunOutcome,
    Schedule,
    colocated,
    enumerate_partitionings,
    enumerate_schedules,
    init_network,
    machine_addresses,
    run_schedule,
)
from .relspace import Database, db_to_obj

OUTCOME_CONFLUENT = "confluent-on-instance"
OUTCOME_DIVERGENT = "divergent"
OUTCOME_INCONCLUSIVE = "inconclusive"

VERDICT_FREE = "coordination-free-on-instance"
VERDICT_REQUIRED = "coordination-required-on-instance"
VERDICT_INCONCLUSIVE = "inconclusive"

DEFAULT_SAMPLED_SEEDS = 64

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConfluenceVerdict:
    mode: str  # exhaustive | sampled
    outcome: str  # confluent-on-instance | divergent | inconclusive
    distinct_outcomes: int
    witnesses: tuple  # up to 2 (Schedule, union Database) pairs when divergent
    runs_examined: int

    def to_obj(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "outcome": self.outcome,
            "distinct_outcomes": self.distinct_outcomes,
            "runs_examined": self.runs_examined,
            "witnesses": [
                {"schedule": sched.to_obj(), "union_output": db_to_obj(db)}
                for sched, db in self.witnesses
            ],
        }


@dataclass(frozen=True)
class CoordinationReport:
    per_partitioning: tuple  # ({"partitioning": map, "colocated": bool, "min_messages": n|None}, ...)
    colocated_min_messages: int | None
    verdict: str

    def to_obj(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "verdict": self.verdict,
            "colocated_min_messages": self.colocated_min_messages,
            "per_partitioning": list(self.per_partitioning),
        }


def check_confluence(
    vp: ValidatedProgram,
    input_db: Database,
    part: Partitioning,
    mode: str = "exhaustive",
    budget: int = DEFAULT_ENUM_BOUND,
    seeds: int = DEFAULT_SAMPLED_SEEDS,
    base_seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> ConfluenceVerdict:
    """Compare quiescent union outputs across delivery schedules.

    Exhaustive mode enumerates every reachable quiescent outcome (stopping
    early once two distinct outputs prove divergence); sampled mode compares
    ``seeds`` seeded runs. Divergence always comes with two replayable
    witness schedules.
    """
    initial = init_network(vp, input_db, part)
    if mode == "exhaustive":
        res = enumerate_schedules(
            initial, bound=budget, step_budget=step_budget, stop_after_distinct=2
        )
        if len(res.outcomes) >= 2:
            w = tuple(
                (Schedule(decisions=o.decisions), o.union_output)
                for o in res.outcomes[:2]
            )
            return ConfluenceVerdict(
                "exhaustive", OUTCOME_DIVERGENT, len(res.outcomes), w, res.states_explored
            )
        if res.complete and len(res.outcomes) == 1:
            return ConfluenceVerdict(
                "exhaustive", OUTCOME_CONFLUENT, 1, (), res.states_explored
            )
        return ConfluenceVerdict(
            "exhaustive", OUTCOME_INCONCLUSIVE, len(res.outcomes), (), res.states_explored
        )

    if mode != "sampled":
        raise ValueError(f"unknown confluence mode {mode!r}")
    distinct: dict = {}
    order: list = []
    quiescent_runs = 0
    for i in range(seeds):
        run = run_schedule(initial, Schedule(seed=base_seed + i), step_budget=step_budget)
        if not run.quiesced:
            continue
        quiescent_runs += 1
        key = run.union_output
        if key not in distinct:
            distinct[key] = run
            order.append(run)
        if len(distinct) >= 2:
            break
    if len(distinct) >= 2:
        w = tuple(
            (Schedule(decisions=r.decisions), r.union_output) for r in order[:2]
        )
        return ConfluenceVerdict("sampled", OUTCOME_DIVERGENT, len(distinct), w, quiescent_runs)
    if quiescent_runs == 0:
        return ConfluenceVerdict("sampled", OUTCOME_INCONCLUSIVE, 0, (), 0)
    return ConfluenceVerdict("sampled", OUTCOME_CONFLUENT, 1, (), quiescent_runs)


def detect_coordination(
    vp: ValidatedProgram,
    input_db: Database,
    machines: int,
    schedules_per_partitioning: int = 8,
    partition_cap: int = 16,
    base_seed: int = 0,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> CoordinationReport:
    """Minimum observed inter-machine messages per partitioning.

    Always explores the ``machines`` colocated variants; the verdict is
    coordination-free exactly when some colocated run quiesces with zero
    inter-machine messages.
    """
    if machines < 2:
        raise ValueError("coordination detection needs at least 2 machines")
    addrs = machine_addresses(machines)
    colocated_parts = [colocated(input_db, addrs, a) for a in addrs]
    sampled = enumerate_partitionings(input_db, machines, cap=partition_cap, seed=base_seed)
    explored: list[Partitioning] = colocated_parts + [
        p for p in sampled if p.assignment not in [c.assignment for c in colocated_parts]
    ]

    rows = []
    colocated_min: int | None = None
    colocated_conclusive = True
    for idx, part in enumerate(explored):
        is_colocated = idx < len(colocated_parts)
        initial = init_network(vp, input_db, part)
        best: int | None = None
        for i in range(schedules_per_partitioning):
            run = run_schedule(initial, Schedule(seed=base_seed + i), step_budget=step_budget)
            if not run.quiesced:
                continue
            if best is None or run.message_count < best:
                best = run.message_count
        rows.append(
            {
                "partitioning": part.describe(),
                "colocated": is_colocated,
                "min_messages": best,
            }
        )
        if is_colocated:
            if best is None:
                colocated_conclusive = False
            elif colocated_min is None or best < colocated_min:
                colocated_min = best

    if colocated_min is None and not colocated_conclusive:
        verdict = VERDICT_INCONCLUSIVE
    elif colocated_min == 0:
        verdict = VERDICT_FREE
    else:
        verdict = VERDICT_REQUIRED
    return CoordinationReport(tuple(rows), colocated_min, verdict)


def compare_outputs(a: RunOutcome, b: RunOutcome) -> dict:
    """Symmetric difference of union outputs by relation; {} iff equal."""
    return diff_databases(a.union_output, b.union_output)


def diff_databases(da: Database, db: Database) -> dict:
    rels = set(da.relations) | set(db.relations)
    out: dict = {}
    for rel in sorted(rels):
        fa = da.relation(rel)
        fb = db.relation(rel)
        only_a = sorted(str(f) for f in fa - fb)
        only_b = sorted(str(f) for f in fb - fa)
        if only_a or only_b:
            out[rel] = {"only_in_first": only_a, "only_in_second": only_b}
    return out
