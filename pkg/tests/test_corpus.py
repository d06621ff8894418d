"""Regression matrix: every expected verdict recorded in the corpus registry
is re-derived from scratch."""

import pytest

from calmlab import corpus, monocheck
from calmlab.config import load_config
from calmlab.verdicts import check_confluence, detect_coordination


@pytest.mark.parametrize("entry", corpus.ENTRIES, ids=lambda e: e.name)
def test_expected_static_verdict(entry, programs):
    rep = monocheck.analyze_program(programs[entry.name])
    verdict = "monotone" if rep.program_monotone else "non-monotone"
    assert verdict == entry.expected_static
    reasons = set()
    for c in rep.rule_classes:
        reasons |= set(c.reasons)
    assert reasons == set(entry.expected_reasons)


@pytest.mark.parametrize(
    "entry,config",
    [
        (e, c)
        for e in corpus.ENTRIES
        for c in sorted(e.expected_dynamic)
    ],
    ids=lambda v: v if isinstance(v, str) else v.name,
)
def test_expected_dynamic_verdict(entry, config):
    expected = entry.expected_dynamic[config]
    cfg = load_config(corpus.config_path(entry.name, config))
    if config == "coordination.json":
        report = detect_coordination(
            cfg.program,
            cfg.fixture,
            cfg.machines,
            schedules_per_partitioning=cfg.schedules_per_partitioning,
            partition_cap=cfg.partition_cap,
        )
        assert report.verdict == expected
    else:
        verdict = check_confluence(
            cfg.program,
            cfg.fixture,
            cfg.partitioning(),
            mode=cfg.mode,
            seeds=cfg.seeds,
        )
        assert verdict.outcome == expected


def test_every_entry_ships_program_fixtures_readme():
    for e in corpus.ENTRIES:
        assert corpus.read_text(e.name, "program.calm")
        assert corpus.read_text(e.name, "README.md")
        for fx in e.fixtures:
            assert corpus.load_fixture(e.name, fx).size() > 0


def test_calm_reverse_every_nonmonotone_entry_has_evidence():
    # each non-monotone entry either diverges somewhere or needs coordination
    for e in corpus.NON_MONOTONE_ENTRIES:
        assert any(
            v in ("divergent", "coordination-required-on-instance")
            for v in e.expected_dynamic.values()
        ), f"{e.name} records no dynamic evidence of non-monotonicity"
