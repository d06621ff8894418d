import json
from pathlib import Path

from calmlab import corpus
from calmlab.cli import main

GOLDENS = Path(__file__).parent / "goldens"


def corpus_file(name, filename) -> str:
    return str(corpus.config_path(name, filename))


def golden(name: str):
    return json.loads((GOLDENS / name).read_text())


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_deadlock_exit_zero(capsys):
    code, out, _ = run_cli(capsys, "analyze", corpus_file("deadlock", "program.calm"))
    assert code == 0
    assert "monotone" in out


def test_analyze_gc_exit_one_and_reason(capsys):
    code, out, _ = run_cli(capsys, "analyze", corpus_file("gc", "program.calm"))
    assert code == 1
    assert "non-monotone{negation}" in out


def test_analyze_missing_file_exit_two(capsys):
    code, _, err = run_cli(capsys, "analyze", "missing.calm")
    assert code == 2
    assert "error" in err


def test_analyze_invalid_program_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.calm"
    bad.write_text("rel r(x)\nr(X) :- s(X).")
    code, _, err = run_cli(capsys, "analyze", str(bad))
    assert code == 2
    assert "bad.calm" in err


def test_analyze_json_matches_golden(capsys):
    code, out, _ = run_cli(
        capsys, "analyze", corpus_file("gc", "program.calm"), "--json"
    )
    assert code == 1
    got = json.loads(out)
    want = golden("analyze_gc.json")
    # the golden pins everything except the file path baked into rule text
    assert got == want


def test_run_deadlock_lists_both_cycles(capsys):
    code, out, _ = run_cli(capsys, "run", corpus_file("deadlock", "run.json"))
    assert code == 0
    assert "cycle(t1, t2)" in out and "cycle(t1, t3)" in out
    assert "cycle(t2, t1)" in out and "cycle(t3, t1)" in out


def test_run_same_seed_identical_json_bytes(capsys):
    argv = ("run", corpus_file("deadlock", "run.json"), "--seed", "7", "--json")
    _, out1, _ = run_cli(capsys, *argv)
    _, out2, _ = run_cli(capsys, *argv)
    assert out1 == out2
    assert json.loads(out1) == golden("run_deadlock_seed7.json")


def test_run_budget_one_flags_and_exits_two(capsys):
    code, out, _ = run_cli(
        capsys, "run", corpus_file("deadlock", "run.json"), "--budget", "1"
    )
    assert code == 2
    assert "DID NOT QUIESCE" in out


def test_run_trace_out_writes_jsonl(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    code, _, _ = run_cli(
        capsys, "run", corpus_file("deadlock", "run.json"), "--trace-out", str(trace)
    )
    assert code == 0
    lines = [json.loads(l) for l in trace.read_text().splitlines()]
    assert len(lines) == 10
    assert {"from", "to", "fact", "step"} <= set(lines[0])


def test_check_cart_manifest_confluent_exit_zero(capsys):
    code, out, _ = run_cli(capsys, "check", corpus_file("cart_manifest", "check.json"))
    assert code == 0
    assert "confluent-on-instance" in out


def test_check_cart_naive_divergent_exit_one(capsys):
    code, out, _ = run_cli(
        capsys, "check", corpus_file("cart_naive", "check.json"), "--json"
    )
    assert code == 1
    obj = json.loads(out)
    assert obj["outcome"] == "divergent"
    assert len(obj["witnesses"]) == 2


def test_check_gc_json_matches_golden(capsys):
    code, out, _ = run_cli(capsys, "check", corpus_file("gc", "check.json"), "--json")
    assert code == 1
    assert json.loads(out) == golden("check_gc.json")


def test_coordination_deadlock_exit_zero(capsys):
    code, out, _ = run_cli(
        capsys, "coordination", corpus_file("deadlock", "coordination.json")
    )
    assert code == 0
    assert "coordination-free-on-instance" in out


def test_coordination_gc_coordinated_exit_one_and_golden(capsys):
    code, out, _ = run_cli(
        capsys,
        "coordination",
        corpus_file("gc_coordinated", "coordination.json"),
        "--json",
    )
    assert code == 1
    assert json.loads(out) == golden("coordination_gc_coordinated.json")


def test_corpus_list_names_all_entries(capsys):
    code, out, _ = run_cli(capsys, "corpus", "list")
    assert code == 0
    for e in corpus.ENTRIES:
        assert e.name in out


def test_corpus_list_json(capsys):
    code, out, _ = run_cli(capsys, "corpus", "list", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["schema_version"] == 1
    assert len(obj["entries"]) == 8
    assert all("path" in r for r in obj["entries"])


def test_env_seed_is_the_default(monkeypatch, tmp_path, capsys):
    # a config without a seed field picks up CALMLAB_SEED
    src = json.loads(Path(corpus_file("deadlock", "run.json")).read_text())
    del src["seed"]
    src["program"] = corpus_file("deadlock", "program.calm")
    src["fixture"] = corpus_file("deadlock", "fig1.facts")
    cfg = tmp_path / "noseed.json"
    cfg.write_text(json.dumps(src))

    monkeypatch.setenv("CALMLAB_SEED", "7")
    _, out_env, _ = run_cli(capsys, "run", str(cfg), "--json")
    monkeypatch.delenv("CALMLAB_SEED")
    _, out_seed7, _ = run_cli(capsys, "run", str(cfg), "--json", "--seed", "7")
    _, out_seed0, _ = run_cli(capsys, "run", str(cfg), "--json")
    assert out_env == out_seed7
    # --seed beats the env var
    monkeypatch.setenv("CALMLAB_SEED", "3")
    _, out_flag, _ = run_cli(capsys, "run", str(cfg), "--json", "--seed", "7")
    monkeypatch.delenv("CALMLAB_SEED")
    assert out_flag == out_seed7
