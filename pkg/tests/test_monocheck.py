import pytest

from calmlab import corpus, monocheck
from calmlab.calmlang import parse_program, validate_program
from calmlab.relspace import Database, db_leq, parse_facts
from calmlab.transducer import single_machine_output


def vp_of(src: str):
    return validate_program(parse_program(src))


def test_positive_conjunctive_rule_is_monotone():
    vp = vp_of("rel edge(x,y) [input]\nrel path(x,y) [output]\npath(X,Y) :- edge(X,Y).")
    cls = monocheck.classify_rule(vp.rules[0])
    assert cls.monotone
    assert str(cls) == "monotone"


def test_negation_classified():
    vp = vp_of(
        "rel object(x) [input]\nrel reach(x) [input]\nrel garbage(x) [output]\n"
        "garbage(X) :- object(X), !reach(X)."
    )
    cls = monocheck.classify_rule(vp.rules[0])
    assert cls.reasons == frozenset({"negation"})
    assert str(cls) == "non-monotone{negation}"


def test_aggregation_classified_and_dynamically_nonmonotone():
    # oracle: growing the member set changes (does not extend) the count output
    vp = vp_of("rel member(x) [input]\nrel n(k) [output]\nn(count<X>) :- member(X).")
    cls = monocheck.classify_rule(vp.rules[0])
    assert cls.reasons == frozenset({"aggregation"})
    small = Database.from_facts(parse_facts("member(a)"))
    large = Database.from_facts(parse_facts("member(a)\nmember(b)"))
    out_small = single_machine_output(vp, small)
    out_large = single_machine_output(vp, large)
    assert not db_leq(out_small, out_large)  # n(1) is not in {n(2)}


def test_membership_query_classified():
    vp = vp_of("rel out(@a) [output]\nout(X) :- all(X).")
    assert monocheck.classify_rule(vp.rules[0]).reasons == frozenset(
        {"membership-query"}
    )


def test_reading_id_does_not_affect_verdict(programs):
    rep = monocheck.analyze_program(programs["deadlock"])
    assert rep.uses_id and rep.program_monotone


def test_analyze_deadlock_monotone_no_coordination_points(programs):
    rep = monocheck.analyze_program(programs["deadlock"])
    assert rep.program_monotone
    assert rep.coordination_points == ()
    assert not rep.uses_all


def test_analyze_gc_exactly_one_coordination_point(programs):
    rep = monocheck.analyze_program(programs["gc"])
    assert not rep.program_monotone
    assert len(rep.coordination_points) == 1
    assert rep.coordination_points[0].kind == "negation"


def test_analyze_cart_manifest_nonmonotone(programs):
    rep = monocheck.analyze_program(programs["cart_manifest"])
    assert not rep.program_monotone
    reasons = set()
    for c in rep.rule_classes:
        reasons |= set(c.reasons)
    assert "negation" in reasons


def test_analyze_gc_coordinated_uses_all(programs):
    rep = monocheck.analyze_program(programs["gc_coordinated"])
    assert rep.uses_all
    reasons = set()
    for c in rep.rule_classes:
        reasons |= set(c.reasons)
    assert reasons == {"negation", "aggregation", "membership-query"}


def test_program_verdict_is_conjunction_of_rule_verdicts(programs):
    for vp in programs.values():
        rep = monocheck.analyze_program(vp)
        assert rep.program_monotone == all(c.monotone for c in rep.rule_classes)


def test_stratify_pure_positive_single_stratum():
    vp = vp_of("rel e(x,y) [input]\nrel p(x,y) [output]\np(X,Y) :- e(X,Y).\np(X,Z) :- e(X,Y), p(Y,Z).")
    assert len(monocheck.stratify(vp)) == 1


def test_stratify_gc_two_strata_garbage_on_top(programs):
    strata = monocheck.stratify(programs["gc"])
    assert len(strata) == 2
    assert "garbage" in strata[1]
    assert "edge" in strata[0] and "reach" in strata[0]


def test_unstratifiable_negative_self_loop():
    vp = vp_of("rel q(x) [input]\nrel p(x) [output]\np(X) :- q(X), !p(X).")
    with pytest.raises(monocheck.UnstratifiableError) as e:
        monocheck.stratify(vp)
    assert "p" in e.value.cycle


def test_unstratifiable_longer_cycle():
    src = """
rel base(x) [input]
rel p(x)
rel q(x) [output]
p(X) :- base(X), !q(X).
q(X) :- p(X).
"""
    with pytest.raises(monocheck.UnstratifiableError) as e:
        monocheck.stratify(vp_of(src))
    assert set(e.value.cycle) == {"p", "q"}


def test_analyze_reports_unstratifiable_cycle_without_raising():
    vp = vp_of("rel q(x) [input]\nrel p(x) [output]\np(X) :- q(X), !p(X).")
    rep = monocheck.analyze_program(vp)
    assert rep.strata is None
    assert rep.unstratifiable_cycle is not None


def test_classification_stable_under_rule_reorder_and_renaming(programs):
    src = corpus.read_text("gc", "program.calm")
    p = parse_program(src)
    reordered = type(p)(p.decls, tuple(reversed(p.rules)), p.filename)
    rep1 = monocheck.analyze_program(validate_program(p))
    rep2 = monocheck.analyze_program(validate_program(reordered))
    assert rep1.program_monotone == rep2.program_monotone
    assert {
        (c.reasons) for c in rep1.rule_classes
    } == {(c.reasons) for c in rep2.rule_classes}
    assert rep1.strata == rep2.strata

    renamed = src.replace("X", "Xv").replace("Y", "Yv").replace("R", "Rv")
    rep3 = monocheck.analyze_program(validate_program(parse_program(renamed)))
    assert rep3.strata == rep1.strata
    assert [c.reasons for c in rep3.rule_classes] == [c.reasons for c in rep1.rule_classes]


def test_dependency_graph_edge_kinds(programs):
    edges = monocheck.dependency_graph(programs["gc"])
    kinds = {(e.head, e.body): e.kind for e in edges}
    assert kinds[("garbage", "reach")] == "negative"
    assert kinds[("path", "edge")] if ("path", "edge") in kinds else True
    assert kinds[("reach", "edge")] == "positive"


def test_report_json_stable_key_order(programs):
    from calmlab.relspace import canonical_json

    rep = monocheck.analyze_program(programs["gc"])
    one = canonical_json(rep.to_obj(programs["gc"]))
    two = canonical_json(
        monocheck.analyze_program(programs["gc"]).to_obj(programs["gc"])
    )
    assert one == two
    assert '"schema_version":1' in one
