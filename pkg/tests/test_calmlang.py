import pytest

from calmlab import corpus
from calmlab.calmlang import (
    Negation,
    ParseError,
    ValidationError,
    parse_program,
    program_to_text,
    validate_program,
)

MINI_DECLS = """
rel edge(x, y) [input]
rel path(x, y) [output]
"""


def test_parse_minimal_rule():
    p = parse_program(MINI_DECLS + "path(X, Y) :- edge(X, Y).")
    assert len(p.rules) == 1
    assert not any(isinstance(e, Negation) for e in p.rules[0].body)


def test_parse_deadlock_corpus_has_closure_pair_and_cycle_rule():
    p = parse_program(corpus.read_text("deadlock", "program.calm"))
    texts = [r.head.relation for r in p.rules]
    assert texts.count("path") == 2  # base case + recursive step
    assert "cycle" in texts


def test_parse_negated_literal():
    src = """
rel object(x) [input]
rel reach(x) [input]
rel garbage(x) [output]
garbage(X) :- object(X), !reach(X).
"""
    p = parse_program(src)
    negs = [e for e in p.rules[0].body if isinstance(e, Negation)]
    assert len(negs) == 1
    assert negs[0].literal.relation == "reach"


def test_positions_retained():
    p = parse_program("rel edge(x, y) [input]\nrel path(x, y) [output]\npath(X, Y) :- edge(X, Y).")
    rule = p.rules[0]
    assert rule.pos == (3, 1)
    assert rule.head.args[0].pos == (3, 6)


def test_parse_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_program("rel r(x)\nr(X :- r(X).", filename="bad.calm")
    assert "bad.calm:2" in str(e.value)


def test_duplicate_declaration_rejected():
    with pytest.raises(ParseError) as e:
        parse_program("rel r(x)\nrel r(y)")
    assert "duplicate" in str(e.value)


def test_aggregate_only_in_head():
    with pytest.raises(ParseError):
        parse_program("rel m(x) [input]\nrel n(k)\nn(K) :- m(count<K>).")


# --- validation -------------------------------------------------------------


def test_unsafe_head_variable():
    with pytest.raises(ValidationError) as e:
        validate_program(parse_program(MINI_DECLS + "path(X, Z) :- edge(X, Y)."))
    assert "Z" in str(e.value)


def test_unbound_negation():
    src = MINI_DECLS + "rel q(x)\npath(X, X) :- edge(X, X), !q(Z)."
    with pytest.raises(ValidationError) as e:
        validate_program(parse_program(src))
    assert "negation" in str(e.value)


def test_head_arity_mismatch():
    with pytest.raises(ValidationError) as e:
        validate_program(parse_program(MINI_DECLS + "path(X) :- edge(X, Y)."))
    assert "arity" in str(e.value)


def test_undeclared_relation():
    with pytest.raises(ValidationError):
        validate_program(parse_program(MINI_DECLS + "path(X, Y) :- mystery(X, Y)."))


def test_channel_needs_address_first_column():
    with pytest.raises(ValidationError) as e:
        validate_program(parse_program("chan c(x, y)"))
    assert "address" in str(e.value)


def test_channel_cannot_be_input_or_output():
    with pytest.raises(ValidationError):
        validate_program(parse_program("chan c(@d, x) [input]"))


def test_event_relation_cannot_be_input():
    with pytest.raises(ValidationError):
        validate_program(parse_program("rel e(x) [event, input]"))


def test_lattice_column_not_in_channel():
    with pytest.raises(ValidationError):
        validate_program(parse_program("chan c(@d, s: gset)"))


def test_lattice_relation_not_under_negation():
    src = """
rel items(x) [input]
rel store(s: 2p)
rel out(x) [output]
store(2p{added:{X}, tomb:{}}) :- items(X).
out(X) :- items(X), !store(X).
"""
    with pytest.raises(ValidationError) as e:
        validate_program(parse_program(src))
    assert "lattice" in str(e.value)


def test_lattice_constructor_variant_must_match_column():
    src = """
rel items(x) [input]
rel store(s: gset)
store(maxint(1)) :- items(X).
"""
    with pytest.raises(ValidationError):
        validate_program(parse_program(src))


def test_reserved_relations_not_derivable_or_declarable():
    with pytest.raises(ValidationError):
        validate_program(parse_program("rel id(@a)"))
    with pytest.raises(ValidationError):
        validate_program(parse_program("rel q(@a) [input]\nid(X) :- q(X)."))


def test_comparison_needs_bound_variables():
    with pytest.raises(ValidationError):
        validate_program(parse_program(MINI_DECLS + "path(X, X) :- edge(X, X), X < Z."))


def test_wildcard_not_in_head():
    with pytest.raises(ValidationError):
        validate_program(parse_program(MINI_DECLS + "path(X, _) :- edge(X, X)."))


def test_address_constant_only_in_address_columns():
    with pytest.raises(ValidationError):
        validate_program(parse_program(MINI_DECLS + "path(X, @m1) :- edge(X, X)."))


def test_valid_cart_corpus_program():
    validate_program(parse_program(corpus.read_text("cart_two_set", "program.calm")))


@pytest.mark.parametrize("name", [e.name for e in corpus.ENTRIES])
def test_print_parse_roundtrip_on_corpus(name):
    src = corpus.read_text(name, "program.calm")
    p1 = parse_program(src)
    printed = program_to_text(p1)
    p2 = parse_program(printed)
    assert p1 == p2  # positions excluded from equality
    assert program_to_text(p2) == printed


def test_validation_order_independent():
    src = corpus.read_text("gc", "program.calm")
    p = parse_program(src)
    reordered = type(p)(p.decls, tuple(reversed(p.rules)), p.filename)
    vp1 = validate_program(p)
    vp2 = validate_program(reordered)
    assert {r.rule for r in vp1.rules} == {r.rule for r in vp2.rules}
