import random

import pytest
from hypothesis import given, strategies as st

from calmlab.relspace import (
    Database,
    Delta,
    DeltaError,
    Fact,
    FactSyntaxError,
    SchemaError,
    apply_delta,
    db_leq,
    db_to_json,
    db_union,
    parse_fact,
    parse_facts,
    parse_value,
)
from calmlab.values import Address, Int, Symbol, Text

from conftest import random_database

I1 = Fact("cart", (Symbol("i1"),))
I2 = Fact("cart", (Symbol("i2"),))


def db(*facts):
    return Database.from_facts(facts)


def test_union_identity():
    assert db_union(db(), db()) == db()


def test_union_disjoint():
    assert db_union(db(I1), db(I2)) == db(I1, I2)


def test_union_idempotent_on_random_databases():
    # property harness: union(A, A) = A for 50 generated databases
    rng = random.Random(7)
    for _ in range(50):
        a = random_database(rng)
        assert db_union(a, a) == a


def test_union_is_least_upper_bound():
    rng = random.Random(8)
    for _ in range(50):
        a, b, c = (random_database(rng) for _ in range(3))
        u = db_union(a, b)
        assert db_leq(a, u) and db_leq(b, u)
        assert db_union(a, b) == db_union(b, a)
        assert db_union(db_union(a, b), c) == db_union(a, db_union(b, c))
        # any other upper bound sits above the union
        ub = db_union(u, c)
        assert db_leq(u, ub)


def test_union_schema_mismatch():
    bad = Fact("cart", (Symbol("i1"), Symbol("i2")))
    with pytest.raises(SchemaError):
        db_union(db(I1), db(bad))


def test_leq_empty_is_bottom():
    rng = random.Random(9)
    for _ in range(20):
        assert db_leq(db(), random_database(rng))


def test_leq_reflexive():
    rng = random.Random(10)
    for _ in range(20):
        a = random_database(rng)
        assert db_leq(a, a)


def test_leq_strict_superset_reversed():
    e12 = Fact("e", (Symbol("t1"), Symbol("t2")))
    e21 = Fact("e", (Symbol("t2"), Symbol("t1")))
    assert not db_leq(db(e12, e21), db(e12))


def test_apply_delta_empty():
    d = db(I1, I2)
    assert apply_delta(d, Delta(frozenset(), frozenset())) == d


def test_apply_delta_grows_second_set():
    added = Fact("added", (Symbol("i"),))
    removed = Fact("removed", (Symbol("i"),))
    out = apply_delta(db(added), Delta(frozenset([removed]), frozenset()))
    assert out == db(added, removed)


def test_apply_delta_idempotent():
    rng = random.Random(11)
    for _ in range(50):
        d = random_database(rng)
        universe = list(d.facts())
        ins = frozenset(rng.sample(universe, min(len(universe), 2)))
        others = [f for f in universe if f not in ins]
        dels = frozenset(rng.sample(others, min(len(others), 2)))
        delta = Delta(ins, dels)
        once = apply_delta(d, delta)
        assert apply_delta(once, delta) == once


def test_delta_rejects_ambiguous_batch():
    with pytest.raises(DeltaError):
        Delta(frozenset([I1]), frozenset([I1]))


def test_database_rejects_mixed_arity():
    with pytest.raises(SchemaError):
        db(I1, Fact("cart", (Symbol("a"), Symbol("b"))))


# --- text format ------------------------------------------------------------


def test_parse_fact_roundtrip_each_value_kind():
    facts = [
        "r(42)",
        "r(-3)",
        'r("hi there")',
        "r(sym)",
        "r(@m1)",
        "r(gset{a, b})",
        "r(maxint(5))",
        "r(boolor(true))",
        "r(2p{added:{a, b}, tomb:{b}})",
    ]
    for text in facts:
        f = parse_fact(text)
        assert parse_fact(str(f)) == f


def test_parse_facts_comments_and_blanks():
    text = "# header\n\ncart(i1)  # trailing\ncart(i2)\n"
    fs = parse_facts(text)
    assert fs == [I1, I2]


def test_parse_facts_error_position():
    with pytest.raises(FactSyntaxError) as e:
        parse_facts("cart(i1)\ncart(", filename="f.facts")
    assert e.value.line == 2
    assert "f.facts" in str(e.value)


def test_value_total_order_is_type_rank_then_natural():
    vals = [Symbol("a"), Int(5), Text("z"), Address("m1"), Int(-1)]
    ordered = sorted(vals, key=lambda v: v.sort_key())
    assert ordered == [Int(-1), Int(5), Text("z"), Symbol("a"), Address("m1")]


@given(
    st.permutations(
        [
            Fact("b", (Int(1),)),
            Fact("b", (Int(2),)),
            Fact("a", (Symbol("x"), Symbol("y"))),
            Fact("a", (Symbol("y"), Symbol("x"))),
            Fact("c", (Text("s"),)),
        ]
    )
)
def test_canonical_serialization_ignores_construction_order(perm):
    base = db_to_json(Database.from_facts(perm))
    assert base == db_to_json(Database.from_facts(list(reversed(perm))))


def test_parse_value_lattice_nesting_rejected():
    with pytest.raises(FactSyntaxError):
        parse_value("gset{gset{a}}")


def test_db_json_obj_roundtrip():
    from calmlab.relspace import db_from_obj, db_to_obj

    source = db(
        I1,
        Fact("scores", (Int(3), Text("hi"))),
        Fact("homes", (Address("m2"), Symbol("t1"))),
        Fact("store", (parse_value("2p{added:{a}, tomb:{b}}"),)),
    )
    assert db_from_obj(db_to_obj(source)) == source


scalar_values = st.one_of(
    st.integers(min_value=-(2**63), max_value=2**63 - 1).map(Int),
    st.text(
        alphabet=st.characters(blacklist_categories=("Cs",)), max_size=12
    ).map(Text),
    st.from_regex(r"[a-z][a-zA-Z0-9_]{0,6}", fullmatch=True).map(Symbol),
    st.from_regex(r"[a-z][a-zA-Z0-9_]{0,6}", fullmatch=True).map(Address),
)


@given(scalar_values)
def test_any_scalar_value_round_trips_through_text(v):
    assert parse_value(str(v)) == v


@given(st.lists(scalar_values, min_size=0, max_size=4))
def test_any_fact_round_trips_through_text(args):
    f = Fact("r", tuple(args))
    assert parse_fact(str(f)) == f
