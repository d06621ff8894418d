from __future__ import annotations

import random

import pytest

from calmlab import corpus
from calmlab.relspace import Database, Fact
from calmlab.values import Address, Int, Symbol, Text


@pytest.fixture(scope="session")
def programs():
    """name -> ValidatedProgram for every corpus entry."""
    return {e.name: corpus.load_program(e.name) for e in corpus.ENTRIES}


@pytest.fixture(scope="session")
def fixtures():
    """(name, fixture filename) -> Database."""
    out = {}
    for e in corpus.ENTRIES:
        for fx in e.fixtures:
            out[(e.name, fx)] = corpus.load_fixture(e.name, fx)
    return out


def random_scalar(rng: random.Random):
    kind = rng.randrange(4)
    if kind == 0:
        return Int(rng.randrange(-50, 50))
    if kind == 1:
        return Text(rng.choice(["x", "y", "hello", ""]))
    if kind == 2:
        return Symbol(rng.choice(["a", "b", "c", "item", "t1"]))
    return Address(rng.choice(["m1", "m2", "m3"]))


def random_database(rng: random.Random, max_relations: int = 3, max_facts: int = 6) -> Database:
    # relation rK has arity K so any two generated databases are compatible
    facts = []
    rels = [("r%d" % a, a) for a in rng.sample((1, 2, 3), rng.randint(0, max_relations))]
    for name, arity in rels:
        for _ in range(rng.randint(0, max_facts)):
            facts.append(Fact(name, tuple(random_scalar(rng) for _ in range(arity))))
    return Database.from_facts(facts)
