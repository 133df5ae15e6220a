from __future__ import annotations

import random
from fractions import Fraction

import pytest

from cousr import Rule, parse_database, parse_utility_table, with_utilities
from cousr.measures import rule_utility
from cousr.oracle import (
    OracleLimitError,
    OracleLimits,
    enumerate_all_rules,
    oracle_chusrs,
)
from cousr.synth import random_small_database, synthesize_database

from conftest import A, B, C, D, G

GOLDEN = (50, Fraction(7, 10), Fraction(3, 10), Fraction(11, 10))


def test_candidate_count_formula():
    # ordered pairs of disjoint non-empty subsets of m items: 3^m - 2*2^m + 1
    db = with_utilities(
        parse_database("1:1 -1 2:1 -1 3:1 -1 -2\n"),
        parse_utility_table("1 1\n2 1\n3 1\n"),
    )
    assert sum(1 for _ in enumerate_all_rules(db)) == 12


def test_candidate_count_on_example(example_db):
    assert sum(1 for _ in enumerate_all_rules(example_db)) == 3**7 - 2 * 2**7 + 1


def test_single_item_db_yields_nothing():
    db = with_utilities(parse_database("1:4 -1 -2\n"), parse_utility_table("1 2\n"))
    assert list(enumerate_all_rules(db)) == []


def test_oracle_reproduces_golden_rules(example_db):
    rules = oracle_chusrs(example_db, *GOLDEN)
    assert [(r.antecedent, r.consequent) for r in rules] == [
        ((A, B, C, D), (G,)),
        ((A, B, D), (G,)),
        ((A, D), (G,)),
        ((B, D), (G,)),
    ]
    assert [r.utility for r in rules] == [55, 74, 54, 53]
    assert all(r.confidence == 1 and r.lift == Fraction(5, 4) for r in rules)


def test_oracle_full_measure_tuple(example_db):
    match = [
        r
        for r in enumerate_all_rules(example_db)
        if (r.antecedent, r.consequent) == ((A, B, D), (G,))
    ]
    assert len(match) == 1
    r = match[0]
    assert (r.utility, r.confidence, r.lift, r.bond_antecedent, r.bond_consequent, r.support) == (
        74, 1, Fraction(5, 4), Fraction(4, 5), 1, 4,
    )


def test_raising_min_lift_empties_the_golden_set(example_db):
    assert oracle_chusrs(example_db, 50, Fraction(7, 10), Fraction(3, 10), Fraction(13, 10)) == ()


def test_zero_thresholds_keep_every_occurring_rule(example_db):
    rules = oracle_chusrs(example_db, 0, 0, 0, 0)
    occurring = [r for r in enumerate_all_rules(example_db) if r.support >= 1]
    assert len(rules) == len(occurring)
    assert all(r.support >= 1 for r in rules)
    keys = {(r.antecedent, r.consequent) for r in rules}
    assert ((A,), (B,)) in keys
    assert ((B,), (A,)) not in keys  # b never strictly precedes a


def test_oracle_is_deterministic(example_db):
    assert oracle_chusrs(example_db, *GOLDEN) == oracle_chusrs(example_db, *GOLDEN)


def test_limits_rejected():
    big = synthesize_database(4, 20, 6, seed=1)
    with pytest.raises(OracleLimitError):
        list(enumerate_all_rules(big))
    many = synthesize_database(20, 6, 3, seed=1)
    with pytest.raises(OracleLimitError):
        oracle_chusrs(many, 0, 0, 0, 0)
    # explicit limits can widen the envelope
    assert oracle_chusrs(many, 10**9, 0, 0, 0, limits=OracleLimits(max_sequences=32)) == ()


def test_oracle_utility_matches_measures_path():
    # two independent code paths must agree on rule utility
    for seed in range(10):
        db = random_small_database(random.Random(seed))
        for r in enumerate_all_rules(db):
            assert r.utility == rule_utility(Rule(r.antecedent, r.consequent), db)
