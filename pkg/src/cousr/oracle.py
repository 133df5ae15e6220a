"""Exhaustive reference miner: slow, direct, and independent of the fast path.

Every candidate rule over the occurring items is measured straight from the
definitions by per-sequence scans: occurrence is checked by trying every
split point of a sequence (antecedent inside the prefix union of itemsets,
consequent inside the suffix union), supports by set containment, utilities
by summing quantity times unit price. No bit vectors, no utility-lists, no
pruning; only the data model is shared with the fast miner, so agreement
between the two is meaningful evidence of correctness.

Enumeration is refused beyond :class:`OracleLimits` because the candidate
count grows as 3^m for m occurring items.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, NamedTuple

from .seqdb import SequenceDatabase


class OracleLimitError(ValueError):
    """Database exceeds the size the exhaustive oracle is willing to process."""


@dataclass(frozen=True)
class OracleLimits:
    max_items: int = 12
    max_sequences: int = 16


class OracleRule(NamedTuple):
    """A candidate rule with every measure, computed the slow way.

    For rules that never occur, confidence and lift are reported as 0 so the
    stream stays total.
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    utility: Fraction
    support: int
    confidence: Fraction
    lift: Fraction
    bond_antecedent: Fraction
    bond_consequent: Fraction


class _SequenceView(NamedTuple):
    sid: int
    items: frozenset[int]
    prefix_unions: tuple[frozenset[int], ...]  # prefix_unions[p] = items of itemsets 1..p
    suffix_unions: tuple[frozenset[int], ...]  # suffix_unions[p] = items of itemsets p+1..l
    item_utilities: dict[int, Fraction]


def _views(db: SequenceDatabase) -> list[_SequenceView]:
    table = db.require_utilities()
    views = []
    for seq in db.sequences:
        sets = [frozenset(item for item, _ in itemset) for itemset in seq.itemsets]
        prefixes: list[frozenset[int]] = []
        acc: frozenset[int] = frozenset()
        for s in sets:
            acc |= s
            prefixes.append(acc)
        suffixes: list[frozenset[int]] = [frozenset()] * len(sets)
        tail: frozenset[int] = frozenset()
        for index in range(len(sets) - 1, -1, -1):
            suffixes[index] = tail
            tail |= sets[index]
        utilities = {
            item: qty * table.entries[item] for item, qty in seq.quantities.items()
        }
        views.append(
            _SequenceView(seq.sid, seq.items, tuple(prefixes), tuple(suffixes), utilities)
        )
    return views


def _occurs(antecedent: frozenset[int], consequent: frozenset[int], view: _SequenceView) -> bool:
    # try every split point; the first prefix containing the antecedent is
    # the best chance since suffixes only shrink
    for p in range(len(view.prefix_unions) - 1):
        if antecedent <= view.prefix_unions[p]:
            return consequent <= view.suffix_unions[p]
    return False


def _check_limits(db: SequenceDatabase, limits: OracleLimits) -> tuple[int, ...]:
    occurring = tuple(sorted(db.item_universe))
    if len(occurring) > limits.max_items:
        raise OracleLimitError(
            f"{len(occurring)} occurring items exceed the oracle limit of {limits.max_items}"
        )
    if db.sequence_count > limits.max_sequences:
        raise OracleLimitError(
            f"{db.sequence_count} sequences exceed the oracle limit of {limits.max_sequences}"
        )
    return occurring


def enumerate_all_rules(
    db: SequenceDatabase, limits: OracleLimits | None = None
) -> Iterator[OracleRule]:
    """Measure every ordered pair of disjoint non-empty subsets of occurring items."""
    limits = limits or OracleLimits()
    occurring = _check_limits(db, limits)
    views = _views(db)
    n = db.sequence_count

    containing: dict[frozenset[int], list[_SequenceView]] = {}
    support: dict[frozenset[int], int] = {}
    dissup: dict[frozenset[int], int] = {}

    def seqs_containing(itemset: frozenset[int]) -> list[_SequenceView]:
        cached = containing.get(itemset)
        if cached is None:
            cached = [v for v in views if itemset <= v.items]
            containing[itemset] = cached
        return cached

    def sup(itemset: frozenset[int]) -> int:
        cached = support.get(itemset)
        if cached is None:
            cached = len(seqs_containing(itemset))
            support[itemset] = cached
        return cached

    def dis(itemset: frozenset[int]) -> int:
        cached = dissup.get(itemset)
        if cached is None:
            cached = sum(1 for v in views if itemset & v.items)
            dissup[itemset] = cached
        return cached

    for size in range(2, len(occurring) + 1):
        for union in combinations(occurring, size):
            union_set = frozenset(union)
            candidates = seqs_containing(union_set)
            union_utility = {
                v.sid: sum(v.item_utilities[item] for item in union) for v in candidates
            }
            for split in range(1, 2 ** size - 1):
                antecedent = tuple(
                    item for index, item in enumerate(union) if split >> index & 1
                )
                consequent = tuple(
                    item for index, item in enumerate(union) if not split >> index & 1
                )
                x_set = frozenset(antecedent)
                y_set = frozenset(consequent)
                supporters = [v for v in candidates if _occurs(x_set, y_set, v)]
                rule_support = len(supporters)
                utility = sum(
                    (union_utility[v.sid] for v in supporters), Fraction(0)
                )
                sup_x = sup(x_set)
                sup_y = sup(y_set)
                conf = Fraction(rule_support, sup_x) if sup_x else Fraction(0)
                lift_value = (
                    Fraction(n * rule_support, sup_x * sup_y)
                    if sup_x and sup_y
                    else Fraction(0)
                )
                yield OracleRule(
                    antecedent=antecedent,
                    consequent=consequent,
                    utility=utility,
                    support=rule_support,
                    confidence=conf,
                    lift=lift_value,
                    bond_antecedent=Fraction(sup_x, dis(x_set)),
                    bond_consequent=Fraction(sup_y, dis(y_set)),
                )


def oracle_chusrs(
    db: SequenceDatabase,
    min_util,
    min_conf,
    min_bond,
    min_lift,
    limits: OracleLimits | None = None,
) -> tuple[OracleRule, ...]:
    """Every occurring rule that clears all four thresholds, canonically ordered."""
    min_util = Fraction(min_util)
    min_conf = Fraction(min_conf)
    min_bond = Fraction(min_bond)
    min_lift = Fraction(min_lift)
    kept = [
        rule
        for rule in enumerate_all_rules(db, limits)
        if rule.support >= 1
        and rule.utility >= min_util
        and rule.confidence >= min_conf
        and rule.bond_antecedent >= min_bond
        and rule.bond_consequent >= min_bond
        and rule.lift >= min_lift
    ]
    kept.sort(key=lambda r: (r.antecedent, r.consequent))
    return tuple(kept)
