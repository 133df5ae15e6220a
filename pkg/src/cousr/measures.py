"""Itemset and rule measures, computed on per-item bit vectors.

Bit vectors index sequences by sid: bit ``j`` of an item's vector is set iff
the item occurs in the sequence with sid ``j + 1``. Vectors are plain Python
integers, so intersection/union are single ``&``/``|`` operations and
cardinality is ``int.bit_count()``.

Measures:

* support of an itemset  = cardinality of the AND of its item vectors
* disjunctive support    = cardinality of the OR of its item vectors
* bond                   = support / disjunctive support (local correlation)
* a rule X => Y occurs in a sequence iff every item of X sits in a strictly
  earlier itemset than every item of Y (and all items are present)
* confidence of a rule   = |sids(rule)| / |sids(X)|
* lift of a rule         = (n * |sids(rule)|) / (sup(X) * sup(Y)) for a
  database of n sequences (global correlation)

Zero-denominator confidence/lift raise :class:`UndefinedMeasureError`; the
bond of an itemset whose items are all absent is reported as 0 with
``defined=False`` so callers can prune it rather than crash.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple

from .seqdb import Sequence, SequenceDatabase


class UndefinedMeasureError(ValueError):
    """A measure's denominator is zero (e.g. confidence of an absent antecedent)."""


@dataclass(frozen=True)
class Rule:
    """A sequential rule: disjoint, non-empty antecedent and consequent item sets.

    Both sides are stored as strictly ascending tuples of item ids.
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, side in (("antecedent", self.antecedent), ("consequent", self.consequent)):
            if not side:
                raise ValueError(f"rule {name} must be non-empty")
            if any(i < 1 for i in side):
                raise ValueError(f"rule {name} items must be >= 1: {side}")
            if any(a >= b for a, b in zip(side, side[1:])):
                raise ValueError(f"rule {name} must be strictly ascending: {side}")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("antecedent and consequent must be disjoint")

    @classmethod
    def of(cls, antecedent: Iterable[int], consequent: Iterable[int]) -> "Rule":
        return cls(tuple(sorted(antecedent)), tuple(sorted(consequent)))

    @property
    def size(self) -> tuple[int, int]:
        """Rule size as (|antecedent|, |consequent|)."""
        return len(self.antecedent), len(self.consequent)

    @cached_property
    def items(self) -> tuple[int, ...]:
        return tuple(sorted(self.antecedent + self.consequent))

    def __str__(self) -> str:
        left = ",".join(map(str, self.antecedent))
        right = ",".join(map(str, self.consequent))
        return f"{{{left}}}=>{{{right}}}"


class BondValue(NamedTuple):
    """Bond of an itemset; ``defined`` is False when every item is absent."""

    value: Fraction
    defined: bool


def build_item_bitvectors(db: SequenceDatabase) -> dict[int, int]:
    """One bit vector per occurring item; bit sid-1 set per containing sequence."""
    vectors: dict[int, int] = {}
    for seq in db.sequences:
        bit = 1 << (seq.sid - 1)
        for item in seq.items:
            vectors[item] = vectors.get(item, 0) | bit
    return vectors


def sids_of(mask: int) -> set[int]:
    """Decode a bit vector back into a set of sids (for display and tests)."""
    sids = set()
    sid = 1
    while mask:
        if mask & 1:
            sids.add(sid)
        mask >>= 1
        sid += 1
    return sids


def itemset_support(items: Iterable[int], bitvectors: dict[int, int]) -> int:
    """Number of sequences containing every item (absent item gives 0)."""
    mask = -1
    for item in items:
        mask &= bitvectors.get(item, 0)
    if mask == -1:
        raise ValueError("support of an empty itemset is undefined")
    return mask.bit_count()


def itemset_dissup(items: Iterable[int], bitvectors: dict[int, int]) -> int:
    """Number of sequences containing at least one of the items."""
    mask = 0
    empty = True
    for item in items:
        mask |= bitvectors.get(item, 0)
        empty = False
    if empty:
        raise ValueError("disjunctive support of an empty itemset is undefined")
    return mask.bit_count()


def bond(items: Iterable[int], bitvectors: dict[int, int]) -> BondValue:
    """Local correlation of an itemset: support over disjunctive support."""
    items = tuple(items)
    dis = itemset_dissup(items, bitvectors)
    if dis == 0:
        return BondValue(Fraction(0), False)
    return BondValue(Fraction(itemset_support(items, bitvectors), dis), True)


def rule_occurs(rule: Rule, seq: Sequence) -> bool:
    """True iff the whole antecedent precedes the whole consequent in ``seq``."""
    positions = seq.positions
    max_left = 0
    for item in rule.antecedent:
        pos = positions.get(item)
        if pos is None:
            return False
        if pos > max_left:
            max_left = pos
    for item in rule.consequent:
        pos = positions.get(item)
        if pos is None or pos <= max_left:
            return False
    return True


def rule_sids(rule: Rule, db: SequenceDatabase) -> int:
    """Bit vector of the sequences supporting the rule."""
    mask = 0
    for seq in db.sequences:
        if rule_occurs(rule, seq):
            mask |= 1 << (seq.sid - 1)
    return mask


def confidence(rule_mask: int, antecedent_mask: int) -> Fraction:
    """|sids(rule)| / |sids(antecedent)|; undefined when the antecedent never occurs."""
    denom = antecedent_mask.bit_count()
    if denom == 0:
        raise UndefinedMeasureError("confidence undefined: antecedent occurs in no sequence")
    return Fraction(rule_mask.bit_count(), denom)


def lift(rule_mask: int, antecedent_mask: int, consequent_mask: int, sequence_count: int) -> Fraction:
    """Global correlation: (n * sup(rule)) / (sup(X) * sup(Y))."""
    sup_x = antecedent_mask.bit_count()
    sup_y = consequent_mask.bit_count()
    if sup_x == 0 or sup_y == 0:
        raise UndefinedMeasureError("lift undefined: a rule side occurs in no sequence")
    return Fraction(sequence_count * rule_mask.bit_count(), sup_x * sup_y)


def rule_utility(rule: Rule, db: SequenceDatabase) -> Fraction:
    """Sum, over supporting sequences, of the utilities of the rule's items."""
    scale = db.require_utilities().scale
    total = 0
    for index, seq in enumerate(db.sequences):
        if rule_occurs(rule, seq):
            grid = db.grid_item_utilities[index]
            total += sum(grid[item] for item in rule.items)
    return Fraction(total, scale)


def seu_of_item(item: int, db: SequenceDatabase) -> Fraction:
    """Sum of whole-sequence utilities over the sequences containing the item."""
    scale = db.require_utilities().scale
    total = sum(
        su
        for seq, su in zip(db.sequences, db.grid_sequence_utilities)
        if item in seq.items
    )
    return Fraction(total, scale)


def seu_of_rule(rule_mask: int, db: SequenceDatabase) -> Fraction:
    """Sum of whole-sequence utilities over the rule's supporting sequences."""
    scale = db.require_utilities().scale
    total = sum(
        su
        for seq, su in zip(db.sequences, db.grid_sequence_utilities)
        if rule_mask >> (seq.sid - 1) & 1
    )
    return Fraction(total, scale)
