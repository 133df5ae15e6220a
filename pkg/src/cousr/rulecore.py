"""Utility-lists, expansion-item classification, and co-occurrence tables.

The search grows rules one item at a time: a *left* expansion adds an item to
the antecedent, a *right* expansion adds one to the consequent. To keep the
enumeration canonical (each rule reachable exactly once), an added item must
be strictly greater than every item already on the extended side.

For a rule occurring in a sequence, an outside item is

* left-feasible  iff it is greater than the whole antecedent and positioned
  strictly before the first consequent itemset, and
* right-feasible iff it is greater than the whole consequent and positioned
  strictly after the last antecedent itemset.

``only_left`` / ``only_right`` / ``left_right`` partition the feasible items
by which of the two hold. The utility-list of a rule has one row per
supporting sequence: ``(sid, iutil, lutil, rutil, lrutil)`` where ``iutil``
is the rule's utility in that sequence and the other three are the utility
sums over the three classes. Consequences used by the miner:

* sum of ``iutil``          = rule utility; row count = rule support
* sum of all four columns   >= utility of the rule and of every descendant
  reachable by further expansions (and is itself bounded by the rule's
  sequence-estimated utility)
* sum minus ``rutil``       >= utility of every left-only descendant

Expansion rebuilds each surviving parent row incrementally: the new ``iutil``
adds the new item's utility, and class membership is re-derived from the
stored flags (constraints only ever tighten, so no sequence rescan is
needed). :func:`build_utility_list` computes the same rows from scratch; the
two paths must agree field-for-field.

All utility amounts in this module are integers on the utility table's grid
(see :attr:`cousr.seqdb.UtilityTable.scale`).

Two sparse pruning tables summarize item pairs:

* bond matrix: unordered pair -> bond of the two-item itemset; absent pair
  means the items never co-occur.
* rule-seu table ("ESUCS"): ordered pair (a, b) -> sequence-estimated
  utility of the rule a => b; absent means the rule never occurs. The table
  is asymmetric because occurrence is order-sensitive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Literal, NamedTuple

from .measures import Rule, build_item_bitvectors
from .seqdb import Sequence, SequenceDatabase

Direction = Literal["left", "right"]


class RuleAbsentError(ValueError):
    """The rule does not occur in the given sequence."""


class OrderConstraintError(ValueError):
    """Expansion item violates the canonical order constraint for its side."""


class ExpansionClasses(NamedTuple):
    only_left: frozenset[int]
    only_right: frozenset[int]
    left_right: frozenset[int]


class UtilityListRow(NamedTuple):
    """Per-sequence record of a utility-list (amounts in grid units)."""

    sid: int
    iutil: int
    lutil: int
    rutil: int
    lrutil: int


@dataclass(frozen=True)
class UtilityList:
    rule: Rule
    rows: tuple[UtilityListRow, ...]

    @property
    def support(self) -> int:
        return len(self.rows)

    @cached_property
    def utility(self) -> int:
        return sum(row.iutil for row in self.rows)

    @cached_property
    def total(self) -> int:
        return sum(row.iutil + row.lutil + row.rutil + row.lrutil for row in self.rows)

    @cached_property
    def left_total(self) -> int:
        return sum(row.iutil + row.lutil + row.lrutil for row in self.rows)

    @cached_property
    def sids_mask(self) -> int:
        mask = 0
        for row in self.rows:
            mask |= 1 << (row.sid - 1)
        return mask


def ul_total(ul: UtilityList) -> int:
    """Upper bound on the utility of the rule and all of its expansions."""
    return ul.total


def ul_left_total(ul: UtilityList) -> int:
    """Upper bound on the utility of the rule's left-only expansions."""
    return ul.left_total


def _classification(rule: Rule, seq: Sequence):
    """(max antecedent pos, min consequent pos, {item: (pos, left_ok, right_ok)}).

    Raises RuleAbsentError when the rule does not occur in the sequence.
    """
    positions = seq.positions
    try:
        max_pos_x = max(positions[i] for i in rule.antecedent)
        min_pos_y = min(positions[i] for i in rule.consequent)
    except KeyError:
        raise RuleAbsentError(f"rule {rule} does not occur in sequence {seq.sid}") from None
    if max_pos_x >= min_pos_y:
        raise RuleAbsentError(f"rule {rule} does not occur in sequence {seq.sid}")
    last_x = rule.antecedent[-1]
    last_y = rule.consequent[-1]
    members = set(rule.antecedent)
    members.update(rule.consequent)
    flags: dict[int, tuple[int, bool, bool]] = {}
    for item, pos in positions.items():
        if item in members:
            continue
        left_ok = item > last_x and pos < min_pos_y
        right_ok = item > last_y and pos > max_pos_x
        if left_ok or right_ok:
            flags[item] = (pos, left_ok, right_ok)
    return max_pos_x, min_pos_y, flags


def classify_expansion_items(rule: Rule, seq: Sequence) -> ExpansionClasses:
    """Partition the items that can extend the rule in this sequence."""
    _, _, flags = _classification(rule, seq)
    only_left, only_right, left_right = set(), set(), set()
    for item, (_, left_ok, right_ok) in flags.items():
        if left_ok and right_ok:
            left_right.add(item)
        elif left_ok:
            only_left.add(item)
        else:
            only_right.add(item)
    return ExpansionClasses(frozenset(only_left), frozenset(only_right), frozenset(left_right))


def _class_sums(flags: dict[int, tuple[int, bool, bool]], grid: dict[int, int]):
    lutil = rutil = lrutil = 0
    for item, (_, left_ok, right_ok) in flags.items():
        value = grid[item]
        if left_ok:
            if right_ok:
                lrutil += value
            else:
                lutil += value
        else:
            rutil += value
    return lutil, rutil, lrutil


def build_utility_list(rule: Rule, db: SequenceDatabase, sids: int | None = None) -> UtilityList:
    """Build a rule's utility-list from scratch by scanning the database.

    ``sids`` optionally restricts the scan to a known supporting-sequence
    mask (the rows are identical either way).
    """
    db.require_utilities()
    rows: list[UtilityListRow] = []
    rule_items = rule.items
    if sids is None:
        indices = range(len(db.sequences))
    else:
        index_by_sid = db.index_by_sid
        indices = []
        mask = sids
        while mask:
            low = mask & -mask
            indices.append(index_by_sid[low.bit_length()])
            mask ^= low
    for index in indices:
        seq = db.sequences[index]
        try:
            _, _, flags = _classification(rule, seq)
        except RuleAbsentError:
            continue
        grid = db.grid_item_utilities[index]
        iutil = sum(grid[item] for item in rule_items)
        lutil, rutil, lrutil = _class_sums(flags, grid)
        rows.append(UtilityListRow(seq.sid, iutil, lutil, rutil, lrutil))
    return UtilityList(rule=rule, rows=tuple(rows))


def build_initial_utility_list(rule: Rule, db: SequenceDatabase) -> UtilityList:
    """Utility-list of a 1*1 rule (the search's starting points)."""
    if rule.size != (1, 1):
        raise ValueError(f"expected a 1*1 rule, got size {rule.size}")
    return build_utility_list(rule, db)


def _expanded_sums(
    flags: dict[int, tuple[int, bool, bool]],
    grid: dict[int, int],
    item: int,
    pos_item: int,
    direction: Direction,
    max_pos_x: int,
    min_pos_y: int,
):
    """Class utility sums for the expanded rule, derived from parent flags.

    A right expansion tightens the positional bound for left-feasibility
    (the first consequent itemset may move earlier) and the order bound for
    right-feasibility; a left expansion tightens the mirror pair. Items can
    migrate between classes (e.g. left_right -> only_left) but never enter
    from outside the parent's feasible set.
    """
    if direction == "right":
        bound = min(min_pos_y, pos_item)
    else:
        bound = max(max_pos_x, pos_item)
    lutil = rutil = lrutil = 0
    for other, (pos, left_ok, right_ok) in flags.items():
        if other == item:
            continue
        if direction == "right":
            new_left = left_ok and pos < bound
            new_right = right_ok and other > item
        else:
            new_left = left_ok and other > item
            new_right = right_ok and pos > bound
        if new_left:
            if new_right:
                lrutil += grid[other]
            else:
                lutil += grid[other]
        elif new_right:
            rutil += grid[other]
    return lutil, rutil, lrutil


def expanded_rule(rule: Rule, item: int, direction: Direction) -> Rule:
    """The rule grown by one item, enforcing the canonical order constraint."""
    if item in rule.items:
        raise OrderConstraintError(f"item {item} is already part of {rule}")
    if direction == "left":
        if item <= rule.antecedent[-1]:
            raise OrderConstraintError(
                f"left expansion item {item} must exceed the antecedent of {rule}"
            )
        return Rule(rule.antecedent + (item,), rule.consequent)
    if direction == "right":
        if item <= rule.consequent[-1]:
            raise OrderConstraintError(
                f"right expansion item {item} must exceed the consequent of {rule}"
            )
        return Rule(rule.antecedent, rule.consequent + (item,))
    raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")


def expand_utility_list(
    parent: UtilityList, item: int, direction: Direction, db: SequenceDatabase
) -> UtilityList:
    """Incrementally derive the expanded rule's utility-list from the parent.

    Rows survive only where the new item is feasible for the chosen
    direction; the new ``iutil`` is the parent's plus the item's utility,
    and the class sums are re-derived from the parent-row flags.
    """
    new_rule = expanded_rule(parent.rule, item, direction)
    db.require_utilities()
    by_index = {seq.sid: index for index, seq in enumerate(db.sequences)}
    want_right = direction == "right"
    rows: list[UtilityListRow] = []
    for row in parent.rows:
        index = by_index[row.sid]
        seq = db.sequences[index]
        max_pos_x, min_pos_y, flags = _classification(parent.rule, seq)
        entry = flags.get(item)
        if entry is None or not entry[2 if want_right else 1]:
            continue
        grid = db.grid_item_utilities[index]
        lutil, rutil, lrutil = _expanded_sums(
            flags, grid, item, entry[0], direction, max_pos_x, min_pos_y
        )
        rows.append(UtilityListRow(row.sid, row.iutil + grid[item], lutil, rutil, lrutil))
    return UtilityList(rule=new_rule, rows=tuple(rows))


def build_bond_matrix(
    db: SequenceDatabase,
    items: Iterable[int] | None = None,
    bitvectors: dict[int, int] | None = None,
) -> dict[tuple[int, int], Fraction]:
    """Bond per co-occurring unordered item pair, keyed (smaller, larger)."""
    if bitvectors is None:
        bitvectors = build_item_bitvectors(db)
    wanted = set(items) if items is not None else None
    pair_masks: dict[tuple[int, int], int] = {}
    for seq in db.sequences:
        bit = 1 << (seq.sid - 1)
        present = sorted(
            item for item in seq.items if wanted is None or item in wanted
        )
        for i, a in enumerate(present):
            for b in present[i + 1:]:
                key = (a, b)
                pair_masks[key] = pair_masks.get(key, 0) | bit
    matrix = {}
    for (a, b), mask in pair_masks.items():
        union = bitvectors[a] | bitvectors[b]
        matrix[(a, b)] = Fraction(mask.bit_count(), union.bit_count())
    return matrix


class PairScan(NamedTuple):
    """Occurrence summary of a 1*1 rule: supporting-sid mask and rule SEU."""

    sids_mask: int
    seu: int


def scan_rule_pairs(
    db: SequenceDatabase, items: Iterable[int] | None = None
) -> dict[tuple[int, int], PairScan]:
    """One database scan over all ordered pairs (a before b, distinct itemsets).

    Yields, per pair, the supporting-sequence mask and the sequence-estimated
    utility of the rule a => b in grid units. This single scan feeds both the
    initial 1*1 rule enumeration and the rule-seu pruning table.
    """
    db.require_utilities()
    wanted = set(items) if items is not None else None
    pairs: dict[tuple[int, int], list[int]] = {}
    for index, seq in enumerate(db.sequences):
        bit = 1 << (seq.sid - 1)
        su = db.grid_sequence_utilities[index]
        earlier: list[int] = []
        for itemset in seq.itemsets:
            current = [
                item for item, _ in itemset if wanted is None or item in wanted
            ]
            for b in current:
                for a in earlier:
                    entry = pairs.get((a, b))
                    if entry is None:
                        pairs[(a, b)] = [bit, su]
                    else:
                        entry[0] |= bit
                        entry[1] += su
            earlier.extend(current)
    return {pair: PairScan(mask, seu) for pair, (mask, seu) in pairs.items()}


def build_esucs(
    db: SequenceDatabase, items: Iterable[int] | None = None
) -> dict[tuple[int, int], int]:
    """Ordered pair (a, b) -> SEU of the rule a => b, in grid units."""
    return {pair: scan.seu for pair, scan in scan_rule_pairs(db, items).items()}


def dump_utility_list(ul: UtilityList) -> str:
    """Tab-separated debug dump: one row per supporting sequence."""
    lines = [f"# {ul.rule}", "sid\tiutil\tlutil\trutil\tlrutil"]
    lines.extend(
        f"{r.sid}\t{r.iutil}\t{r.lutil}\t{r.rutil}\t{r.lrutil}" for r in ul.rows
    )
    return "\n".join(lines) + "\n"


def dump_bond_matrix(matrix: dict[tuple[int, int], Fraction]) -> str:
    lines = ["a\tb\tbond"]
    lines.extend(f"{a}\t{b}\t{matrix[(a, b)]}" for a, b in sorted(matrix))
    return "\n".join(lines) + "\n"


def dump_esucs(table: dict[tuple[int, int], int]) -> str:
    lines = ["a\tb\tseu"]
    lines.extend(f"{a}\t{b}\t{table[(a, b)]}" for a, b in sorted(table))
    return "\n".join(lines) + "\n"
