"""Depth-first miner for correlated high-utility sequential rules.

A rule qualifies when it clears four inclusive thresholds at once: utility
(``min_util``), confidence (``min_conf``), bond of both sides (``min_bond``),
and lift (``min_lift``). The search:

1. drops items whose sequence-estimated utility (SEU) is below ``min_util``
   and rebuilds the database without them (strategy 1);
2. scans once for all occurring 1*1 rules, recording per ordered pair the
   supporting sequences and the rule SEU (which doubles as the rule-seu
   pruning table), and keeps the pairs with SEU >= ``min_util``
   (strategy 2);
3. builds those rules' utility-lists and explores expansions depth-first,
   right (consequent) expansions first, then left; a left expansion is never
   followed by a right one, which makes the enumeration canonical.

Candidate expansions are filtered, in order, by the rule-seu table
(strategy 7, toggleable), the pairwise bond matrix (strategy 6, toggleable),
and the exact bond of the extended side (strategy 3). Recursion is gated by
the utility-list bounds: the four-column sum for right subtrees (strategy 4)
and the sum without ``rutil`` for left subtrees (strategy 5). Strategies 6
and 7 are sound, so toggling them never changes the mined rule set, only the
number of utility-lists constructed.

The optional confidence gate (``conf_prune``) skips right recursion below
``min_conf``. It is off by default and NOT output-preserving under this
enumeration order: a low-confidence consequent extension can still have
high-confidence left descendants, because left expansions shrink the
antecedent's support. See the counterexample in the test suite.

Threshold comparisons are exact: utilities are compared on the utility
table's integer grid and the ratio measures by integer cross-multiplication.
Lift is always computed against the sequence count of the database handed to
:func:`mine`, not of the filtered one, since item filtering may drop
sequences.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from math import ceil
from typing import NamedTuple

from . import measures, rulecore
from .measures import Rule
from .rulecore import UtilityList
from .seqdb import Sequence, SequenceDatabase

VARIANTS = {
    "base": (False, False),
    "s6": (True, False),
    "s7": (False, True),
    "s6s7": (True, True),
}


class ConfigError(ValueError):
    """Mining configuration outside its documented ranges."""


def as_fraction(value) -> Fraction:
    """Exact threshold coercion; floats go through their decimal repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            pass
        try:
            return Fraction(Decimal(value))
        except (InvalidOperation, ValueError):
            raise ConfigError(f"cannot interpret threshold {value!r} as a number") from None
    if isinstance(value, Decimal):
        return Fraction(value)
    raise ConfigError(f"cannot interpret threshold {value!r} as a number")


@dataclass
class MinerConfig:
    """Thresholds plus strategy toggles.

    ``bond_matrix_prune`` enables strategy 6, ``esucs_prune`` strategy 7;
    both default on (the full algorithm). ``max_rule_side`` caps the item
    count of each rule side. ``record_prune_events`` keeps a log of every
    pruned subtree root for soundness audits (testing only).
    """

    min_util: Fraction = Fraction(0)
    min_conf: Fraction = Fraction(0)
    min_bond: Fraction = Fraction(0)
    min_lift: Fraction = Fraction(0)
    bond_matrix_prune: bool = True
    esucs_prune: bool = True
    conf_prune: bool = False
    max_rule_side: int | None = None
    record_prune_events: bool = False

    def __post_init__(self) -> None:
        self.min_util = as_fraction(self.min_util)
        self.min_conf = as_fraction(self.min_conf)
        self.min_bond = as_fraction(self.min_bond)
        self.min_lift = as_fraction(self.min_lift)
        if self.min_util < 0:
            raise ConfigError(f"min_util must be >= 0, got {self.min_util}")
        if not 0 <= self.min_conf <= 1:
            raise ConfigError(f"min_conf must be in [0, 1], got {self.min_conf}")
        if not 0 <= self.min_bond <= 1:
            raise ConfigError(f"min_bond must be in [0, 1], got {self.min_bond}")
        if self.min_lift < 0:
            raise ConfigError(f"min_lift must be >= 0, got {self.min_lift}")
        if self.max_rule_side is not None and self.max_rule_side < 1:
            raise ConfigError(f"max_rule_side must be >= 1, got {self.max_rule_side}")

    @classmethod
    def for_variant(cls, variant: str, **kwargs) -> "MinerConfig":
        try:
            s6, s7 = VARIANTS[variant]
        except KeyError:
            raise ConfigError(
                f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}"
            ) from None
        return cls(bond_matrix_prune=s6, esucs_prune=s7, **kwargs)


class PruneEvent(NamedTuple):
    """A pruned subtree root: what was cut and by which strategy.

    Kinds: ``s1`` (item; antecedent holds the item), ``s2`` (1*1 rule and
    all expansions), ``s3/s6/s7-right`` (candidate rule plus all its
    expansions), ``s3/s6/s7-left`` (candidate rule plus left expansions),
    ``s4`` (right subtree of the rule), ``s5`` (left subtree), ``conf``
    (right subtree, confidence gate).
    """

    kind: str
    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]


@dataclass
class MiningStats:
    """Counters mirroring the pruning strategies (s1..s7) plus build totals.

    ``utility_list_rows`` counts every utility-list tuple allocated and
    serves as the memory proxy reported by the CLI.
    """

    promising_items: int = 0
    initial_rules_kept: int = 0
    pruned_s1: int = 0
    pruned_s2: int = 0
    pruned_s3: int = 0
    pruned_s4: int = 0
    pruned_s5: int = 0
    pruned_s6: int = 0
    pruned_s7: int = 0
    pruned_conf: int = 0
    utility_lists_built: int = 0
    utility_list_rows: int = 0
    wall_ms: float = 0.0
    prune_events: list[PruneEvent] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "promising_items": self.promising_items,
            "initial_rules_kept": self.initial_rules_kept,
            "pruned_s1": self.pruned_s1,
            "pruned_s2": self.pruned_s2,
            "pruned_s3": self.pruned_s3,
            "pruned_s4": self.pruned_s4,
            "pruned_s5": self.pruned_s5,
            "pruned_s6": self.pruned_s6,
            "pruned_s7": self.pruned_s7,
            "pruned_conf": self.pruned_conf,
            "utility_lists_built": self.utility_lists_built,
            "utility_list_rows": self.utility_list_rows,
            "wall_ms": self.wall_ms,
        }


@dataclass(frozen=True)
class MinedRule:
    """An emitted rule with all of its reported measures (exact rationals)."""

    rule: Rule
    utility: Fraction
    support: int
    confidence: Fraction
    lift: Fraction
    bond_antecedent: Fraction
    bond_consequent: Fraction

    @property
    def sort_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.rule.antecedent, self.rule.consequent)


@dataclass(frozen=True)
class MiningResult:
    rules: tuple[MinedRule, ...]
    stats: MiningStats

    def rule_set(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        return {mined.sort_key for mined in self.rules}


@dataclass
class RuleContext:
    """A search node: the rule, its utility-list, and its side bit vectors.

    ``sids_x``/``sids_y`` are the intersection masks (itemset support) of the
    antecedent/consequent items; ``sids_or_x``/``sids_or_y`` the union masks
    (disjunctive support).
    """

    rule: Rule
    ul: UtilityList
    sids_x: int
    sids_y: int
    sids_or_x: int
    sids_or_y: int


def filter_unpromising_items(
    db: SequenceDatabase, min_util
) -> tuple[frozenset[int], SequenceDatabase]:
    """Drop items whose SEU is below the threshold (strategy 1).

    Emptied itemsets and sequences are dropped too; surviving sequences keep
    their original sids. Returns (promising items, filtered database).
    """
    table = db.require_utilities()
    threshold = ceil(as_fraction(min_util) * table.scale)
    seu: dict[int, int] = {}
    for seq, su in zip(db.sequences, db.grid_sequence_utilities):
        for item in seq.items:
            seu[item] = seu.get(item, 0) + su
    promising = frozenset(item for item, value in seu.items() if value >= threshold)
    if len(promising) == len(seu):
        return promising, db
    kept: list[Sequence] = []
    for seq in db.sequences:
        itemsets = tuple(
            pruned
            for itemset in seq.itemsets
            if (pruned := tuple(pair for pair in itemset if pair[0] in promising))
        )
        if itemsets:
            kept.append(Sequence(sid=seq.sid, itemsets=itemsets))
    return promising, replace(db, sequences=tuple(kept))


def enumerate_initial_rules(db: SequenceDatabase, min_util) -> list[RuleContext]:
    """All promising 1*1 rules of a (filtered) database, with built contexts."""
    threshold = ceil(as_fraction(min_util) * db.require_utilities().scale)
    bitvectors = measures.build_item_bitvectors(db)
    contexts = []
    pairs = rulecore.scan_rule_pairs(db)
    for (a, b) in sorted(pairs):
        scan = pairs[(a, b)]
        if scan.seu < threshold:
            continue
        rule = Rule((a,), (b,))
        ul = rulecore.build_utility_list(rule, db, sids=scan.sids_mask)
        contexts.append(
            RuleContext(rule, ul, bitvectors[a], bitvectors[b], bitvectors[a], bitvectors[b])
        )
    return contexts


class _Search:
    """Mutable search state shared across one mine() run."""

    def __init__(self, db: SequenceDatabase, config: MinerConfig, sequence_count: int,
                 bitvectors, bond_matrix, pair_scan, stats: MiningStats):
        self.config = config
        self.n = sequence_count
        self.scale = db.require_utilities().scale
        self.bitvectors = bitvectors
        self.bond_matrix = bond_matrix
        self.pair_scan = pair_scan
        self.stats = stats
        self.emitted: list[MinedRule] = []
        self.min_util_grid = ceil(config.min_util * self.scale)
        self.conf_num = config.min_conf.numerator
        self.conf_den = config.min_conf.denominator
        self.bond_num = config.min_bond.numerator
        self.bond_den = config.min_bond.denominator
        self.lift_num = config.min_lift.numerator
        self.lift_den = config.min_lift.denominator
        # sid -> (sequence, grid utility map), covering the filtered database
        self.per_sid = {
            seq.sid: (seq, db.grid_item_utilities[index])
            for index, seq in enumerate(db.sequences)
        }

    # -- threshold checks (exact integer arithmetic) --

    def _conf_ok(self, sup_rule: int, sup_x: int) -> bool:
        return sup_rule * self.conf_den >= self.conf_num * sup_x

    def _lift_ok(self, sup_rule: int, sup_x: int, sup_y: int) -> bool:
        return self.n * sup_rule * self.lift_den >= self.lift_num * sup_x * sup_y

    def _bond_ok(self, sup: int, dissup: int) -> bool:
        return sup * self.bond_den >= self.bond_num * dissup

    def _record(self, kind: str, rule: Rule) -> None:
        if self.config.record_prune_events:
            self.stats.prune_events.append(PruneEvent(kind, rule.antecedent, rule.consequent))

    # -- node processing --

    def handle(self, ctx: RuleContext, left_only: bool) -> None:
        ul = ctx.ul
        sup_rule = ul.support
        sup_x = ctx.sids_x.bit_count()
        sup_y = ctx.sids_y.bit_count()
        conf_ok = self._conf_ok(sup_rule, sup_x)
        if (
            ul.utility >= self.min_util_grid
            and conf_ok
            and self._lift_ok(sup_rule, sup_x, sup_y)
        ):
            self.emitted.append(
                MinedRule(
                    rule=ctx.rule,
                    utility=Fraction(ul.utility, self.scale),
                    support=sup_rule,
                    confidence=Fraction(sup_rule, sup_x),
                    lift=Fraction(self.n * sup_rule, sup_x * sup_y),
                    bond_antecedent=Fraction(sup_x, ctx.sids_or_x.bit_count()),
                    bond_consequent=Fraction(sup_y, ctx.sids_or_y.bit_count()),
                )
            )
        cap = self.config.max_rule_side
        want_right = False
        if not left_only and (cap is None or len(ctx.rule.consequent) < cap):
            if ul.total < self.min_util_grid:
                self.stats.pruned_s4 += 1
                self._record("s4", ctx.rule)
            elif self.config.conf_prune and not conf_ok:
                self.stats.pruned_conf += 1
                self._record("conf", ctx.rule)
            else:
                want_right = True
        want_left = False
        if cap is None or len(ctx.rule.antecedent) < cap:
            if ul.left_total < self.min_util_grid:
                self.stats.pruned_s5 += 1
                self._record("s5", ctx.rule)
            else:
                want_left = True
        if not (want_right or want_left):
            return
        # classify every supporting row once; both directions reuse it
        rows_data = []
        for row in ul.rows:
            seq, grid = self.per_sid[row.sid]
            max_pos_x, min_pos_y, flags = rulecore._classification(ctx.rule, seq)
            rows_data.append((row, grid, max_pos_x, min_pos_y, flags))
        if want_right:
            self.expand(ctx, rows_data, "right")
        if want_left:
            self.expand(ctx, rows_data, "left")

    def expand(self, ctx: RuleContext, rows_data, direction: str) -> None:
        right = direction == "right"
        flag_index = 2 if right else 1
        # invert rows_data: candidate item -> the rows where it is feasible
        item_rows: dict[int, list] = {}
        for data in rows_data:
            for item, entry in data[4].items():
                if entry[flag_index]:
                    item_rows.setdefault(item, []).append((data, entry[0]))
        if not item_rows:
            return
        recording = self.config.record_prune_events
        last_x = ctx.rule.antecedent[-1]
        last_y = ctx.rule.consequent[-1]
        for item in sorted(item_rows):
            if self.config.esucs_prune:
                key = (last_x, item) if right else (item, last_y)
                scan = self.pair_scan.get(key)
                if scan is None or scan.seu < self.min_util_grid:
                    self.stats.pruned_s7 += 1
                    if recording:
                        self._record(f"s7-{direction}", self._candidate_rule(ctx.rule, item, right))
                    continue
            if self.bond_matrix is not None:
                anchor = last_y if right else last_x
                pair = (anchor, item) if anchor < item else (item, anchor)
                value = self.bond_matrix.get(pair)
                if value is None or value < self.config.min_bond:
                    self.stats.pruned_s6 += 1
                    if recording:
                        self._record(f"s6-{direction}", self._candidate_rule(ctx.rule, item, right))
                    continue
            vector = self.bitvectors[item]
            if right:
                new_side = ctx.sids_y & vector
                new_or = ctx.sids_or_y | vector
            else:
                new_side = ctx.sids_x & vector
                new_or = ctx.sids_or_x | vector
            if not self._bond_ok(new_side.bit_count(), new_or.bit_count()):
                self.stats.pruned_s3 += 1
                if recording:
                    self._record(f"s3-{direction}", self._candidate_rule(ctx.rule, item, right))
                continue
            new_rows = []
            for (row, grid, max_pos_x, min_pos_y, flags), pos_item in item_rows[item]:
                lutil, rutil, lrutil = rulecore._expanded_sums(
                    flags, grid, item, pos_item, direction, max_pos_x, min_pos_y
                )
                new_rows.append(
                    rulecore.UtilityListRow(
                        row.sid, row.iutil + grid[item], lutil, rutil, lrutil
                    )
                )
            new_rule = self._candidate_rule(ctx.rule, item, right)
            ul = UtilityList(rule=new_rule, rows=tuple(new_rows))
            self.stats.utility_lists_built += 1
            self.stats.utility_list_rows += len(new_rows)
            if right:
                child = RuleContext(new_rule, ul, ctx.sids_x, new_side, ctx.sids_or_x, new_or)
            else:
                child = RuleContext(new_rule, ul, new_side, ctx.sids_y, new_or, ctx.sids_or_y)
            self.handle(child, left_only=not right)

    @staticmethod
    def _candidate_rule(rule: Rule, item: int, right: bool) -> Rule:
        if right:
            return Rule(rule.antecedent, rule.consequent + (item,))
        return Rule(rule.antecedent + (item,), rule.consequent)


def mine(db: SequenceDatabase, config: MinerConfig) -> MiningResult:
    """Mine the complete set of correlated high-utility sequential rules.

    The result is independent of the strategy-6/7 toggles; the stats are not.
    """
    if not isinstance(config, MinerConfig):
        raise ConfigError(f"expected a MinerConfig, got {type(config).__name__}")
    db.require_utilities()
    started = time.perf_counter()
    stats = MiningStats()
    sequence_count = db.sequence_count

    promising, filtered = filter_unpromising_items(db, config.min_util)
    stats.promising_items = len(promising)
    stats.pruned_s1 = len(db.item_universe) - len(promising)
    if config.record_prune_events:
        for item in sorted(db.item_universe - promising):
            stats.prune_events.append(PruneEvent("s1", (item,), ()))

    bitvectors = measures.build_item_bitvectors(filtered)
    bond_matrix = (
        rulecore.build_bond_matrix(filtered, bitvectors=bitvectors)
        if config.bond_matrix_prune
        else None
    )
    pair_scan = rulecore.scan_rule_pairs(filtered)
    search = _Search(filtered, config, sequence_count, bitvectors, bond_matrix, pair_scan, stats)

    roots = []
    for (a, b) in sorted(pair_scan):
        scan = pair_scan[(a, b)]
        if scan.seu < search.min_util_grid:
            stats.pruned_s2 += 1
            if config.record_prune_events:
                stats.prune_events.append(PruneEvent("s2", (a,), (b,)))
            continue
        rule = Rule((a,), (b,))
        ul = rulecore.build_utility_list(rule, filtered, sids=scan.sids_mask)
        stats.utility_lists_built += 1
        stats.utility_list_rows += len(ul.rows)
        roots.append(
            RuleContext(rule, ul, bitvectors[a], bitvectors[b], bitvectors[a], bitvectors[b])
        )
    stats.initial_rules_kept = len(roots)

    for ctx in roots:
        search.handle(ctx, left_only=False)

    rules = tuple(sorted(search.emitted, key=lambda m: m.sort_key))
    if len({m.sort_key for m in rules}) != len(rules):
        raise AssertionError("canonical enumeration produced a duplicate rule")
    stats.wall_ms = (time.perf_counter() - started) * 1000.0
    return MiningResult(rules=rules, stats=stats)
