"""Intra-firewall audit: exclusion, redundancy testing, and policy rewriting.

``policy_rewriting`` transforms a priority-ordered rule sequence into an
equivalent set whose rules are pairwise packet-disjoint, removing shadowed
and redundant rules and reporting every removal.  After the transformation,
rule order no longer matters and re-running it changes nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import (
    ConjunctiveCondition,
    Decision,
    FilteringRule,
    NUM_ATTRS,
    attr_difference,
    attr_intersect,
)


class RemovalReason(enum.Enum):
    SHADOWING = "shadowing"
    REDUNDANCY = "redundancy"


class AuditPhase(enum.Enum):
    PHASE1 = "phase1"
    PHASE2 = "phase2"


@dataclass(frozen=True)
class RemovedRule:
    rule_id: str
    reason: RemovalReason
    phase: AuditPhase


@dataclass(frozen=True)
class KeptRule:
    rule_id: str
    transformed: bool


@dataclass(frozen=True)
class RewriteReport:
    """Disposition of every input rule: removed (with reason) or kept."""

    removed: tuple[RemovedRule, ...]
    kept: tuple[KeptRule, ...]

    @property
    def removed_ids(self) -> tuple[str, ...]:
        return tuple(r.rule_id for r in self.removed)

    @property
    def kept_ids(self) -> tuple[str, ...]:
        return tuple(k.rule_id for k in self.kept)


def _exclude_conjuncts(current: tuple[ConjunctiveCondition, ...],
                       excluded: tuple[ConjunctiveCondition, ...],
                       ) -> tuple[ConjunctiveCondition, ...]:
    # Left fold: subtracting each conjunct of `excluded` in turn yields the
    # exact set difference.  The decomposition terms are pairwise disjoint,
    # so no dedup pass is needed.
    result = current
    for a in excluded:
        nxt: list[ConjunctiveCondition] = []
        for c in result:
            inter = [attr_intersect(ca, aa) for ca, aa in zip(c.attrs, a.attrs)]
            if any(s.is_empty for s in inter):
                nxt.append(c)
                continue
            for i in range(NUM_ATTRS):
                rest = attr_difference(c.attrs[i], a.attrs[i])
                if rest.is_empty:
                    continue
                attrs = tuple(inter[j] if j < i else
                              rest if j == i else c.attrs[j]
                              for j in range(NUM_ATTRS))
                nxt.append(ConjunctiveCondition(attrs))
        result = tuple(nxt)
    return result


def exclusion(b: FilteringRule, a: FilteringRule) -> FilteringRule:
    """Rule with b's decision whose packets are exactly packets(b) \\ packets(a)."""
    return FilteringRule(id=b.id, decision=b.decision,
                         cnd=_exclude_conjuncts(b.cnd, a.cnd))


def test_redundancy(rules, r: FilteringRule) -> bool:
    """True iff the packets of r are covered by the union of `rules`.

    Sequentially excludes each rule from a working copy of r and succeeds as
    soon as the remainder empties.  Callers pass only rules with r's decision.
    """
    temp = r.cnd
    for other in rules:
        temp = _exclude_conjuncts(temp, other.cnd)
        if not temp:
            return True
    return False


class _Entry:
    __slots__ = ("rule_id", "decision", "cnd", "original", "reason", "phase")

    def __init__(self, rule: FilteringRule):
        self.rule_id = rule.id
        self.decision = rule.decision
        self.cnd = rule.cnd
        self.original = rule.cnd
        self.reason: RemovalReason | None = None
        self.phase: AuditPhase | None = None

    @property
    def removed(self) -> bool:
        return self.reason is not None

    def as_rule(self) -> FilteringRule:
        return FilteringRule(id=self.rule_id, decision=self.decision,
                             cnd=self.cnd)

    def remove(self, reason: RemovalReason, phase: AuditPhase) -> None:
        self.cnd = ()
        self.reason = reason
        self.phase = phase


def policy_rewriting(rules) -> tuple[tuple[FilteringRule, ...], RewriteReport]:
    """Two-phase audit of a first-match rule sequence.

    Phase 1 excludes every rule from all lower-priority rules with the other
    decision, removing rules that empty as shadowed.  Phase 2 removes rules
    covered by later same-decision rules as redundant, and otherwise excludes
    them from later same-decision rules, catching same-decision shadowing.

    Returns the surviving rules (original relative order, flags clear) and a
    report covering every input rule.  Input rules are not modified.
    """
    entries = [_Entry(r) for r in rules]
    seen: set[str] = set()
    for e in entries:
        if not e.cnd:
            raise ValueError(f"rule {e.rule_id} has an empty condition")
        if e.rule_id in seen:
            raise ValueError(f"duplicate rule id {e.rule_id}")
        seen.add(e.rule_id)

    n = len(entries)

    # Phase 1: shadowing between rules with different decisions.
    for i in range(n - 1):
        ei = entries[i]
        if ei.removed:
            continue
        for j in range(i + 1, n):
            ej = entries[j]
            if ej.removed or ej.decision == ei.decision:
                continue
            ej.cnd = _exclude_conjuncts(ej.cnd, ei.cnd)
            if not ej.cnd:
                ej.remove(RemovalReason.SHADOWING, AuditPhase.PHASE1)

    # Phase 2: redundancy, then shadowing between same-decision rules.
    for i in range(n - 1):
        ei = entries[i]
        if ei.removed:
            continue
        later = [entries[k] for k in range(i + 1, n)
                 if not entries[k].removed and
                 entries[k].decision == ei.decision]
        if later and test_redundancy([e.as_rule() for e in later],
                                     ei.as_rule()):
            ei.remove(RemovalReason.REDUNDANCY, AuditPhase.PHASE2)
            continue
        for ej in later:
            ej.cnd = _exclude_conjuncts(ej.cnd, ei.cnd)
            if not ej.cnd:
                ej.remove(RemovalReason.SHADOWING, AuditPhase.PHASE2)

    output = tuple(e.as_rule() for e in entries if not e.removed)
    report = RewriteReport(
        removed=tuple(RemovedRule(e.rule_id, e.reason, e.phase)
                      for e in entries if e.removed),
        kept=tuple(KeptRule(e.rule_id, e.cnd != e.original)
                   for e in entries if not e.removed),
    )
    return output, report
