"""Folding per-firewall configurations into one global policy.

The fold walks every firewall's (already rewritten) rules in input order.
Each accept pulls the correlated accepts of every firewall along the minimal
route into the global sequence, restricted to the driving zone pair; each
deny must sit on the most-upstream firewall of the route and is kept there.
Any inter-firewall anomaly encountered on the way aborts the fold — a global
policy is only produced for anomaly-free setups.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import (
    Decision,
    DomainConfig,
    FilteringRule,
    rules_correlated,
    with_zone_addresses,
)
from .rewriting import policy_rewriting
from .topology import (
    AmbiguousRouteError,
    NoRouteError,
    Topology,
    TopologyValidationError,
    Zone,
    uncovered_addresses,
    unique_minimal_route,
    validate_topology,
    zones_intersecting,
)


class AnomalyKind(enum.Enum):
    IRRELEVANCE = "irrelevance"
    MISCONNECTION = "misconnection"
    SHADOWING = "shadowing"
    REDUNDANCY = "redundancy"
    UNZONED_ADDRESS = "unzoned_address"
    NO_ROUTE = "no_route"
    AMBIGUOUS_ROUTE = "ambiguous_route"


@dataclass(frozen=True)
class AggregationFinding:
    """One classified inter-firewall anomaly (or topology diagnostic)."""

    kind: AnomalyKind
    firewall: str
    rule_id: str
    zone_pair: tuple[str, str] | None
    witnesses: tuple[str, ...] = ()

    def describe(self) -> str:
        parts = [f"{self.kind.value}: rule {self.rule_id} on {self.firewall}"]
        if self.zone_pair:
            parts.append(f"for zones {self.zone_pair[0]} -> {self.zone_pair[1]}")
        if self.witnesses:
            parts.append(f"(conflicts with {', '.join(self.witnesses)})")
        return " ".join(parts)


class AggregationError(Exception):
    """Raised by aggregate() on the first anomaly encountered."""

    def __init__(self, finding: AggregationFinding):
        self.finding = finding
        super().__init__(finding.describe())


@dataclass(frozen=True)
class GlobalPolicy:
    """Zone-aligned global rule set produced by a successful fold.

    zone_pairs and provenance run parallel to rules; provenance records the
    (firewall, rule id) each global rule was folded from.
    """

    rules: tuple[FilteringRule, ...]
    zone_pairs: tuple[tuple[str, str], ...]
    provenance: tuple[tuple[str, str], ...]
    domains: DomainConfig


@dataclass
class _Append:
    decision: Decision
    cnd: tuple
    zone_pair: tuple[str, str]
    origin: tuple[str, str]


def _live_rules(rewritten, fw_name, consumed):
    # Firewalls absent from the scanned set contribute no rules.
    return [r for r in rewritten.get(fw_name, ())
            if (fw_name, r.id) not in consumed]


def _process_pair(fw_name, r1, z1: Zone, z2: Zone, t, rewritten, consumed):
    """Classify one (rule, zone pair) step of the fold.

    Returns (finding, appends, consumes); exactly one of finding / appends
    is meaningful.  Appends are only committed by the caller when the pair
    is anomaly-free, mirroring the abort semantics of the fold.
    """
    pair = (z1.name, z2.name)
    if z1.name == z2.name:
        return AggregationFinding(AnomalyKind.IRRELEVANCE, fw_name, r1.id,
                                  pair), [], set()
    try:
        mr = unique_minimal_route(t, z1, z2)
    except NoRouteError:
        return AggregationFinding(AnomalyKind.NO_ROUTE, fw_name, r1.id,
                                  pair), [], set()
    except AmbiguousRouteError:
        return AggregationFinding(AnomalyKind.AMBIGUOUS_ROUTE, fw_name, r1.id,
                                  pair), [], set()
    if fw_name not in mr:
        return AggregationFinding(AnomalyKind.IRRELEVANCE, fw_name, r1.id,
                                  pair), [], set()

    position = {name: i for i, name in enumerate(mr.firewalls)}
    appends: list[_Append] = []
    consumes: set[tuple[str, str]] = set()

    if r1.decision is Decision.ACCEPT:
        for f2 in mr.firewalls:
            live = _live_rules(rewritten, f2, consumed)
            denies = [r for r in live if r.decision is Decision.DENY
                      and rules_correlated(r1, r)]
            if denies:
                # A deny upstream of the permission shadows it; a deny at or
                # below it means the permission lets through denied traffic.
                kind = (AnomalyKind.SHADOWING
                        if position[f2] < position[fw_name]
                        else AnomalyKind.MISCONNECTION)
                return AggregationFinding(kind, fw_name, r1.id, pair,
                                          tuple(r.id for r in denies)), [], set()
            for r2 in live:
                if r2.decision is Decision.ACCEPT and rules_correlated(r1, r2):
                    restricted = with_zone_addresses(r2, z1.addresses,
                                                     z2.addresses)
                    appends.append(_Append(r2.decision, restricted.cnd, pair,
                                           (f2, r2.id)))
                    consumes.add((f2, r2.id))
        return None, appends, consumes

    # Prohibition: only legal on the most-upstream firewall of the route.
    if fw_name != mr.first:
        upstream = []
        for f2 in mr.firewalls[:position[fw_name]]:
            upstream.extend(r.id for r in _live_rules(rewritten, f2, consumed)
                            if rules_correlated(r1, r))
        return AggregationFinding(AnomalyKind.REDUNDANCY, fw_name, r1.id,
                                  pair, tuple(upstream)), [], set()
    correlated: list[FilteringRule] = []
    for f3 in mr.tail(fw_name):
        correlated.extend(r for r in _live_rules(rewritten, f3, consumed)
                          if rules_correlated(r1, r))
    if correlated:
        # A downstream permission for blocked traffic can never fire
        # (shadowing); a downstream prohibition blocks it twice (redundancy).
        kind = (AnomalyKind.SHADOWING
                if correlated[0].decision is Decision.ACCEPT
                else AnomalyKind.REDUNDANCY)
        return AggregationFinding(kind, fw_name, r1.id, pair,
                                  tuple(r.id for r in correlated)), [], set()
    restricted = with_zone_addresses(r1, z1.addresses, z2.addresses)
    appends.append(_Append(r1.decision, restricted.cnd, pair,
                           (fw_name, r1.id)))
    consumes.add((fw_name, r1.id))
    return None, appends, consumes


def _scan(fws, t: Topology, collect_all: bool):
    """Shared fold engine; returns (global appends, findings)."""
    errors = validate_topology(t)
    if errors:
        raise TopologyValidationError(errors)
    seen: set[str] = set()
    for fw in fws:
        if not t.has_firewall(fw.name):
            raise ValueError(f"firewall {fw.name} is not part of the topology")
        if fw.name in seen:
            raise ValueError(f"firewall {fw.name} given twice")
        seen.add(fw.name)

    rewritten = {fw.name: policy_rewriting(fw.rules)[0] for fw in fws}
    consumed: set[tuple[str, str]] = set()
    out: list[_Append] = []
    findings: list[AggregationFinding] = []

    for fw in fws:
        for r1 in rewritten[fw.name]:
            if (fw.name, r1.id) in consumed:
                continue
            src = r1.source_addresses()
            dst = r1.destination_addresses()
            if (not uncovered_addresses(t, src).is_empty
                    or not uncovered_addresses(t, dst).is_empty):
                findings.append(AggregationFinding(
                    AnomalyKind.UNZONED_ADDRESS, fw.name, r1.id, None))
                if not collect_all:
                    return out, findings
                continue
            drive_consumes: set[tuple[str, str]] = set()
            for z1 in zones_intersecting(t, src):
                for z2 in zones_intersecting(t, dst):
                    finding, appends, consumes = _process_pair(
                        fw.name, r1, z1, z2, t, rewritten, consumed)
                    if finding is not None:
                        findings.append(finding)
                        if not collect_all:
                            return out, findings
                        continue
                    out.extend(appends)
                    drive_consumes |= consumes
            consumed |= drive_consumes
            consumed.add((fw.name, r1.id))
    return out, findings


def aggregate(fws, t: Topology) -> GlobalPolicy:
    """Fold anomaly-free firewall configurations into a global policy.

    Every firewall's rules are first rewritten locally.  Raises
    AggregationError on the first inter-firewall anomaly, in deterministic
    scan order (firewalls, rules, zone pairs — all in input order); no
    partial policy is produced.  The returned policy is itself rewritten,
    so its rules are pairwise packet-disjoint.
    """
    appends, findings = _scan(fws, t, collect_all=False)
    if findings:
        raise AggregationError(findings[0])

    staged = [FilteringRule(id=f"g{i}", decision=a.decision, cnd=a.cnd)
              for i, a in enumerate(appends)]
    final, _report = policy_rewriting(staged)
    meta = {f"g{i}": a for i, a in enumerate(appends)}
    return GlobalPolicy(
        rules=final,
        zone_pairs=tuple(meta[r.id].zone_pair for r in final),
        provenance=tuple(meta[r.id].origin for r in final),
        domains=t.domains,
    )


def verify(fws, t: Topology, exhaustive: bool = False
           ) -> list[AggregationFinding]:
    """Report inter-firewall anomalies without producing a policy.

    With exhaustive=False this returns at most one finding — the same one
    aggregate() would fail with.  With exhaustive=True the scan continues
    past errors and accumulates every anomaly it can still see; anomalies
    masked by rules consumed in earlier error-free folds may be missed.
    """
    _out, findings = _scan(fws, t, collect_all=exhaustive)
    return findings
