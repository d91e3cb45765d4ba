"""Refining a global policy back onto the topology's firewalls.

Placement strategy: after rewriting the global rules, each permission is
installed on every firewall of the zone pair's minimal route, while each
prohibition is installed only on the most-upstream firewall of that route.
The resulting per-firewall configurations are free of intra- and
inter-firewall anomalies, and aggregating them recovers a policy equivalent
to the rewritten input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .aggregation import GlobalPolicy
from .model import Decision, FilteringRule, with_zone_addresses
from .rewriting import policy_rewriting
from .topology import (
    AmbiguousRouteError,
    NoRouteError,
    Topology,
    TopologyValidationError,
    uncovered_addresses,
    unique_minimal_route,
    validate_topology,
    zones_intersecting,
)


class DeploymentErrorKind(enum.Enum):
    NO_ROUTE = "no_route"
    AMBIGUOUS_ROUTE = "ambiguous_route"
    UNZONED_ADDRESS = "unzoned_address"


class DeploymentError(Exception):
    def __init__(self, kind: DeploymentErrorKind, rule_id: str,
                 zone_pair: tuple[str, str] | None, detail: str = ""):
        self.kind = kind
        self.rule_id = rule_id
        self.zone_pair = zone_pair
        msg = f"{kind.value}: rule {rule_id}"
        if zone_pair:
            msg += f" for zones {zone_pair[0]} -> {zone_pair[1]}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class DeploymentWarning:
    rule_id: str
    zone_pair: tuple[str, str]
    reason: str


@dataclass(frozen=True)
class DeploymentPlan:
    """Per-firewall rule sequences plus the warnings raised while placing."""

    rules_by_firewall: dict[str, tuple[FilteringRule, ...]]
    warnings: tuple[DeploymentWarning, ...]

    def as_firewalls(self, t: Topology):
        """Topology firewalls carrying the planned rules (for re-audit)."""
        return t.with_rules(self.rules_by_firewall).firewalls


def deploy(policy, t: Topology) -> DeploymentPlan:
    """Expand a global policy (or raw rule sequence) into a deployment plan.

    The input is rewritten first, so placement operates on pairwise-disjoint
    rules.  Zone pairs whose source and destination coincide are skipped with
    a warning; unroutable or ambiguous pairs abort with a DeploymentError.
    """
    errors = validate_topology(t)
    if errors:
        raise TopologyValidationError(errors)
    rules = policy.rules if isinstance(policy, GlobalPolicy) else tuple(policy)
    rewritten, _report = policy_rewriting(rules)

    placements: dict[str, list] = {f.name: [] for f in t.firewalls}
    seen: dict[tuple, str] = {}
    warnings: list[DeploymentWarning] = []

    for idx, r1 in enumerate(rewritten):
        src = r1.source_addresses()
        dst = r1.destination_addresses()
        for label, addrs in (("source", src), ("destination", dst)):
            leftover = uncovered_addresses(t, addrs)
            if not leftover.is_empty:
                raise DeploymentError(
                    DeploymentErrorKind.UNZONED_ADDRESS, r1.id, None,
                    f"{label} addresses {leftover.intervals} lie in no zone")
        for z1 in zones_intersecting(t, src):
            for z2 in zones_intersecting(t, dst):
                pair = (z1.name, z2.name)
                if z1.name == z2.name:
                    warnings.append(DeploymentWarning(
                        r1.id, pair, "same-zone pair skipped"))
                    continue
                try:
                    mr = unique_minimal_route(t, z1, z2)
                except NoRouteError:
                    raise DeploymentError(DeploymentErrorKind.NO_ROUTE,
                                          r1.id, pair)
                except AmbiguousRouteError as exc:
                    raise DeploymentError(DeploymentErrorKind.AMBIGUOUS_ROUTE,
                                          r1.id, pair, str(exc))
                deployed = with_zone_addresses(
                    r1, z1.addresses, z2.addresses,
                    rule_id=f"{r1.id}@{z1.name}->{z2.name}")
                targets = (mr.firewalls if r1.decision is Decision.ACCEPT
                           else (mr.first,))
                for fw_name in targets:
                    key = (fw_name, deployed.decision, deployed.cnd)
                    if key in seen:
                        warnings.append(DeploymentWarning(
                            r1.id, pair,
                            f"duplicate of {seen[key]} on {fw_name} dropped"))
                        continue
                    seen[key] = r1.id
                    placements[fw_name].append(((pair, idx), deployed))

    rules_by_firewall = {
        name: tuple(rule for _key, rule in sorted(entries, key=lambda e: e[0]))
        for name, entries in placements.items()
    }
    return DeploymentPlan(rules_by_firewall=rules_by_firewall,
                          warnings=tuple(warnings))
