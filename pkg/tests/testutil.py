"""Shared fixtures, independent oracles, and random generators for the tests.

The oracles here deliberately avoid the package's algebra: set membership is
computed by integer enumeration over raw intervals, and route enumeration
tries every firewall permutation.  They are slow and only meant for scaled
domains.
"""

from __future__ import annotations

import itertools
import random

from fwfold.model import (
    AttributeSet,
    ConjunctiveCondition,
    Decision,
    DomainConfig,
    FilteringRule,
    condition,
)
from fwfold.oracle import ScaledDomainConfig
from fwfold.topology import Firewall, Topology, Zone

# Tiny space (288 packets) for exhaustive per-packet set comparisons.
TINY = ScaledDomainConfig(protocol_max=1, address_max=3, port_max=2)
# Reduced acceptance space: 2 x 16^2 x 8^2 = 32768 packets.
REDUCED = ScaledDomainConfig(protocol_max=1, address_max=15, port_max=7)


def interval_members(intervals) -> set[int]:
    out: set[int] = set()
    for lo, hi in intervals:
        out.update(range(lo, hi + 1))
    return out


def rule_packet_set(rule: FilteringRule, sc: ScaledDomainConfig) -> set[tuple]:
    """Packets matched by a rule, straight from its raw intervals."""
    out: set[tuple] = set()
    for c in rule.cnd:
        axes = [interval_members(a.intervals) & set(range(n))
                for a, n in zip(c.attrs, sc.shape())]
        out.update(itertools.product(*axes))
    return out


def random_attr_set(rng: random.Random, domain, full_bias=0.35) -> AttributeSet:
    if rng.random() < full_bias:
        return AttributeSet.full(domain)
    pieces = 2 if rng.random() < 0.2 else 1
    span = max(1, domain.size // 2)
    ivs = []
    for _ in range(pieces):
        lo = rng.randint(domain.lo, domain.hi)
        hi = min(domain.hi, lo + rng.randrange(span))
        ivs.append((lo, hi))
    return AttributeSet.of(domain, ivs)


def random_rule(rng: random.Random, cfg: DomainConfig,
                rule_id: str) -> FilteringRule:
    attrs = tuple(random_attr_set(rng, d) for d in cfg.attribute_domains())
    return FilteringRule(id=rule_id,
                         decision=rng.choice((Decision.ACCEPT, Decision.DENY)),
                         cnd=(ConjunctiveCondition(attrs),))


def random_rule_set(rng: random.Random, cfg: DomainConfig, max_rules=12,
                    prefix="r") -> tuple[FilteringRule, ...]:
    n = rng.randint(1, max_rules)
    return tuple(random_rule(rng, cfg, f"{prefix}{i}") for i in range(n))


def chain_topology(sc: ScaledDomainConfig, n_firewalls: int = 2,
                   zone_homes=None) -> Topology:
    """Chain of firewalls with contiguous zones attached.

    zone_homes maps each zone index to the firewall index it borders; the
    default puts zone 0 on the first firewall and zone 1 on the last.
    """
    cfg = sc.domains
    if zone_homes is None:
        zone_homes = {0: 0, 1: n_firewalls - 1}
    n_zones = len(zone_homes)
    total = sc.address_max + 1
    width = total // n_zones
    zones = tuple(
        Zone(f"z{i}", AttributeSet.of(
            cfg.address,
            [(i * width, (i + 1) * width - 1 if i < n_zones - 1 else total - 1)]))
        for i in range(n_zones))
    firewalls = []
    for i in range(n_firewalls):
        links = []
        if i > 0:
            links.append(f"fw{i}")
        if i < n_firewalls - 1:
            links.append(f"fw{i + 2}")
        adjacent = tuple(f"z{z}" for z, home in zone_homes.items() if home == i)
        firewalls.append(Firewall(name=f"fw{i + 1}", adjacent_zones=adjacent,
                                  links=tuple(links)))
    return Topology(zones=zones, firewalls=tuple(firewalls), domains=cfg)


def diamond_topology(sc: ScaledDomainConfig) -> Topology:
    """z0 - fw1 - {fw2 | fw3} - fw4 - z1: two incomparable minimal routes."""
    cfg = sc.domains
    half = (sc.address_max + 1) // 2
    zones = (Zone("z0", AttributeSet.of(cfg.address, [(0, half - 1)])),
             Zone("z1", AttributeSet.of(cfg.address,
                                        [(half, sc.address_max)])))
    firewalls = (
        Firewall("fw1", adjacent_zones=("z0",), links=("fw2", "fw3")),
        Firewall("fw2", links=("fw1", "fw4")),
        Firewall("fw3", links=("fw1", "fw4")),
        Firewall("fw4", adjacent_zones=("z1",), links=("fw2", "fw3")),
    )
    return Topology(zones=zones, firewalls=firewalls, domains=cfg)


def enumerate_routes_brute(t: Topology, z1: Zone, z2: Zone) -> set[tuple]:
    """Route enumeration by trying every firewall permutation."""
    names = [f.name for f in t.firewalls]
    linked = {f.name: set(f.links) for f in t.firewalls}
    adjacent = {f.name: set(f.adjacent_zones) for f in t.firewalls}
    found: set[tuple] = set()
    for k in range(1, len(names) + 1):
        for seq in itertools.permutations(names, k):
            if z1.name not in adjacent[seq[0]]:
                continue
            if z2.name not in adjacent[seq[-1]]:
                continue
            if all(b in linked[a] for a, b in zip(seq, seq[1:])):
                found.add(seq)
    return found


def minimal_filter_brute(route_set: set[tuple]) -> set[tuple]:
    def smaller(a, b):
        return len(a) < len(b) and set(a) <= set(b)

    return {p for p in route_set
            if not any(smaller(q, p) for q in route_set if q != p)}


def route_fixture_topologies():
    """Topologies (≤ 6 firewalls) exercising the route/minimal-route oracle."""
    cfg = TINY.domains

    def zone(name, lo, hi):
        return Zone(name, AttributeSet.of(cfg.address, [(lo, hi)]))

    def topo(zones, firewalls):
        return Topology(zones=tuple(zones), firewalls=tuple(firewalls),
                        domains=cfg)

    yield "chain2", chain_topology(TINY, 2)
    yield "chain4", chain_topology(TINY, 4)
    yield "diamond", diamond_topology(TINY)
    yield "atomic", topo([zone("z1", 0, 1), zone("z2", 2, 3)],
                         [Firewall("fw1", adjacent_zones=("z1", "z2"))])
    yield "disconnected", topo(
        [zone("z1", 0, 1), zone("z2", 2, 3)],
        [Firewall("fw1", adjacent_zones=("z1",)),
         Firewall("fw2", adjacent_zones=("z2",))])
    yield "subset-order", topo(
        [zone("z1", 0, 1), zone("z2", 2, 3)],
        [Firewall("fw1", adjacent_zones=("z1", "z2"), links=("fw2",)),
         Firewall("fw2", adjacent_zones=("z1",), links=("fw1",))])
    yield "mesh6", topo(
        [zone("z1", 0, 1), zone("z2", 2, 3)],
        [Firewall("fw1", adjacent_zones=("z1",), links=("fw2", "fw3")),
         Firewall("fw2", links=("fw1", "fw4")),
         Firewall("fw3", links=("fw1", "fw4", "fw5")),
         Firewall("fw4", links=("fw2", "fw3", "fw6")),
         Firewall("fw5", links=("fw3", "fw6")),
         Firewall("fw6", adjacent_zones=("z2",), links=("fw4", "fw5"))])


def zone_rule(cfg: DomainConfig, rule_id: str, decision: Decision,
              z1: Zone, z2: Zone, **attrs) -> FilteringRule:
    """Single-conjunct rule whose addresses are exactly a zone pair."""
    c = condition(cfg, src=z1.addresses.intervals,
                  dst=z2.addresses.intervals, **attrs)
    return FilteringRule(id=rule_id, decision=decision, cnd=(c,))


def random_global_rules(rng: random.Random, t: Topology, max_rules=8,
                        prefix="g", same_zone_bias=0.08
                        ) -> tuple[FilteringRule, ...]:
    """Zone-aligned global rules over random zone pairs of a topology."""
    cfg = t.domains
    rules = []
    n = rng.randint(1, max_rules)
    for i in range(n):
        z1 = rng.choice(t.zones)
        if rng.random() < same_zone_bias:
            z2 = z1
        else:
            others = [z for z in t.zones if z.name != z1.name]
            z2 = rng.choice(others) if others else z1
        decision = rng.choice((Decision.ACCEPT, Decision.DENY))
        rules.append(zone_rule(
            cfg, f"{prefix}{i}", decision, z1, z2,
            protocol=random_attr_set(rng, cfg.protocol).intervals,
            sport=random_attr_set(rng, cfg.port).intervals,
            dport=random_attr_set(rng, cfg.port).intervals))
    return tuple(rules)


def random_chain_setup(rng: random.Random, sc: ScaledDomainConfig):
    """Random chain topology (2-4 firewalls, 2-5 zones) plus global rules."""
    n_fw = rng.randint(2, 4)
    n_zones = rng.randint(2, 5)
    homes = {0: 0, 1: n_fw - 1}
    for z in range(2, n_zones):
        homes[z] = rng.randrange(n_fw)
    t = chain_topology(sc, n_firewalls=n_fw, zone_homes=homes)
    return t, random_global_rules(rng, t)
