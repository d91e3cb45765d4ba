"""Network model: disjoint zones, a firewall graph, routes, minimal routes.

A route between two zones is any simple firewall path whose first firewall
borders the source zone and whose last borders the destination zone.  A
minimal route is one with no strictly smaller route, where "smaller" means
shorter and using a subset of its firewalls.  The aggregation and deployment
algorithms require the minimal route of a zone pair to be unique and refuse
to proceed otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .model import (
    AttributeSet,
    DomainConfig,
    FilteringRule,
    attr_difference,
    attr_intersect,
    attr_union,
)


class TopologyValidationError(Exception):
    """Raised when a topology fails structural validation."""

    def __init__(self, findings):
        self.findings = tuple(findings)
        super().__init__("; ".join(self.findings))


class RouteError(Exception):
    """Base for route resolution failures; carries the zone pair."""

    def __init__(self, z1: str, z2: str, message: str):
        super().__init__(message)
        self.zone_pair = (z1, z2)


class NoRouteError(RouteError):
    def __init__(self, z1: str, z2: str):
        super().__init__(z1, z2, f"no route between zones {z1} and {z2}")


class AmbiguousRouteError(RouteError):
    def __init__(self, z1: str, z2: str, candidates):
        self.candidates = tuple(candidates)
        routes = "; ".join(" -> ".join(p.firewalls) for p in self.candidates)
        super().__init__(z1, z2,
                         f"minimal route between zones {z1} and {z2} is "
                         f"ambiguous: {routes}")


@dataclass(frozen=True)
class Zone:
    """Named address set; zones of one topology are pairwise disjoint."""

    name: str
    addresses: AttributeSet


@dataclass(frozen=True)
class Firewall:
    name: str
    rules: tuple[FilteringRule, ...] = ()
    adjacent_zones: tuple[str, ...] = ()
    links: tuple[str, ...] = ()


@dataclass(frozen=True)
class Path:
    """Ordered sequence of distinct, consecutively linked firewalls."""

    firewalls: tuple[str, ...]

    def __post_init__(self):
        if not self.firewalls:
            raise ValueError("a path contains at least one firewall")
        if len(set(self.firewalls)) != len(self.firewalls):
            raise ValueError(f"path repeats a firewall: {self.firewalls}")

    @property
    def first(self) -> str:
        return self.firewalls[0]

    @property
    def last(self) -> str:
        return self.firewalls[-1]

    def tail(self, fw: str) -> tuple[str, ...]:
        """Firewalls after fw on this path."""
        idx = self.firewalls.index(fw)
        return self.firewalls[idx + 1:]

    def __contains__(self, fw: str) -> bool:
        return fw in self.firewalls

    def __len__(self) -> int:
        return len(self.firewalls)


@dataclass(frozen=True)
class Topology:
    zones: tuple[Zone, ...]
    firewalls: tuple[Firewall, ...]
    domains: DomainConfig = field(default_factory=DomainConfig.production)

    def __post_init__(self):
        object.__setattr__(self, "_zone_map",
                           {z.name: z for z in self.zones})
        object.__setattr__(self, "_fw_map",
                           {f.name: f for f in self.firewalls})
        object.__setattr__(self, "_route_cache", {})

    def zone(self, name: str) -> Zone:
        return self._zone_map[name]

    def firewall(self, name: str) -> Firewall:
        return self._fw_map[name]

    def has_zone(self, name: str) -> bool:
        return name in self._zone_map

    def has_firewall(self, name: str) -> bool:
        return name in self._fw_map

    def with_rules(self, rules_by_firewall) -> "Topology":
        """Copy of this topology with each firewall's rules replaced."""
        fws = tuple(replace(f, rules=tuple(rules_by_firewall.get(f.name, ())))
                    for f in self.firewalls)
        return Topology(self.zones, fws, self.domains)

    def zone_union(self) -> AttributeSet:
        """Union of all zone address sets."""
        acc = AttributeSet.empty(self.domains.address)
        for z in self.zones:
            acc = attr_union(acc, z.addresses)
        return acc

    def zone_of_address(self, addr: int) -> Zone | None:
        for z in self.zones:
            if addr in z.addresses:
                return z
        return None


def validate_topology(t: Topology) -> list[str]:
    """Structural findings; an empty list means the topology is usable."""
    findings: list[str] = []
    seen_zones: set[str] = set()
    for z in t.zones:
        if z.name in seen_zones:
            findings.append(f"duplicate zone name {z.name}")
        seen_zones.add(z.name)
        if z.addresses.is_empty:
            findings.append(f"zone {z.name} has an empty address set")
    for i, z1 in enumerate(t.zones):
        for z2 in t.zones[i + 1:]:
            if z1.name == z2.name:
                continue
            if not attr_intersect(z1.addresses, z2.addresses).is_empty:
                findings.append(
                    f"zones {z1.name} and {z2.name} overlap")
    seen_fws: set[str] = set()
    for f in t.firewalls:
        if f.name in seen_fws:
            findings.append(f"duplicate firewall name {f.name}")
        seen_fws.add(f.name)
    for f in t.firewalls:
        for zname in f.adjacent_zones:
            if not t.has_zone(zname):
                findings.append(
                    f"firewall {f.name} is adjacent to unknown zone {zname}")
        for link in f.links:
            if link == f.name:
                findings.append(f"firewall {f.name} links to itself")
            elif not t.has_firewall(link):
                findings.append(
                    f"firewall {f.name} links to unknown firewall {link}")
            elif f.name not in t.firewall(link).links:
                findings.append(
                    f"link {f.name} -> {link} is not symmetric")
    return findings


def routes(t: Topology, z1: Zone, z2: Zone) -> tuple[Path, ...]:
    """All simple paths from a firewall bordering z1 to one bordering z2."""
    if z1.name == z2.name:
        raise ValueError("routes are defined between distinct zones")
    cached = t._route_cache.get(("routes", z1.name, z2.name))
    if cached is not None:
        return cached
    found: list[tuple[str, ...]] = []

    def extend(path: list[str]) -> None:
        current = t.firewall(path[-1])
        if z2.name in current.adjacent_zones:
            found.append(tuple(path))
        for nxt in current.links:
            if nxt not in path and t.has_firewall(nxt):
                path.append(nxt)
                extend(path)
                path.pop()

    for f in t.firewalls:
        if z1.name in f.adjacent_zones:
            extend([f.name])
    result = tuple(Path(p) for p in sorted(found, key=lambda p: (len(p), p)))
    t._route_cache[("routes", z1.name, z2.name)] = result
    return result


def _smaller(a: Path, b: Path) -> bool:
    # a < b in the order functor: strictly shorter and firewall-subset.
    return len(a) < len(b) and set(a.firewalls) <= set(b.firewalls)


def minimal_routes(t: Topology, z1: Zone, z2: Zone) -> tuple[Path, ...]:
    """Routes with no strictly smaller route between the same zones."""
    rs = routes(t, z1, z2)
    return tuple(p for p in rs
                 if not any(_smaller(q, p) for q in rs if q != p))


def unique_minimal_route(t: Topology, z1: Zone, z2: Zone) -> Path:
    """The single minimal route of a zone pair.

    Raises NoRouteError when the zones are not connected and
    AmbiguousRouteError when several incomparable minimal routes exist;
    aggregation and deployment refuse to guess between them.
    """
    cached = t._route_cache.get(("mr", z1.name, z2.name))
    if cached is None:
        cached = minimal_routes(t, z1, z2)
        t._route_cache[("mr", z1.name, z2.name)] = cached
    if not cached:
        raise NoRouteError(z1.name, z2.name)
    if len(cached) > 1:
        raise AmbiguousRouteError(z1.name, z2.name, cached)
    return cached[0]


def zones_intersecting(t: Topology, addresses: AttributeSet) -> tuple[Zone, ...]:
    """Zones whose address set meets the given one, in topology order."""
    return tuple(z for z in t.zones
                 if not attr_intersect(z.addresses, addresses).is_empty)


def uncovered_addresses(t: Topology, addresses: AttributeSet) -> AttributeSet:
    """Part of the given address set that lies in no zone."""
    return attr_difference(addresses, t.zone_union())
