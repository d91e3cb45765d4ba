"""Filtering rules and the closed-interval set algebra they are built on.

Every condition attribute (protocol, addresses, ports) is a finite union of
disjoint closed integer intervals over a bounded domain.  Keeping the sets
canonical (sorted, disjoint, non-adjacent) makes structural equality coincide
with set equality, which the rewriting algorithms rely on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

Interval = tuple[int, int]

# Attribute slots of a conjunctive condition, in fixed order.
ATTR_PROTOCOL = 0
ATTR_SRC_ADDR = 1
ATTR_SRC_PORT = 2
ATTR_DST_ADDR = 3
ATTR_DST_PORT = 4
NUM_ATTRS = 5

ATTR_NAMES = ("protocol", "src", "sport", "dst", "dport")


class DomainKind(enum.Enum):
    PROTOCOL = "protocol"
    ADDRESS = "address"
    PORT = "port"


class Decision(enum.Enum):
    ACCEPT = "accept"
    DENY = "deny"


class DomainMismatchError(ValueError):
    """Two attribute sets from different domains were combined."""


@dataclass(frozen=True)
class AttributeDomain:
    """Inclusive integer bounds for one attribute kind."""

    kind: DomainKind
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class DomainConfig:
    """Upper bounds for the three attribute kinds of one analysis run.

    Production bounds cover IANA protocol numbers, IPv4 addresses, and TCP/UDP
    ports.  Scaled configurations shrink the bounds so the brute-force oracle
    can enumerate the whole packet space.
    """

    protocol_max: int = 255
    address_max: int = 2**32 - 1
    port_max: int = 65535

    @classmethod
    def production(cls) -> "DomainConfig":
        return cls()

    @classmethod
    def scaled(cls, protocol_max: int = 2, address_max: int = 31,
               port_max: int = 15) -> "DomainConfig":
        return cls(protocol_max=protocol_max, address_max=address_max,
                   port_max=port_max)

    @property
    def is_production(self) -> bool:
        return self == DomainConfig.production()

    @property
    def protocol(self) -> AttributeDomain:
        return AttributeDomain(DomainKind.PROTOCOL, 0, self.protocol_max)

    @property
    def address(self) -> AttributeDomain:
        return AttributeDomain(DomainKind.ADDRESS, 0, self.address_max)

    @property
    def port(self) -> AttributeDomain:
        return AttributeDomain(DomainKind.PORT, 0, self.port_max)

    def attribute_domains(self) -> tuple[AttributeDomain, ...]:
        """Domains of the five condition attributes, in slot order."""
        return (self.protocol, self.address, self.port, self.address, self.port)


def _canonical_intervals(intervals, domain: AttributeDomain) -> tuple[Interval, ...]:
    cleaned: list[Interval] = []
    for lo, hi in intervals:
        if lo > hi:
            raise ValueError(f"interval [{lo},{hi}] is inverted")
        if lo < domain.lo or hi > domain.hi:
            raise ValueError(
                f"interval [{lo},{hi}] outside {domain.kind.value} domain "
                f"[{domain.lo},{domain.hi}]")
        cleaned.append((int(lo), int(hi)))
    cleaned.sort()
    merged: list[Interval] = []
    for lo, hi in cleaned:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


@dataclass(frozen=True)
class AttributeSet:
    """Canonical union of disjoint closed intervals over one domain.

    Use :meth:`of` to build one from arbitrary intervals; the constructor
    expects already-canonical input.
    """

    domain: AttributeDomain
    intervals: tuple[Interval, ...]

    @classmethod
    def of(cls, domain: AttributeDomain, intervals) -> "AttributeSet":
        return cls(domain, _canonical_intervals(intervals, domain))

    @classmethod
    def full(cls, domain: AttributeDomain) -> "AttributeSet":
        return cls(domain, ((domain.lo, domain.hi),))

    @classmethod
    def empty(cls, domain: AttributeDomain) -> "AttributeSet":
        return cls(domain, ())

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return self.intervals == ((self.domain.lo, self.domain.hi),)

    def __contains__(self, value: int) -> bool:
        for lo, hi in self.intervals:
            if lo <= value <= hi:
                return True
            if value < lo:
                return False
        return False

    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.intervals)

    def values(self):
        """Iterate members in ascending order (test domains only)."""
        for lo, hi in self.intervals:
            yield from range(lo, hi + 1)


def _check_same_domain(a: AttributeSet, b: AttributeSet) -> None:
    if a.domain != b.domain:
        raise DomainMismatchError(
            f"cannot combine {a.domain.kind.value} set with "
            f"{b.domain.kind.value} set ({a.domain} vs {b.domain})")


def attr_intersect(a: AttributeSet, b: AttributeSet) -> AttributeSet:
    """Canonical a ∩ b."""
    _check_same_domain(a, b)
    out: list[Interval] = []
    i = j = 0
    ai, bi = a.intervals, b.intervals
    while i < len(ai) and j < len(bi):
        lo = max(ai[i][0], bi[j][0])
        hi = min(ai[i][1], bi[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if ai[i][1] < bi[j][1]:
            i += 1
        else:
            j += 1
    return AttributeSet(a.domain, tuple(out))


def attr_difference(b: AttributeSet, a: AttributeSet) -> AttributeSet:
    """Canonical b \\ a."""
    _check_same_domain(b, a)
    out: list[Interval] = []
    for lo, hi in b.intervals:
        cursor = lo
        for alo, ahi in a.intervals:
            if ahi < cursor:
                continue
            if alo > hi:
                break
            if alo > cursor:
                out.append((cursor, alo - 1))
            cursor = ahi + 1
            if cursor > hi:
                break
        if cursor <= hi:
            out.append((cursor, hi))
    return AttributeSet(b.domain, tuple(out))


def attr_union(a: AttributeSet, b: AttributeSet) -> AttributeSet:
    """Canonical a ∪ b."""
    _check_same_domain(a, b)
    return AttributeSet.of(a.domain, a.intervals + b.intervals)


def attr_is_subset(a: AttributeSet, b: AttributeSet) -> bool:
    """True iff a ⊆ b."""
    return attr_intersect(a, b) == a


@dataclass(frozen=True)
class ConjunctiveCondition:
    """One conjunct: a packet matches iff every field lies in its set."""

    attrs: tuple[AttributeSet, ...]

    def __post_init__(self):
        if len(self.attrs) != NUM_ATTRS:
            raise ValueError(f"expected {NUM_ATTRS} attribute sets, "
                             f"got {len(self.attrs)}")

    @property
    def is_empty(self) -> bool:
        return any(a.is_empty for a in self.attrs)

    @property
    def protocol(self) -> AttributeSet:
        return self.attrs[ATTR_PROTOCOL]

    @property
    def src_addr(self) -> AttributeSet:
        return self.attrs[ATTR_SRC_ADDR]

    @property
    def src_port(self) -> AttributeSet:
        return self.attrs[ATTR_SRC_PORT]

    @property
    def dst_addr(self) -> AttributeSet:
        return self.attrs[ATTR_DST_ADDR]

    @property
    def dst_port(self) -> AttributeSet:
        return self.attrs[ATTR_DST_PORT]

    def matches(self, pkt: "Packet") -> bool:
        return all(v in s for v, s in zip(pkt.as_tuple(), self.attrs))

    def replaced(self, slot: int, attr: AttributeSet) -> "ConjunctiveCondition":
        attrs = list(self.attrs)
        attrs[slot] = attr
        return ConjunctiveCondition(tuple(attrs))


def condition(cfg: DomainConfig, protocol=None, src=None, sport=None,
              dst=None, dport=None) -> ConjunctiveCondition:
    """Build a conjunct from interval lists; None means the full domain."""
    domains = cfg.attribute_domains()
    raw = (protocol, src, sport, dst, dport)
    attrs = tuple(
        AttributeSet.full(dom) if spec is None else AttributeSet.of(dom, spec)
        for spec, dom in zip(raw, domains))
    return ConjunctiveCondition(attrs)


def _subsumed(c: ConjunctiveCondition, d: ConjunctiveCondition) -> bool:
    return all(attr_is_subset(ca, da) for ca, da in zip(c.attrs, d.attrs))


def normalize_conjuncts(cnds) -> tuple[ConjunctiveCondition, ...]:
    """Drop empty, duplicate, and subsumed conjuncts; packet set is unchanged."""
    kept: list[ConjunctiveCondition] = []
    for c in cnds:
        if c.is_empty:
            continue
        if any(_subsumed(c, k) for k in kept):
            continue
        kept = [k for k in kept if not _subsumed(k, c)]
        kept.append(c)
    return tuple(kept)


@dataclass(frozen=True)
class FilteringRule:
    """Priority-ordered filtering rule: disjunction of conjuncts → decision.

    Freshly parsed rules carry a single conjunct; multi-conjunct conditions
    only arise from exclusion.  The shadowing/redundancy flags record why a
    rule disappeared during rewriting and are never both set.
    """

    id: str
    decision: Decision
    cnd: tuple[ConjunctiveCondition, ...]
    shadowing: bool = False
    redundancy: bool = False

    def __post_init__(self):
        if self.shadowing and self.redundancy:
            raise ValueError(f"rule {self.id}: shadowing and redundancy "
                             "cannot both be set")

    @property
    def is_empty(self) -> bool:
        return not self.cnd

    def matches(self, pkt: "Packet") -> bool:
        return any(c.matches(pkt) for c in self.cnd)

    def _addr_union(self, slot: int) -> AttributeSet:
        if not self.cnd:
            raise ValueError(f"rule {self.id} has an empty condition")
        acc = self.cnd[0].attrs[slot]
        for c in self.cnd[1:]:
            acc = attr_union(acc, c.attrs[slot])
        return acc

    def source_addresses(self) -> AttributeSet:
        """Union of the source-address sets over all conjuncts."""
        return self._addr_union(ATTR_SRC_ADDR)

    def destination_addresses(self) -> AttributeSet:
        """Union of the destination-address sets over all conjuncts."""
        return self._addr_union(ATTR_DST_ADDR)


@dataclass(frozen=True)
class Packet:
    """A concrete 5-tuple; the unit the brute-force oracle enumerates."""

    protocol: int
    src_addr: int
    src_port: int
    dst_addr: int
    dst_port: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.protocol, self.src_addr, self.src_port,
                self.dst_addr, self.dst_port)


def with_zone_addresses(rule: FilteringRule, src: AttributeSet,
                        dst: AttributeSet, rule_id: str | None = None,
                        ) -> FilteringRule:
    """Copy of the rule with source/destination addresses replaced wholesale.

    Non-address attributes are kept verbatim.  Conjuncts that collapse into
    one another after the replacement are deduplicated.
    """
    cnds = normalize_conjuncts(
        c.replaced(ATTR_SRC_ADDR, src).replaced(ATTR_DST_ADDR, dst)
        for c in rule.cnd)
    return FilteringRule(id=rule.id if rule_id is None else rule_id,
                         decision=rule.decision, cnd=cnds)


def matches(rule: FilteringRule, pkt: Packet) -> bool:
    """True iff pkt lies in some conjunct of the rule."""
    return rule.matches(pkt)


def rules_correlated(r1: FilteringRule, r2: FilteringRule) -> bool:
    """True iff some conjunct pair intersects on all five attributes.

    Equivalently: at least one packet is matched by both rules.
    """
    for c1 in r1.cnd:
        for c2 in r2.cnd:
            if all(not attr_intersect(a1, a2).is_empty
                   for a1, a2 in zip(c1.attrs, c2.attrs)):
                return True
    return False
