"""Brute-force packet semantics used for verification and the simulate CLI.

The evaluation convention is a closed policy: when no rule matches, the
decision is deny — at each firewall and end to end.  The paper-facing
algorithms never depend on this default; every equivalence claim in the test
suite states it explicitly through these functions.

Besides the per-packet evaluators, this module provides numpy decision grids
over an entire scaled packet space.  The grids implement first-match and
any-match semantics directly from rule intervals, independently of the
interval algebra they are used to check, and are cross-validated against the
per-packet evaluators in the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import Decision, DomainConfig, FilteringRule, Packet
from .topology import Topology, unique_minimal_route


class Conflict:
    """Returned by eval_any_match when two matching rules disagree."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CONFLICT"


class NotApplicable:
    """End-to-end result for packets that cross no zone boundary."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_APPLICABLE"


CONFLICT = Conflict()
NOT_APPLICABLE = NotApplicable()

# Grid cell codes.
NO_MATCH_CODE = 0
ACCEPT_CODE = 1
DENY_CODE = 2

_DECISION_CODE = {Decision.ACCEPT: ACCEPT_CODE, Decision.DENY: DENY_CODE}


@dataclass(frozen=True)
class ScaledDomainConfig:
    """Enumeration bounds for the brute-force oracle.

    The default space is 3 protocols x 32^2 addresses x 16^2 ports, about
    786k packets.  The cap guards against accidentally enumerating an
    intractable space.
    """

    protocol_max: int = 2
    address_max: int = 31
    port_max: int = 15
    cap: int = 10**6

    def __post_init__(self):
        if self.space_size() > self.cap:
            raise ValueError(
                f"packet space of {self.space_size()} exceeds cap {self.cap}")

    @property
    def domains(self) -> DomainConfig:
        return DomainConfig(protocol_max=self.protocol_max,
                            address_max=self.address_max,
                            port_max=self.port_max)

    def shape(self) -> tuple[int, int, int, int, int]:
        return (self.protocol_max + 1, self.address_max + 1,
                self.port_max + 1, self.address_max + 1, self.port_max + 1)

    def space_size(self) -> int:
        p, a, t, a2, t2 = self.shape()
        return p * a * t * a2 * t2

    def packets(self):
        """All packets in lexicographic field order."""
        for fields in itertools.product(*(range(n) for n in self.shape())):
            yield Packet(*fields)


def eval_first_match(rules, pkt: Packet):
    """Decision of the first matching rule; None when nothing matches."""
    for r in rules:
        if r.matches(pkt):
            return r.decision
    return None


def eval_any_match(rules, pkt: Packet):
    """Decision of the unique matching rule in an order-free set.

    Returns None when nothing matches and CONFLICT when matching rules
    disagree — the latter signals a violated rewriting invariant.
    """
    decision = None
    for r in rules:
        if not r.matches(pkt):
            continue
        if decision is None:
            decision = r.decision
        elif decision != r.decision:
            return CONFLICT
    return decision


def eval_end_to_end(fws, t: Topology, pkt: Packet):
    """Closed-policy decision for a packet crossing from one zone to another.

    Returns NOT_APPLICABLE when either address lies in no zone or both lie in
    the same zone.  Otherwise the packet is accepted iff every firewall on
    the unique minimal route first-match-accepts it.  Route resolution errors
    (no route, ambiguous route) propagate.
    """
    z1 = t.zone_of_address(pkt.src_addr)
    z2 = t.zone_of_address(pkt.dst_addr)
    if z1 is None or z2 is None or z1.name == z2.name:
        return NOT_APPLICABLE
    mr = unique_minimal_route(t, z1, z2)
    by_name = {f.name: f for f in fws}
    for fw_name in mr.firewalls:
        fw = by_name.get(fw_name)
        rules = fw.rules if fw is not None else ()
        if eval_first_match(rules, pkt) is not Decision.ACCEPT:
            return Decision.DENY
    return Decision.ACCEPT


def check_equivalence(lhs, rhs, cfg: ScaledDomainConfig):
    """First packet on which two evaluation closures disagree, else None.

    Enumerates the whole scaled packet space in lexicographic order, so the
    returned counterexample is reproducible.
    """
    for pkt in cfg.packets():
        if lhs(pkt) != rhs(pkt):
            return pkt
    return None


# --- vectorized decision grids -------------------------------------------
#
# Grids evaluate every packet of the scaled space at once.  Axes follow the
# packet field order (protocol, src, sport, dst, dport), so C-order argmax
# equals lexicographic packet order.


def _axis_mask(attr, size: int) -> np.ndarray:
    m = np.zeros(size, dtype=bool)
    for lo, hi in attr.intervals:
        m[lo:hi + 1] = True
    return m


def rule_match_mask(rule: FilteringRule, cfg: ScaledDomainConfig) -> np.ndarray:
    """Boolean grid of the packets the rule matches."""
    shape = cfg.shape()
    out = np.zeros(shape, dtype=bool)
    for c in rule.cnd:
        axes = [_axis_mask(a, n) for a, n in zip(c.attrs, shape)]
        box = (axes[0][:, None, None, None, None]
               & axes[1][None, :, None, None, None]
               & axes[2][None, None, :, None, None]
               & axes[3][None, None, None, :, None]
               & axes[4][None, None, None, None, :])
        out |= box
    return out


def first_match_grid(rules, cfg: ScaledDomainConfig) -> np.ndarray:
    """int8 grid of first-match decisions (codes: no-match/accept/deny)."""
    grid = np.zeros(cfg.shape(), dtype=np.int8)
    undecided = np.ones(cfg.shape(), dtype=bool)
    for r in rules:
        if not undecided.any():
            break
        hit = rule_match_mask(r, cfg) & undecided
        grid[hit] = _DECISION_CODE[r.decision]
        undecided &= ~hit
    return grid


def any_match_grid(rules, cfg: ScaledDomainConfig
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(decision grid, conflict mask, multi-match mask) for an order-free set.

    The decision grid uses the same codes as first_match_grid; conflicted
    cells are coded deny-side but flagged in the conflict mask.  The
    multi-match mask marks packets matched by more than one rule regardless
    of decisions, which is the order-irrelevance invariant of rewriting.
    """
    accept = np.zeros(cfg.shape(), dtype=bool)
    deny = np.zeros(cfg.shape(), dtype=bool)
    count = np.zeros(cfg.shape(), dtype=np.int16)
    for r in rules:
        m = rule_match_mask(r, cfg)
        count += m
        if r.decision is Decision.ACCEPT:
            accept |= m
        else:
            deny |= m
    grid = np.zeros(cfg.shape(), dtype=np.int8)
    grid[accept] = ACCEPT_CODE
    grid[deny] = DENY_CODE
    return grid, accept & deny, count > 1


def first_difference(a: np.ndarray, b: np.ndarray,
                     cfg: ScaledDomainConfig) -> Packet | None:
    """Lexicographically first packet where two grids differ, else None."""
    diff = a != b
    if not diff.any():
        return None
    flat = int(np.argmax(diff.reshape(-1)))
    return Packet(*np.unravel_index(flat, cfg.shape()))


def zone_pair_region(t: Topology, z1, z2, cfg: ScaledDomainConfig) -> np.ndarray:
    """Boolean grid of packets with source in z1 and destination in z2."""
    shape = cfg.shape()
    src = _axis_mask(z1.addresses, shape[1])
    dst = _axis_mask(z2.addresses, shape[3])
    out = np.zeros(shape, dtype=bool)
    out |= (src[None, :, None, None, None] & dst[None, None, None, :, None])
    return out


def end_to_end_accept_grid(fws, t: Topology, cfg: ScaledDomainConfig
                           ) -> tuple[np.ndarray, np.ndarray]:
    """(accept grid, applicable mask) of closed-policy end-to-end decisions.

    Within the applicable region (source and destination in distinct zones),
    a packet is accepted iff every firewall of the zone pair's unique minimal
    route first-match-accepts it.  Route errors propagate, as in
    eval_end_to_end.
    """
    accept = np.zeros(cfg.shape(), dtype=bool)
    applicable = np.zeros(cfg.shape(), dtype=bool)
    fw_accept = {f.name: first_match_grid(f.rules, cfg) == ACCEPT_CODE
                 for f in fws}
    for z1 in t.zones:
        for z2 in t.zones:
            if z1.name == z2.name:
                continue
            region = zone_pair_region(t, z1, z2, cfg)
            if not region.any():
                continue
            applicable |= region
            mr = unique_minimal_route(t, z1, z2)
            ok = region.copy()
            for fw_name in mr.firewalls:
                grid = fw_accept.get(fw_name)
                if grid is None:
                    ok[:] = False
                    break
                ok &= grid
            accept |= ok
    return accept, applicable
