"""JSON file formats for policies and topologies.

Both documents carry a schema version and a domain configuration; every
file taking part in one analysis run must declare the same domains.
Parsing is strict: unknown fields, duplicate keys, unknown protocol names,
and out-of-domain values are rejected with the offending field path.
Serialization is canonical and deterministic, so serialize(parse(x)) is a
fixed point.
"""

from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass

from .model import (
    ATTR_NAMES,
    AttributeDomain,
    AttributeSet,
    ConjunctiveCondition,
    Decision,
    DomainConfig,
    DomainKind,
    FilteringRule,
    Packet,
)
from .topology import (
    Firewall,
    Topology,
    TopologyValidationError,
    Zone,
    validate_topology,
)

SCHEMA_VERSION = 1

PROTOCOL_ALIASES = {"tcp": 6, "udp": 17, "icmp": 1}

_RULE_FIELDS = ("decision", "protocol", "src", "sport", "dst", "dport")


class ParseError(ValueError):
    """Structured parse failure carrying the path of the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class PolicyDocument:
    domains: DomainConfig
    rules: tuple[FilteringRule, ...]
    schema: int = SCHEMA_VERSION


@dataclass(frozen=True)
class TopologyDocument:
    topology: Topology
    schema: int = SCHEMA_VERSION


def _no_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise ParseError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def _load_json(text: str):
    try:
        return json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except ParseError:
        raise
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} "
                         f"(line {exc.lineno}, column {exc.colno})") from exc


def _require_object(value, path: str, allowed: tuple[str, ...],
                    required: tuple[str, ...]) -> dict:
    if not isinstance(value, dict):
        raise ParseError("expected an object", path)
    for key in value:
        if key not in allowed:
            raise ParseError(f"unknown field {key!r}", path)
    for key in required:
        if key not in value:
            raise ParseError(f"missing field {key!r}", path)
    return value


def _parse_schema(obj: dict, path: str) -> int:
    version = obj.get("schema", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {version!r}",
                         f"{path}schema")
    return version


def _parse_domains(value, path: str) -> DomainConfig:
    if value is None or value == "production":
        return DomainConfig.production()
    if value == "scaled":
        return DomainConfig.scaled()
    if isinstance(value, dict):
        _require_object(value, path,
                        ("protocol_max", "address_max", "port_max"),
                        ("protocol_max", "address_max", "port_max"))
        bounds = {}
        for key in ("protocol_max", "address_max", "port_max"):
            v = value[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ParseError("expected a non-negative integer",
                                 f"{path}.{key}")
            bounds[key] = v
        return DomainConfig(**bounds)
    raise ParseError('expected "production", "scaled", or a bounds object',
                     path)


def _parse_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError("expected an integer", path)
    return value


def _parse_range(value, path: str) -> tuple[int, int]:
    if not (isinstance(value, list) and len(value) == 2):
        raise ParseError("expected a [lo, hi] pair", path)
    lo = _parse_int(value[0], f"{path}[0]")
    hi = _parse_int(value[1], f"{path}[1]")
    if lo > hi:
        raise ParseError(f"inverted range [{lo},{hi}]", path)
    return lo, hi


def _parse_address_entry(value, domain: AttributeDomain, production: bool,
                         path: str) -> tuple[int, int]:
    if isinstance(value, str):
        if not production:
            raise ParseError(
                "address names are only valid in the production domain; "
                "use bare integers or [lo, hi] ranges", path)
        try:
            if "/" in value:
                net = ipaddress.IPv4Network(value)  # host bits rejected
                return int(net.network_address), int(net.broadcast_address)
            return (int(ipaddress.IPv4Address(value)),) * 2
        except (ipaddress.AddressValueError, ipaddress.NetmaskValueError,
                ValueError) as exc:
            raise ParseError(f"invalid IPv4 address or CIDR {value!r}: {exc}",
                             path) from exc
    if isinstance(value, int) and not isinstance(value, bool):
        return value, value
    return _parse_range(value, path)


def _parse_protocol_entry(value, domain: AttributeDomain,
                          path: str) -> tuple[int, int]:
    if isinstance(value, str):
        if value == "any":
            return domain.lo, domain.hi
        if value in PROTOCOL_ALIASES:
            num = PROTOCOL_ALIASES[value]
            return num, num
        raise ParseError(f"unknown protocol name {value!r} "
                         f"(known: any, {', '.join(sorted(PROTOCOL_ALIASES))})",
                         path)
    if isinstance(value, int) and not isinstance(value, bool):
        return value, value
    return _parse_range(value, path)


def _parse_port_entry(value, path: str) -> tuple[int, int]:
    if isinstance(value, int) and not isinstance(value, bool):
        return value, value
    return _parse_range(value, path)


def _parse_attribute(values, domain: AttributeDomain, production: bool,
                     path: str) -> AttributeSet:
    if not isinstance(values, list) or not values:
        raise ParseError("expected a non-empty list", path)
    intervals = []
    for i, value in enumerate(values):
        entry_path = f"{path}[{i}]"
        if domain.kind is DomainKind.ADDRESS:
            intervals.append(_parse_address_entry(value, domain, production,
                                                  entry_path))
        elif domain.kind is DomainKind.PROTOCOL:
            intervals.append(_parse_protocol_entry(value, domain, entry_path))
        else:
            intervals.append(_parse_port_entry(value, entry_path))
    try:
        return AttributeSet.of(domain, intervals)
    except ValueError as exc:
        raise ParseError(str(exc), path) from exc


def _parse_rule(obj, index: int, domains: DomainConfig, origin: str,
                path: str) -> FilteringRule:
    _require_object(obj, path, _RULE_FIELDS, _RULE_FIELDS)
    decision = obj["decision"]
    if decision not in (Decision.ACCEPT.value, Decision.DENY.value):
        raise ParseError('decision must be "accept" or "deny"',
                         f"{path}.decision")
    production = domains.is_production
    attr_domains = domains.attribute_domains()
    attrs = tuple(
        _parse_attribute(obj[name], attr_domains[slot], production,
                         f"{path}.{name}")
        for slot, name in enumerate(ATTR_NAMES))
    return FilteringRule(id=f"{origin}.{index}",
                         decision=Decision(decision),
                         cnd=(ConjunctiveCondition(attrs),))


def parse_policy(text: str, origin: str = "policy") -> PolicyDocument:
    """Parse a policy document; rule ids are `<origin>.<ordinal>`."""
    root = _load_json(text)
    _require_object(root, "$", ("schema", "domain", "rules"), ("rules",))
    _parse_schema(root, "$.")
    domains = _parse_domains(root.get("domain"), "$.domain")
    raw_rules = root["rules"]
    if not isinstance(raw_rules, list):
        raise ParseError("expected a list", "$.rules")
    rules = tuple(_parse_rule(r, i, domains, origin, f"$.rules[{i}]")
                  for i, r in enumerate(raw_rules))
    return PolicyDocument(domains=domains, rules=rules)


def _render_domains(domains: DomainConfig):
    if domains.is_production:
        return "production"
    return {"protocol_max": domains.protocol_max,
            "address_max": domains.address_max,
            "port_max": domains.port_max}


def _render_address_set(attr: AttributeSet, production: bool) -> list:
    if not production:
        return [list(iv) for iv in attr.intervals]
    out = []
    for lo, hi in attr.intervals:
        for net in ipaddress.summarize_address_range(
                ipaddress.IPv4Address(lo), ipaddress.IPv4Address(hi)):
            out.append(str(net))
    return out


def _render_rule_records(rule: FilteringRule, production: bool) -> list[dict]:
    # Document records are single-conjunct; a multi-conjunct rule becomes
    # one record per conjunct (the conjuncts are pairwise disjoint, so the
    # split preserves semantics under both match disciplines).
    records = []
    for c in rule.cnd:
        records.append({
            "decision": rule.decision.value,
            "protocol": [list(iv) for iv in c.protocol.intervals],
            "src": _render_address_set(c.src_addr, production),
            "sport": [list(iv) for iv in c.src_port.intervals],
            "dst": _render_address_set(c.dst_addr, production),
            "dport": [list(iv) for iv in c.dst_port.intervals],
        })
    return records


def policy_to_mapping(domains: DomainConfig, rules) -> dict:
    """JSON-ready mapping for a rule sequence (used by files and stdout)."""
    production = domains.is_production
    records = []
    for rule in rules:
        records.extend(_render_rule_records(rule, production))
    return {"schema": SCHEMA_VERSION,
            "domain": _render_domains(domains),
            "rules": records}


def serialize_policy(doc: PolicyDocument) -> str:
    return dumps(policy_to_mapping(doc.domains, doc.rules))


def parse_topology(text: str) -> TopologyDocument:
    """Parse and validate a topology document.

    Schema problems raise ParseError with a field path; structural problems
    (overlapping zones, dangling references, asymmetric links) raise
    TopologyValidationError with one finding per problem.
    """
    root = _load_json(text)
    _require_object(root, "$", ("schema", "domain", "zones", "firewalls"),
                    ("zones", "firewalls"))
    _parse_schema(root, "$.")
    domains = _parse_domains(root.get("domain"), "$.domain")
    production = domains.is_production

    if not isinstance(root["zones"], list):
        raise ParseError("expected a list", "$.zones")
    zones = []
    for i, z in enumerate(root["zones"]):
        path = f"$.zones[{i}]"
        _require_object(z, path, ("name", "addresses"), ("name", "addresses"))
        if not isinstance(z["name"], str) or not z["name"]:
            raise ParseError("expected a non-empty string", f"{path}.name")
        addresses = _parse_attribute(z["addresses"], domains.address,
                                     production, f"{path}.addresses")
        zones.append(Zone(name=z["name"], addresses=addresses))

    if not isinstance(root["firewalls"], list):
        raise ParseError("expected a list", "$.firewalls")
    firewalls = []
    for i, f in enumerate(root["firewalls"]):
        path = f"$.firewalls[{i}]"
        _require_object(f, path, ("name", "adjacent_zones", "links"),
                        ("name", "adjacent_zones"))
        if not isinstance(f["name"], str) or not f["name"]:
            raise ParseError("expected a non-empty string", f"{path}.name")
        for key in ("adjacent_zones", "links"):
            value = f.get(key, [])
            if not (isinstance(value, list)
                    and all(isinstance(s, str) for s in value)):
                raise ParseError("expected a list of names", f"{path}.{key}")
        firewalls.append(Firewall(name=f["name"],
                                  adjacent_zones=tuple(f["adjacent_zones"]),
                                  links=tuple(f.get("links", []))))

    topology = Topology(zones=tuple(zones), firewalls=tuple(firewalls),
                        domains=domains)
    findings = validate_topology(topology)
    if findings:
        raise TopologyValidationError(findings)
    return TopologyDocument(topology=topology)


def topology_to_mapping(t: Topology) -> dict:
    production = t.domains.is_production
    return {
        "schema": SCHEMA_VERSION,
        "domain": _render_domains(t.domains),
        "zones": [{"name": z.name,
                   "addresses": _render_address_set(z.addresses, production)}
                  for z in t.zones],
        "firewalls": [{"name": f.name,
                       "adjacent_zones": list(f.adjacent_zones),
                       "links": list(f.links)}
                      for f in t.firewalls],
    }


def serialize_topology(doc: TopologyDocument) -> str:
    return dumps(topology_to_mapping(doc.topology))


def parse_packet(text: str, domains: DomainConfig) -> Packet:
    """Parse `proto,src,sport,dst,dport` (simulate's --packet argument)."""
    parts = text.split(",")
    if len(parts) != 5:
        raise ParseError("expected proto,src,sport,dst,dport")
    production = domains.is_production
    attr_domains = domains.attribute_domains()
    values = []
    for slot, (name, raw) in enumerate(zip(ATTR_NAMES, parts)):
        raw = raw.strip()
        domain = attr_domains[slot]
        if raw.isdigit() or (raw.startswith("-") and raw[1:].isdigit()):
            value = int(raw)
        elif domain.kind is DomainKind.PROTOCOL and raw in PROTOCOL_ALIASES:
            value = PROTOCOL_ALIASES[raw]
        elif domain.kind is DomainKind.ADDRESS and production:
            try:
                value = int(ipaddress.IPv4Address(raw))
            except ipaddress.AddressValueError as exc:
                raise ParseError(f"invalid address {raw!r}", name) from exc
        else:
            raise ParseError(f"invalid value {raw!r}", name)
        if not domain.lo <= value <= domain.hi:
            raise ParseError(f"{value} outside {domain.kind.value} domain "
                             f"[{domain.lo},{domain.hi}]", name)
        values.append(value)
    return Packet(*values)


def dumps(payload) -> str:
    """Deterministic JSON rendering used for every machine-readable output."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
