"""fwfold: audit, aggregate, and redeploy firewall filtering policies."""

from .aggregation import (
    AggregationError,
    AggregationFinding,
    AnomalyKind,
    GlobalPolicy,
    aggregate,
    verify,
)
from .deployment import (
    DeploymentError,
    DeploymentErrorKind,
    DeploymentPlan,
    DeploymentWarning,
    deploy,
)
from .model import (
    AttributeDomain,
    AttributeSet,
    ConjunctiveCondition,
    Decision,
    DomainConfig,
    DomainKind,
    DomainMismatchError,
    FilteringRule,
    Packet,
    attr_difference,
    attr_intersect,
    attr_union,
    condition,
    matches,
    rules_correlated,
    with_zone_addresses,
)
from .oracle import (
    CONFLICT,
    NOT_APPLICABLE,
    ScaledDomainConfig,
    check_equivalence,
    eval_any_match,
    eval_end_to_end,
    eval_first_match,
)
from .rewriting import (
    AuditPhase,
    RemovalReason,
    RewriteReport,
    exclusion,
    policy_rewriting,
    test_redundancy,
)
from .topology import (
    AmbiguousRouteError,
    Firewall,
    NoRouteError,
    Path,
    RouteError,
    Topology,
    TopologyValidationError,
    Zone,
    minimal_routes,
    routes,
    unique_minimal_route,
    validate_topology,
    zones_intersecting,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError", "AggregationFinding", "AnomalyKind", "GlobalPolicy",
    "TopologyValidationError", "aggregate", "verify",
    "DeploymentError", "DeploymentErrorKind", "DeploymentPlan",
    "DeploymentWarning", "deploy",
    "AttributeDomain", "AttributeSet", "ConjunctiveCondition", "Decision",
    "DomainConfig", "DomainKind", "DomainMismatchError", "FilteringRule",
    "Packet", "attr_difference", "attr_intersect", "attr_union", "condition",
    "matches", "rules_correlated", "with_zone_addresses",
    "CONFLICT", "NOT_APPLICABLE", "ScaledDomainConfig", "check_equivalence",
    "eval_any_match", "eval_end_to_end", "eval_first_match",
    "AuditPhase", "RemovalReason", "RewriteReport", "exclusion",
    "policy_rewriting", "test_redundancy",
    "AmbiguousRouteError", "Firewall", "NoRouteError", "Path", "RouteError",
    "Topology", "Zone", "minimal_routes", "routes", "unique_minimal_route",
    "validate_topology", "zones_intersecting",
]
