"""Command-line surface tying the pipeline together.

Subcommands: audit, verify, aggregate, deploy, simulate.  Exit codes are a
compatibility contract:

    0  success / no findings
    1  audit found intra-firewall anomalies under --strict
    2  usage or parse error
    3  aggregation error (or verify findings)
    4  deployment error
    5  topology validation error
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .aggregation import (
    AggregationError,
    AggregationFinding,
    aggregate,
    verify,
)
from .deployment import DeploymentError, deploy
from .formats import (
    ParseError,
    dumps,
    parse_packet,
    parse_policy,
    parse_topology,
    policy_to_mapping,
)
from .oracle import NOT_APPLICABLE, eval_end_to_end
from .rewriting import RewriteReport, policy_rewriting
from .topology import RouteError, Topology, TopologyValidationError

EXIT_OK = 0
EXIT_AUDIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_AGGREGATION = 3
EXIT_DEPLOYMENT = 4
EXIT_TOPOLOGY = 5


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}")


def _load_topology(path: str) -> Topology:
    # parse_topology validates structurally and raises on findings.
    return parse_topology(_read_text(path)).topology


def _load_firewall_rules(t: Topology, specs) -> dict[str, tuple]:
    """Resolve `name=policy.json` arguments against the topology."""
    rules = {}
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise ParseError(f"expected name=policy.json, got {spec!r}")
        if not t.has_firewall(name):
            raise ParseError(f"{name!r} is not a firewall of the topology")
        if name in rules:
            raise ParseError(f"firewall {name!r} given twice")
        doc = parse_policy(_read_text(path), origin=name)
        if doc.domains != t.domains:
            raise ParseError(
                f"{path}: domain config differs from the topology's")
        rules[name] = doc.rules
    return rules


def _finding_payload(f: AggregationFinding) -> dict:
    return {
        "kind": f.kind.value,
        "firewall": f.firewall,
        "rule": f.rule_id,
        "zone_pair": list(f.zone_pair) if f.zone_pair else None,
        "witnesses": list(f.witnesses),
    }


def _report_payload(report: RewriteReport) -> dict:
    return {
        "removed": [{"id": r.rule_id, "reason": r.reason.value,
                     "phase": r.phase.value} for r in report.removed],
        "kept": [{"id": k.rule_id, "transformed": k.transformed}
                 for k in report.kept],
    }


def _print_report_text(report: RewriteReport) -> None:
    print(f"{len(report.kept)} kept, {len(report.removed)} removed")
    for r in report.removed:
        print(f"  removed {r.rule_id}: {r.reason.value} ({r.phase.value})")
    for k in report.kept:
        state = "transformed" if k.transformed else "unchanged"
        print(f"  kept {k.rule_id} ({state})")


def cmd_audit(args) -> int:
    doc = parse_policy(_read_text(args.policy), origin=Path(args.policy).stem)
    rules, report = policy_rewriting(doc.rules)
    policy_payload = policy_to_mapping(doc.domains, rules)
    if args.output:
        Path(args.output).write_text(dumps(policy_payload), encoding="utf-8")
    if args.json:
        payload = dict(_report_payload(report))
        payload["policy"] = policy_payload
        sys.stdout.write(dumps(payload))
    else:
        _print_report_text(report)
        if not args.output:
            sys.stdout.write(dumps(policy_payload))
    if args.figures:
        from . import report as figures
        outdir = Path(args.figures)
        outdir.mkdir(parents=True, exist_ok=True)
        figures.render_audit_disposition(report, outdir / "audit.png")
    if args.strict and report.removed:
        return EXIT_AUDIT_FINDINGS
    return EXIT_OK


def cmd_verify(args) -> int:
    t = _load_topology(args.topology)
    rules = _load_firewall_rules(t, args.policies)
    fws = t.with_rules(rules).firewalls
    findings = verify(fws, t, exhaustive=args.all)
    if args.json:
        sys.stdout.write(dumps(
            {"findings": [_finding_payload(f) for f in findings]}))
    elif findings:
        print(f"{len(findings)} finding(s):")
        for f in findings:
            print(f"  {f.describe()}")
    else:
        print("no findings")
    if args.figures:
        from . import report as figures
        outdir = Path(args.figures)
        outdir.mkdir(parents=True, exist_ok=True)
        figures.render_topology_figure(t, findings, outdir / "topology.png")
        figures.render_finding_summary(findings, outdir / "findings.png")
    return EXIT_AGGREGATION if findings else EXIT_OK


def cmd_aggregate(args) -> int:
    t = _load_topology(args.topology)
    rules = _load_firewall_rules(t, args.policies)
    fws = t.with_rules(rules).firewalls
    try:
        policy = aggregate(fws, t)
    except AggregationError as exc:
        if args.json:
            sys.stdout.write(dumps({"error": _finding_payload(exc.finding)}))
        else:
            print(f"aggregation error: {exc.finding.describe()}",
                  file=sys.stderr)
        return EXIT_AGGREGATION
    payload = policy_to_mapping(policy.domains, policy.rules)
    text = dumps(payload)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    if args.json or not args.output:
        sys.stdout.write(text)
    else:
        print(f"aggregated {sum(len(r) for r in rules.values())} rules "
              f"from {len(rules)} firewalls into {len(policy.rules)} "
              f"global rules -> {args.output}")
    return EXIT_OK


def cmd_deploy(args) -> int:
    t = _load_topology(args.topology)
    doc = parse_policy(_read_text(args.policy), origin="global")
    if doc.domains != t.domains:
        raise ParseError(
            f"{args.policy}: domain config differs from the topology's")
    try:
        plan = deploy(doc.rules, t)
    except DeploymentError as exc:
        if args.json:
            sys.stdout.write(dumps({"error": {
                "kind": exc.kind.value,
                "rule": exc.rule_id,
                "zone_pair": list(exc.zone_pair) if exc.zone_pair else None,
            }}))
        else:
            print(f"deployment error: {exc}", file=sys.stderr)
        return EXIT_DEPLOYMENT

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"schema": 1, "firewalls": {}, "warnings": [
        {"rule": w.rule_id, "zone_pair": list(w.zone_pair),
         "reason": w.reason}
        for w in plan.warnings]}
    for fw in t.firewalls:
        fw_rules = plan.rules_by_firewall.get(fw.name, ())
        filename = f"{fw.name}.json"
        payload = policy_to_mapping(t.domains, fw_rules)
        (outdir / filename).write_text(dumps(payload), encoding="utf-8")
        manifest["firewalls"][fw.name] = {
            "file": filename,
            "rules": len(payload["rules"]),
        }
    (outdir / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    if args.json:
        sys.stdout.write(dumps(manifest))
    else:
        print(f"deployed to {outdir} "
              f"({len(t.firewalls)} firewall files, "
              f"{len(plan.warnings)} warning(s))")
        for w in plan.warnings:
            print(f"  warning: rule {w.rule_id} "
                  f"{w.zone_pair[0]} -> {w.zone_pair[1]}: {w.reason}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    t = _load_topology(args.topology)
    rules = _load_firewall_rules(t, args.policies)
    fws = t.with_rules(rules).firewalls
    pkt = parse_packet(args.packet, t.domains)
    z1 = t.zone_of_address(pkt.src_addr)
    z2 = t.zone_of_address(pkt.dst_addr)
    try:
        outcome = eval_end_to_end(fws, t, pkt)
    except RouteError as exc:
        print(f"route error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    decision = ("not_applicable" if outcome is NOT_APPLICABLE
                else outcome.value)
    if args.json:
        payload = {
            "decision": decision,
            "source_zone": z1.name if z1 else None,
            "destination_zone": z2.name if z2 else None,
        }
        sys.stdout.write(dumps(payload))
    else:
        print(decision)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwfold",
        description="Audit, aggregate, and deploy firewall filtering policies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit",
                       help="rewrite one policy and report removed rules")
    p.add_argument("policy", help="policy document (JSON)")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when any rule was removed")
    p.add_argument("-o", "--output", help="write the rewritten policy here")
    p.add_argument("--json", action="store_true", help="machine output")
    p.add_argument("--figures", metavar="DIR",
                   help="render report figures into DIR")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("verify",
                       help="report inter-firewall anomalies of a setup")
    p.add_argument("topology", help="topology document (JSON)")
    p.add_argument("policies", nargs="*", metavar="name=policy.json",
                   help="per-firewall policies")
    p.add_argument("--all", action="store_true",
                   help="keep scanning after the first finding")
    p.add_argument("--json", action="store_true", help="machine output")
    p.add_argument("--figures", metavar="DIR",
                   help="render report figures into DIR")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("aggregate",
                       help="fold per-firewall policies into a global policy")
    p.add_argument("topology")
    p.add_argument("policies", nargs="*", metavar="name=policy.json")
    p.add_argument("-o", "--output", help="write the global policy here")
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("deploy",
                       help="place a global policy onto the topology")
    p.add_argument("topology")
    p.add_argument("policy", help="global policy document (JSON)")
    p.add_argument("-o", "--output", required=True, metavar="DIR",
                   help="directory for per-firewall files and manifest")
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("simulate",
                       help="end-to-end decision for one packet")
    p.add_argument("topology")
    p.add_argument("policies", nargs="*", metavar="name=policy.json")
    p.add_argument("--packet", required=True,
                   metavar="proto,src,sport,dst,dport")
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(func=cmd_simulate)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TopologyValidationError as exc:
        print("topology validation failed:", file=sys.stderr)
        for finding in exc.findings:
            print(f"  {finding}", file=sys.stderr)
        return EXIT_TOPOLOGY


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
