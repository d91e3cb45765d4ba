"""CLI subcommands, exit codes, and output determinism."""

import json

import pytest

from fwfold.cli import cli_main

SCALED_DOMAIN = '{"protocol_max": 1, "address_max": 15, "port_max": 7}'

TOPOLOGY = f"""
{{
  "domain": {SCALED_DOMAIN},
  "zones": [
    {{"name": "lan", "addresses": [[0, 7]]}},
    {{"name": "dmz", "addresses": [[8, 15]]}}
  ],
  "firewalls": [
    {{"name": "fw1", "adjacent_zones": ["lan"], "links": ["fw2"]}},
    {{"name": "fw2", "adjacent_zones": ["dmz"], "links": ["fw1"]}}
  ]
}}
"""

BAD_TOPOLOGY = TOPOLOGY.replace("[[8, 15]]", "[[7, 15]]")

DISCONNECTED_TOPOLOGY = TOPOLOGY.replace('"links": ["fw2"]', '"links": []') \
    .replace('"links": ["fw1"]', '"links": []')


def rule(decision, **attrs):
    base = {"decision": decision, "protocol": [[0, 1]], "src": [[0, 15]],
            "sport": [[0, 7]], "dst": [[0, 15]], "dport": [[0, 7]]}
    base.update(attrs)
    return base


def policy(*rules):
    return json.dumps({"domain": json.loads(SCALED_DOMAIN),
                       "rules": list(rules)})


ACCEPT_WEB = rule("accept", src=[[0, 7]], dst=[[8, 15]], dport=[[1, 1]])
DENY_WEB = rule("deny", src=[[0, 7]], dst=[[8, 15]], dport=[[1, 1]])

CLEAN_FW1 = policy(ACCEPT_WEB)
CLEAN_FW2 = policy(ACCEPT_WEB)
SHADOW_FW1 = policy(DENY_WEB)
SHADOW_FW2 = policy(ACCEPT_WEB)
# deny-all followed by an accept: the accept is shadowed.
ANOMALOUS = policy(rule("deny"), ACCEPT_WEB)
GLOBAL = policy(ACCEPT_WEB, rule("deny", src=[[0, 7]], dst=[[8, 15]],
                                 dport=[[2, 2]]))


@pytest.fixture
def ws(tmp_path):
    files = {
        "topo.json": TOPOLOGY,
        "bad_topo.json": BAD_TOPOLOGY,
        "island_topo.json": DISCONNECTED_TOPOLOGY,
        "clean1.json": CLEAN_FW1,
        "clean2.json": CLEAN_FW2,
        "shadow1.json": SHADOW_FW1,
        "shadow2.json": SHADOW_FW2,
        "anomalous.json": ANOMALOUS,
        "global.json": GLOBAL,
        "garbage.json": "{not json",
    }
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    return tmp_path


def run(capsys, *argv):
    code = cli_main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAudit:
    def test_clean_policy_exits_zero(self, ws, capsys):
        code, out, _ = run(capsys, "audit", ws / "clean1.json")
        assert code == 0
        assert "0 removed" in out

    def test_strict_flags_anomalies(self, ws, capsys):
        code, out, _ = run(capsys, "audit", "--strict", ws / "anomalous.json")
        assert code == 1
        assert "shadowing" in out
        code, _, _ = run(capsys, "audit", ws / "anomalous.json")
        assert code == 0

    def test_json_output_includes_policy_and_report(self, ws, capsys):
        code, out, _ = run(capsys, "audit", "--json", ws / "anomalous.json")
        assert code == 0
        payload = json.loads(out)
        assert payload["removed"][0]["reason"] == "shadowing"
        assert payload["policy"]["rules"]

    def test_output_file(self, ws, capsys):
        out_file = ws / "rewritten.json"
        code, _, _ = run(capsys, "audit", ws / "anomalous.json",
                         "-o", out_file)
        assert code == 0
        saved = json.loads(out_file.read_text())
        assert len(saved["rules"]) == 1

    def test_parse_error_exits_two(self, ws, capsys):
        code, _, err = run(capsys, "audit", ws / "garbage.json")
        assert code == 2
        assert "error" in err

    def test_figures_written(self, ws, capsys):
        figdir = ws / "audit_figs"
        code, _, _ = run(capsys, "audit", "--figures", figdir,
                         ws / "anomalous.json")
        assert code == 0
        assert (figdir / "audit.png").stat().st_size > 0


class TestVerify:
    def test_clean_setup(self, ws, capsys):
        code, out, _ = run(capsys, "verify", ws / "topo.json",
                           f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json")
        assert code == 0
        assert "no findings" in out

    def test_shadowing_finding_exits_three(self, ws, capsys):
        code, out, _ = run(capsys, "verify", "--json", ws / "topo.json",
                           f"fw1={ws}/shadow1.json", f"fw2={ws}/shadow2.json")
        assert code == 3
        payload = json.loads(out)
        assert payload["findings"][0]["kind"] == "shadowing"

    def test_bad_topology_exits_five(self, ws, capsys):
        code, _, err = run(capsys, "verify", ws / "bad_topo.json")
        assert code == 5
        assert "overlap" in err

    def test_unknown_firewall_name_exits_two(self, ws, capsys):
        code, _, _ = run(capsys, "verify", ws / "topo.json",
                         f"fw9={ws}/clean1.json")
        assert code == 2

    def test_domain_mismatch_exits_two(self, ws, capsys):
        (ws / "prod.json").write_text(json.dumps({
            "domain": "production",
            "rules": [{"decision": "accept", "protocol": ["tcp"],
                       "src": ["10.0.0.0/8"], "sport": [[0, 65535]],
                       "dst": ["10.0.0.0/8"], "dport": [[80, 80]]}]}))
        code, _, err = run(capsys, "verify", ws / "topo.json",
                           f"fw1={ws}/prod.json")
        assert code == 2
        assert "domain" in err

    def test_figures_written(self, ws, capsys):
        figdir = ws / "figs"
        code, _, _ = run(capsys, "verify", "--figures", figdir,
                         ws / "topo.json", f"fw1={ws}/clean1.json",
                         f"fw2={ws}/clean2.json")
        assert code == 0
        for name in ("topology.png", "findings.png"):
            assert (figdir / name).stat().st_size > 0


class TestAggregate:
    def test_success_prints_policy_document(self, ws, capsys):
        code, out, _ = run(capsys, "aggregate", ws / "topo.json",
                           f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json")
        assert code == 0
        payload = json.loads(out)
        assert payload["rules"]
        assert payload["rules"][0]["decision"] == "accept"

    def test_shadowing_fixture_exits_three_with_kind(self, ws, capsys):
        code, out, _ = run(capsys, "aggregate", "--json", ws / "topo.json",
                           f"fw1={ws}/shadow1.json", f"fw2={ws}/shadow2.json")
        assert code == 3
        assert json.loads(out)["error"]["kind"] == "shadowing"

    def test_output_file_feeds_deploy(self, ws, capsys):
        global_file = ws / "agg.json"
        code, _, _ = run(capsys, "aggregate", ws / "topo.json",
                         f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json",
                         "-o", global_file)
        assert code == 0
        deploy_dir = ws / "deployed"
        code, _, _ = run(capsys, "deploy", ws / "topo.json", global_file,
                         "-o", deploy_dir)
        assert code == 0

    def test_json_output_byte_identical_across_runs(self, ws, capsys):
        args = ("aggregate", "--json", ws / "topo.json",
                f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2


class TestDeploy:
    def test_writes_per_firewall_files_and_manifest(self, ws, capsys):
        outdir = ws / "plan"
        code, out, _ = run(capsys, "deploy", "--json", ws / "topo.json",
                           ws / "global.json", "-o", outdir)
        assert code == 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert set(manifest["firewalls"]) == {"fw1", "fw2"}
        fw1 = json.loads((outdir / "fw1.json").read_text())
        fw2 = json.loads((outdir / "fw2.json").read_text())
        # accept on both firewalls, deny only upstream.
        assert len(fw1["rules"]) == 2
        assert len(fw2["rules"]) == 1
        assert json.loads(out) == manifest

    def test_no_route_exits_four(self, ws, capsys):
        code, _, err = run(capsys, "deploy", ws / "island_topo.json",
                           ws / "global.json", "-o", ws / "x")
        assert code == 4
        assert "no_route" in err

    def test_deployment_is_deterministic(self, ws, capsys):
        out1 = ws / "p1"
        out2 = ws / "p2"
        run(capsys, "deploy", ws / "topo.json", ws / "global.json", "-o", out1)
        run(capsys, "deploy", ws / "topo.json", ws / "global.json", "-o", out2)
        for name in ("fw1.json", "fw2.json", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestSimulate:
    def test_accepted_packet(self, ws, capsys):
        code, out, _ = run(capsys, "simulate", ws / "topo.json",
                           f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json",
                           "--packet", "0,1,0,9,1")
        assert code == 0
        assert out.strip() == "accept"

    def test_denied_packet(self, ws, capsys):
        code, out, _ = run(capsys, "simulate", ws / "topo.json",
                           f"fw1={ws}/clean1.json", f"fw2={ws}/clean2.json",
                           "--packet", "0,1,0,9,2")
        assert code == 0
        assert out.strip() == "deny"

    def test_same_zone_packet_not_applicable(self, ws, capsys):
        code, out, _ = run(capsys, "simulate", "--json", ws / "topo.json",
                           "--packet", "0,1,0,2,1")
        assert code == 0
        payload = json.loads(out)
        assert payload["decision"] == "not_applicable"
        assert payload["source_zone"] == "lan"

    def test_bad_packet_exits_two(self, ws, capsys):
        code, _, _ = run(capsys, "simulate", ws / "topo.json",
                         "--packet", "99,0,0,0")
        assert code == 2

    def test_ambiguous_route_exits_five(self, ws, capsys):
        diamond = json.loads(TOPOLOGY)
        diamond["firewalls"] = [
            {"name": "fw1", "adjacent_zones": ["lan"],
             "links": ["fw2", "fw3"]},
            {"name": "fw2", "adjacent_zones": [], "links": ["fw1", "fw4"]},
            {"name": "fw3", "adjacent_zones": [], "links": ["fw1", "fw4"]},
            {"name": "fw4", "adjacent_zones": ["dmz"],
             "links": ["fw2", "fw3"]},
        ]
        (ws / "diamond.json").write_text(json.dumps(diamond))
        code, _, err = run(capsys, "simulate", ws / "diamond.json",
                           "--packet", "0,1,0,9,1")
        assert code == 5
        assert "ambiguous" in err


class TestUsage:
    def test_no_arguments_exits_two(self, capsys):
        assert cli_main([]) == 2
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert cli_main(["--help"]) == 0
        capsys.readouterr()

    def test_missing_file_exits_two(self, ws, capsys):
        code, _, err = run(capsys, "audit", ws / "missing.json")
        assert code == 2
