"""Optional matplotlib figures rendered next to the CLI's JSON/text reports."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.patches as mpatches
import matplotlib.pyplot as plt
import networkx as nx

from .rewriting import RewriteReport
from .topology import Topology

_FIREWALL_OK = "#7fb3d5"
_FIREWALL_BAD = "#e74c3c"
_ZONE_COLOR = "#a9dfbf"


def render_topology_figure(t: Topology, findings, path: Path) -> Path:
    """Draw zones, firewalls, and links; firewalls with findings are flagged."""
    flagged = {f.firewall for f in findings}
    graph = nx.Graph()
    for z in t.zones:
        graph.add_node(("zone", z.name))
    for f in t.firewalls:
        graph.add_node(("fw", f.name))
        for z in f.adjacent_zones:
            graph.add_edge(("fw", f.name), ("zone", z), kind="adjacency")
        for other in f.links:
            graph.add_edge(("fw", f.name), ("fw", other), kind="link")

    pos = nx.spring_layout(graph, seed=7)
    fig, ax = plt.subplots(figsize=(7, 5))
    link_edges = [e for e in graph.edges if graph.edges[e]["kind"] == "link"]
    adj_edges = [e for e in graph.edges if graph.edges[e]["kind"] == "adjacency"]
    nx.draw_networkx_edges(graph, pos, edgelist=link_edges, width=2.0, ax=ax)
    nx.draw_networkx_edges(graph, pos, edgelist=adj_edges, style="dashed",
                           edge_color="gray", ax=ax)
    fw_nodes = [n for n in graph.nodes if n[0] == "fw"]
    zone_nodes = [n for n in graph.nodes if n[0] == "zone"]
    nx.draw_networkx_nodes(
        graph, pos, nodelist=fw_nodes, node_shape="s", node_size=900,
        node_color=[_FIREWALL_BAD if n[1] in flagged else _FIREWALL_OK
                    for n in fw_nodes], ax=ax)
    nx.draw_networkx_nodes(graph, pos, nodelist=zone_nodes, node_shape="o",
                           node_size=900, node_color=_ZONE_COLOR, ax=ax)
    nx.draw_networkx_labels(graph, pos, {n: n[1] for n in graph.nodes},
                            font_size=8, ax=ax)
    ax.legend(handles=[
        mpatches.Patch(color=_FIREWALL_OK, label="firewall"),
        mpatches.Patch(color=_FIREWALL_BAD, label="firewall with finding"),
        mpatches.Patch(color=_ZONE_COLOR, label="zone"),
    ], loc="lower left", fontsize=8)
    ax.set_title("Topology" + (" — anomalies highlighted" if flagged else ""))
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_finding_summary(findings, path: Path) -> Path:
    """Bar chart of finding counts per anomaly kind."""
    counts = Counter(f.kind.value for f in findings)
    kinds = sorted(counts)
    fig, ax = plt.subplots(figsize=(6, 4))
    if kinds:
        ax.bar(kinds, [counts[k] for k in kinds], color=_FIREWALL_BAD)
        ax.set_ylabel("findings")
        ax.tick_params(axis="x", rotation=20)
    else:
        ax.text(0.5, 0.5, "no anomalies", ha="center", va="center",
                fontsize=14, transform=ax.transAxes)
        ax.set_xticks([])
        ax.set_yticks([])
    ax.set_title("Inter-firewall findings by kind")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_audit_disposition(report: RewriteReport, path: Path) -> Path:
    """Bar chart of rule dispositions after an intra-firewall audit."""
    buckets = Counter()
    for k in report.kept:
        buckets["transformed" if k.transformed else "unchanged"] += 1
    for r in report.removed:
        buckets[r.reason.value] += 1
    order = [k for k in ("unchanged", "transformed", "shadowing", "redundancy")
             if buckets[k]]
    colors = {"unchanged": _FIREWALL_OK, "transformed": "#f5b041",
              "shadowing": _FIREWALL_BAD, "redundancy": "#af7ac5"}
    fig, ax = plt.subplots(figsize=(6, 4))
    if order:
        ax.bar(order, [buckets[k] for k in order],
               color=[colors[k] for k in order])
        ax.set_ylabel("rules")
    else:
        ax.text(0.5, 0.5, "empty policy", ha="center", va="center",
                fontsize=14, transform=ax.transAxes)
    ax.set_title("Audit disposition")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
