"""Graph serialization.

GEXF is the interoperability target (Gephi reads it directly); CSV covers
edge lists, node tables, histograms, and partitions for spreadsheet work.
The GEXF writer emits a deterministic document by hand (sorted nodes and
edges, repr() floats, no timestamps) and the reader uses ElementTree, so an
export→import round trip reproduces the graph exactly.
"""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Mapping
from xml.sax.saxutils import quoteattr

from .communities import Partition
from .graph import CoocGraph, NodeInfo, mention_frequency

__all__ = [
    "ExportValidationError",
    "to_gexf",
    "from_gexf",
    "export_graph",
    "write_edges_csv",
    "write_nodes_csv",
    "write_histogram_csv",
    "write_partition_csv",
    "write_positions_csv",
]

_GEXF_NS = "http://www.gexf.net/1.2draft"
_VIZ_NS = "http://www.gexf.net/1.2draft/viz"

Positions = Mapping[str, tuple[float, float]]


class ExportValidationError(ValueError):
    """Supplied partition or positions do not cover every graph node."""


def _check_cover(graph: CoocGraph, mapping: Mapping | None, what: str) -> None:
    if mapping is None:
        return
    for nid in sorted(graph.nodes):
        if nid not in mapping:
            raise ExportValidationError(f"{what} missing node {nid!r}")


# ---------------------------------------------------------------------------
# GEXF
# ---------------------------------------------------------------------------


def to_gexf(
    graph: CoocGraph,
    partition: Mapping[str, int] | None = None,
    positions: Positions | None = None,
) -> str:
    """Serialize the graph as a GEXF 1.2draft document.

    Node attributes carry days_mentioned, total_mentions, and (when a
    partition is given) community; positions become viz:position elements.
    provenance_id rides in the meta description so nothing is lost on
    round trip.  Output is byte-deterministic for a given input.
    """
    _check_cover(graph, partition, "partition")
    _check_cover(graph, positions, "positions")
    q = quoteattr
    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<gexf xmlns={q(_GEXF_NS)} xmlns:viz={q(_VIZ_NS)} version="1.2">'
    )
    out.append("  <meta>")
    out.append("    <creator>diarynet</creator>")
    out.append(f"    <description>{_text(graph.provenance_id)}</description>")
    out.append("  </meta>")
    out.append('  <graph defaultedgetype="undirected" mode="static">')
    out.append('    <attributes class="node">')
    out.append(
        '      <attribute id="days_mentioned" title="days_mentioned" type="integer"/>'
    )
    out.append(
        '      <attribute id="total_mentions" title="total_mentions" type="integer"/>'
    )
    if partition is not None:
        out.append('      <attribute id="community" title="community" type="integer"/>')
    out.append("    </attributes>")
    out.append("    <nodes>")
    for nid in sorted(graph.nodes):
        info = graph.nodes[nid]
        out.append(f"      <node id={q(nid)} label={q(info.display_name)}>")
        out.append("        <attvalues>")
        out.append(
            f'          <attvalue for="days_mentioned" value="{info.days_mentioned}"/>'
        )
        out.append(
            f'          <attvalue for="total_mentions" value="{info.total_mentions}"/>'
        )
        if partition is not None:
            out.append(
                f'          <attvalue for="community" value="{int(partition[nid])}"/>'
            )
        out.append("        </attvalues>")
        if positions is not None:
            x, y = positions[nid]
            out.append(
                f'        <viz:position x="{float(x)!r}" y="{float(y)!r}" z="0.0"/>'
            )
        out.append("      </node>")
    out.append("    </nodes>")
    out.append("    <edges>")
    for i, (u, v) in enumerate(sorted(graph.edges)):
        w = graph.edges[(u, v)]
        out.append(
            f'      <edge id="{i}" source={q(u)} target={q(v)} weight="{w}"/>'
        )
    out.append("    </edges>")
    out.append("  </graph>")
    out.append("</gexf>")
    return "\n".join(out) + "\n"


def _text(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def from_gexf(
    text: str,
) -> tuple[CoocGraph, dict[str, int] | None, dict[str, tuple[float, float]] | None]:
    """Parse a GEXF document back into (graph, partition, positions).

    Namespace-agnostic: tags are matched by local name so documents from
    other GEXF versions still load.  partition/positions come back as None
    when the document carries no community attribute / viz positions.
    """
    root = ET.fromstring(text)
    provenance_id = ""
    for el in root.iter():
        if _local(el.tag) == "description":
            provenance_id = el.text or ""
            break
    nodes: dict[str, NodeInfo] = {}
    edges: dict[tuple[str, str], int] = {}
    partition: dict[str, int] = {}
    positions: dict[str, tuple[float, float]] = {}
    has_community_attr = any(
        _local(el.tag) == "attribute" and el.get("title") == "community"
        for el in root.iter()
    )
    for el in root.iter():
        tag = _local(el.tag)
        if tag == "node":
            nid = el.get("id", "")
            label = el.get("label", nid)
            atts: dict[str, str] = {}
            for sub in el.iter():
                st = _local(sub.tag)
                if st == "attvalue":
                    atts[sub.get("for", "")] = sub.get("value", "")
                elif st == "position":
                    positions[nid] = (float(sub.get("x", 0)), float(sub.get("y", 0)))
            nodes[nid] = NodeInfo(
                display_name=label,
                days_mentioned=int(atts.get("days_mentioned", 0)),
                total_mentions=int(atts.get("total_mentions", 0)),
            )
            if "community" in atts:
                partition[nid] = int(atts["community"])
        elif tag == "edge":
            u, v = el.get("source", ""), el.get("target", "")
            key = (u, v) if u < v else (v, u)
            edges[key] = edges.get(key, 0) + int(float(el.get("weight", "1")))
    graph = CoocGraph(nodes=nodes, edges=edges, provenance_id=provenance_id)
    return (
        graph,
        partition if has_community_attr else None,
        positions if positions else None,
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def write_edges_csv(graph: CoocGraph, path: Path) -> None:
    """Edge list: source,target,weight with (u, v) sorted rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source", "target", "weight"])
        for (u, v) in sorted(graph.edges):
            w.writerow([u, v, graph.edges[(u, v)]])


def write_nodes_csv(
    graph: CoocGraph,
    path: Path,
    partition: Mapping[str, int] | None = None,
    positions: Positions | None = None,
) -> None:
    """Node table: id,display_name,days_mentioned,total_mentions[,community][,x,y]."""
    _check_cover(graph, partition, "partition")
    _check_cover(graph, positions, "positions")
    header = ["id", "display_name", "days_mentioned", "total_mentions"]
    if partition is not None:
        header.append("community")
    if positions is not None:
        header += ["x", "y"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for nid in sorted(graph.nodes):
            info = graph.nodes[nid]
            row: list = [nid, info.display_name, info.days_mentioned, info.total_mentions]
            if partition is not None:
                row.append(int(partition[nid]))
            if positions is not None:
                x, y = positions[nid]
                row += [repr(float(x)), repr(float(y))]
            w.writerow(row)


def write_histogram_csv(graph: CoocGraph, path: Path) -> None:
    """days_mentioned histogram: one row per distinct days_mentioned value."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["days_mentioned", "persons"])
        for days, count in mention_frequency(graph).items():
            w.writerow([days, count])


def write_partition_csv(partition: Partition, path: Path) -> None:
    """node id, level-0 label, top-level label; Q values in a header comment."""
    qs = " ".join(f"level{i}={q!r}" for i, q in enumerate(partition.modularity))
    level0 = partition.levels[0] if partition.levels else {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# modularity: {qs}\n")
        w = csv.writer(fh)
        w.writerow(["node_id", "level0_community", "top_community"])
        for nid in sorted(partition.assignment):
            w.writerow([nid, level0.get(nid, 0), partition.assignment[nid]])


def write_positions_csv(positions: Positions, path: Path) -> None:
    """Layout positions: node_id,x,y with repr() floats (lossless)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "x", "y"])
        for nid in sorted(positions):
            x, y = positions[nid]
            w.writerow([nid, repr(float(x)), repr(float(y))])


def export_graph(
    graph: CoocGraph,
    partition: Mapping[str, int] | None = None,
    positions: Positions | None = None,
    format: str = "gexf",
    out_dir: Path | str = ".",
    stem: str = "network",
) -> list[Path]:
    """Write the graph under out_dir, returning the paths written.

    format "gexf" produces <stem>.gexf; "csv" produces <stem>-edges.csv and
    <stem>-nodes.csv.  Partial partition/positions are rejected up front so
    a bad export never half-writes.
    """
    _check_cover(graph, partition, "partition")
    _check_cover(graph, positions, "positions")
    out = Path(out_dir)
    fmt = format.lower()
    if fmt == "gexf":
        path = out / f"{stem}.gexf"
        path.write_text(to_gexf(graph, partition, positions), encoding="utf-8")
        return [path]
    if fmt == "csv":
        edges_path = out / f"{stem}-edges.csv"
        nodes_path = out / f"{stem}-nodes.csv"
        write_edges_csv(graph, edges_path)
        write_nodes_csv(graph, nodes_path, partition, positions)
        return [edges_path, nodes_path]
    raise ExportValidationError(f"unknown export format {format!r}")
