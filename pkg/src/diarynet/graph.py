"""Co-occurrence graph construction, filtering, and corpus statistics.

Edge weights are day-based: two people connect once per shared day, no matter
how often an entry repeats their names.  Pair-counting would double-weight
verbose entries.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import date as Date
from typing import Iterable, Mapping, Sequence

from .canon import digest_of

__all__ = [
    "NodeInfo",
    "CoocGraph",
    "MinDays",
    "TopN",
    "CorpusStats",
    "assemble_resolved_corpus",
    "build_cooccurrence",
    "filter_graph",
    "mention_frequency",
    "corpus_stats",
]


@dataclass(frozen=True)
class NodeInfo:
    display_name: str
    days_mentioned: int
    total_mentions: int


@dataclass(frozen=True)
class CoocGraph:
    """Weighted undirected person graph.

    edges keys are (u, v) with u < v; no self-edges ever.  provenance_id is
    filled by the pipeline with the digest of the build step that produced
    the graph; it is empty for graphs built outside a project.
    """

    nodes: dict[str, NodeInfo] = field(default_factory=dict)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    provenance_id: str = ""

    def content_digest(self) -> str:
        return digest_of(
            {
                "nodes": {
                    nid: [ni.display_name, ni.days_mentioned, ni.total_mentions]
                    for nid, ni in sorted(self.nodes.items())
                },
                "edges": {f"{u}|{v}": w for (u, v), w in sorted(self.edges.items())},
            }
        )


@dataclass(frozen=True)
class MinDays:
    k: int


@dataclass(frozen=True)
class TopN:
    n: int


def assemble_resolved_corpus(
    resolved_mentions: Iterable,
    exclude: Iterable[str] = (),
    all_dates: Iterable[Date] = (),
) -> list[tuple[Date, list[str]]]:
    """Group resolved mentions into (date, ids) rows for graph building.

    Only mentions with status "resolved" contribute.  Ids in exclude (the
    ego-exclusion list: the diarist is implicitly present on every page) are
    dropped here, before any counting.  all_dates seeds rows for dates with
    no resolved mentions so the statistics see genuinely empty days as zero.
    """
    excluded = set(exclude)
    per_day: dict[Date, list[str]] = {d: [] for d in all_dates}
    for rm in resolved_mentions:
        if rm.status != "resolved" or rm.entity_id is None:
            continue
        if rm.entity_id in excluded:
            continue
        per_day.setdefault(rm.mention.date, []).append(rm.entity_id)
    return [(d, per_day[d]) for d in sorted(per_day)]


def build_cooccurrence(
    resolved_corpus: Sequence[tuple[Date, Iterable[str]]],
    window_days: int = 0,
    display_names: Mapping[str, str] | None = None,
) -> CoocGraph:
    """Build the weighted co-occurrence graph.

    For window_days 0 the weight of (u, v) is the number of distinct dates on
    which both appear.  For window_days k > 0 (an extension beyond same-day
    co-mention) it is the number of distinct unordered date pairs {a, b} with
    u on a, v on b, and |a - b| <= k.  Repeated ids within one date count the
    day once for edges but every time for total_mentions.
    """
    if window_days < 0:
        raise ValueError("window_days must be >= 0")
    names = display_names or {}

    day_ids: dict[Date, set[str]] = {}
    total_mentions: dict[str, int] = {}
    for day, ids in resolved_corpus:
        bucket = day_ids.setdefault(day, set())
        for pid in ids:
            bucket.add(pid)
            total_mentions[pid] = total_mentions.get(pid, 0) + 1

    days_mentioned: dict[str, int] = {}
    for bucket in day_ids.values():
        for pid in bucket:
            days_mentioned[pid] = days_mentioned.get(pid, 0) + 1

    dates = sorted(day_ids)
    edge_daypairs: dict[tuple[str, str], set[tuple[Date, Date]]] = {}
    for i, d1 in enumerate(dates):
        for d2 in dates[i:]:
            if (d2 - d1).days > window_days:
                break
            for u in day_ids[d1]:
                for v in day_ids[d2]:
                    if u == v:
                        continue
                    key = (u, v) if u < v else (v, u)
                    edge_daypairs.setdefault(key, set()).add((d1, d2))

    nodes = {
        pid: NodeInfo(
            display_name=names.get(pid, pid),
            days_mentioned=days_mentioned.get(pid, 0),
            total_mentions=total_mentions.get(pid, 0),
        )
        for pid in sorted(days_mentioned)
    }
    edges = {key: len(pairs) for key, pairs in sorted(edge_daypairs.items())}
    return CoocGraph(nodes=nodes, edges=edges)


def filter_graph(
    graph: CoocGraph, criterion: MinDays | TopN
) -> tuple[CoocGraph, set[str]]:
    """Keep nodes passing the criterion plus the edges between them.

    Node attributes (days_mentioned in particular) are copied unchanged, so
    filtering never rewrites history.  TopN breaks ties by display name, then
    id, so the cut is deterministic.
    """
    if isinstance(criterion, MinDays):
        if criterion.k < 1:
            raise ValueError("MinDays requires k >= 1")
        retained = {
            nid for nid, ni in graph.nodes.items() if ni.days_mentioned >= criterion.k
        }
    elif isinstance(criterion, TopN):
        if criterion.n < 0:
            raise ValueError("TopN requires n >= 0")
        ranked = sorted(
            graph.nodes.items(),
            key=lambda kv: (-kv[1].days_mentioned, kv[1].display_name, kv[0]),
        )
        retained = {nid for nid, _ in ranked[: criterion.n]}
    else:
        raise TypeError(f"unknown filter criterion {criterion!r}")

    nodes = {nid: graph.nodes[nid] for nid in sorted(retained)}
    edges = {
        (u, v): w for (u, v), w in graph.edges.items() if u in retained and v in retained
    }
    return CoocGraph(nodes=nodes, edges=edges, provenance_id=graph.provenance_id), retained


def mention_frequency(graph: CoocGraph) -> dict[int, int]:
    """days_mentioned histogram: bins[d] = number of people seen on d days."""
    bins: dict[int, int] = {}
    for ni in graph.nodes.values():
        bins[ni.days_mentioned] = bins.get(ni.days_mentioned, 0) + 1
    return dict(sorted(bins.items()))


@dataclass(frozen=True)
class CorpusStats:
    mean_persons_per_day: float | None
    sd_persons_per_day: float | None
    total_persons: int
    span_days: int
    defined: bool


def corpus_stats(resolved_corpus: Sequence[tuple[Date, Iterable[str]]]) -> CorpusStats:
    """Per-day distinct-person statistics over every date in the input.

    Dates with zero resolved mentions must be present as empty rows to count
    as zeros; the pipeline passes every entry date for exactly this reason.
    SD uses the population convention.  An empty input yields a stats object
    flagged undefined rather than an error.
    """
    day_ids: dict[Date, set[str]] = {}
    for day, ids in resolved_corpus:
        day_ids.setdefault(day, set()).update(ids)
    if not day_ids:
        return CorpusStats(None, None, 0, 0, defined=False)
    counts = [len(s) for s in day_ids.values()]
    everyone = set().union(*day_ids.values()) if day_ids else set()
    span = (max(day_ids) - min(day_ids)).days + 1
    return CorpusStats(
        mean_persons_per_day=statistics.fmean(counts),
        sd_persons_per_day=statistics.pstdev(counts),
        total_persons=len(everyone),
        span_days=span,
        defined=True,
    )
