"""Pipeline orchestration over a project directory.

A project is a plain directory: corpus/*.txt, aliases.log, project.yaml,
provenance.log, exports/.  run() executes the eight pipeline stages in order
(parse, extract, decision, build, filter, communities, layout, export) and
appends one provenance record per stage; replay() re-executes every recorded
step from its recorded parameter snapshot and fails loudly on the first
digest divergence.

Every stage is a pure function of (input files, params), which is what makes
replay byte-exact: stage outputs are digested canonically and the digests
are the only coupling between stages.
"""

from __future__ import annotations

import hashlib
import json
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

from .canon import digest_of, sha256_hex
from .communities import Partition, louvain, partition_agreement
from .config import ProjectConfig, config_params, load_config
from .corpus import Corpus, load_corpus
from .exports import (
    export_graph,
    write_histogram_csv,
    write_partition_csv,
    write_positions_csv,
)
from .extraction import Mention, compile_gazetteer, extract_mentions
from .graph import (
    CoocGraph,
    CorpusStats,
    MinDays,
    TopN,
    assemble_resolved_corpus,
    build_cooccurrence,
    corpus_stats,
    filter_graph,
    mention_frequency,
)
from .layout import LayoutParams, fa2_run, resolve_label_overlaps
from .provenance import Ledger, ProvenanceRecord, ensure_replay_digest
from .resolution import (
    AliasLog,
    AliasTable,
    Decision,
    ResolvedMention,
    apply_decision as apply_decision_to_table,
    build_review_queue,
    decision_to_dict,
    resolve_mentions,
    serialize_table,
)

__all__ = [
    "ProjectError",
    "PipelineResult",
    "Project",
    "STAGE_SEQUENCE",
    "run_stage",
    "stats_report",
]

# Deterministic label-box model for overlap removal: positions are scaled to
# a fixed canvas first, then boxes sized from the display-name length.
CANVAS = 1000.0
LABEL_CHAR_PX = 7.0
LABEL_HEIGHT_PX = 16.0
LABEL_PASSES = 50


class ProjectError(Exception):
    """A pipeline stage failed; .stage names it for exit-code mapping."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage


@dataclass
class PipelineResult:
    corpus: Corpus
    table: AliasTable
    mentions: list[Mention]
    resolved: list[ResolvedMention]
    graph_full: CoocGraph
    graph_filtered: CoocGraph
    retained: set[str]
    partition: Partition
    positions: dict[str, tuple[float, float]]
    layout_converged: bool
    records: list[ProvenanceRecord]
    export_paths: list[Path]


# ---------------------------------------------------------------------------
# Canonical digests of stage artifacts
# ---------------------------------------------------------------------------


def corpus_files_digest(files: Sequence[Path], root: Path) -> str:
    return digest_of(
        {str(p.relative_to(root)): sha256_hex(p.read_bytes()) for p in files}
    )


def corpus_digest(corpus: Corpus) -> str:
    return digest_of(
        [
            [e.volume_id, e.date.isoformat(), e.text, list(e.source_span)]
            for e in corpus.entries
        ]
    )


def mentions_digest(mentions: Sequence[Mention]) -> str:
    return digest_of(
        [
            [m.volume_id, m.date.isoformat(), m.surface, m.normalized,
             list(m.char_span), m.source]
            for m in mentions
        ]
    )


def table_digest(table: AliasTable) -> str:
    return sha256_hex(serialize_table(table))


def resolved_digest(resolved: Sequence[ResolvedMention]) -> str:
    return digest_of(
        [
            [rm.mention.volume_id, rm.mention.date.isoformat(), rm.mention.normalized,
             list(rm.mention.char_span), rm.status, rm.entity_id, list(rm.candidates)]
            for rm in resolved
        ]
    )


def partition_digest(partition: Partition) -> str:
    return digest_of(
        {
            "assignment": partition.assignment,
            "levels": [dict(level) for level in partition.levels],
            "modularity": list(partition.modularity),
        }
    )


def positions_digest(positions: Mapping[str, tuple[float, float]]) -> str:
    return digest_of({nid: [x, y] for nid, (x, y) in positions.items()})


# ---------------------------------------------------------------------------
# Stage executors (shared by run and replay)
# ---------------------------------------------------------------------------


def _glob_corpus_files(root: Path, globs: Sequence[str]) -> list[Path]:
    files: set[Path] = set()
    for pattern in globs:
        files.update(root.glob(pattern))
    if not files:
        raise ProjectError(
            "parse", f"no corpus files match {list(globs)!r} under {root}"
        )
    return sorted(files)


def _exec_parse(root: Path, params: Mapping) -> tuple[Corpus, str, str]:
    files = _glob_corpus_files(root, params["globs"])
    input_digest = corpus_files_digest(files, root)
    try:
        corpus = load_corpus(files, date_patterns=params.get("date_patterns"))
    except Exception as exc:
        raise ProjectError("parse", str(exc)) from exc
    return corpus, input_digest, corpus_digest(corpus)


def _exec_extract(
    root: Path, corpus: Corpus, params: Mapping
) -> tuple[list[Mention], str]:
    try:
        table = AliasLog(root / "aliases.log").replay(version=params["alias_version"])
        gazetteer = compile_gazetteer(table, honorifics=tuple(params["honorifics"]))
        mentions: list[Mention] = []
        for entry in corpus.entries:
            mentions.extend(extract_mentions(entry, gazetteer))
    except ProjectError:
        raise
    except Exception as exc:
        raise ProjectError("extract", str(exc)) from exc
    return mentions, mentions_digest(mentions)


def _exec_resolve(
    root: Path, mentions: Sequence[Mention], params: Mapping
) -> tuple[AliasTable, list[ResolvedMention], str]:
    try:
        table = AliasLog(root / "aliases.log").replay(version=params["alias_version"])
        resolved = resolve_mentions(mentions, table)
    except Exception as exc:
        raise ProjectError("decision", str(exc)) from exc
    return table, resolved, resolved_digest(resolved)


def _exec_build(
    corpus: Corpus,
    table: AliasTable,
    resolved: Sequence[ResolvedMention],
    params: Mapping,
) -> tuple[CoocGraph, str]:
    try:
        rows = assemble_resolved_corpus(
            resolved,
            exclude=params["exclude"],
            all_dates=[e.date for e in corpus.entries],
        )
        names = {eid: ent.display_name for eid, ent in table.entities.items()}
        graph = build_cooccurrence(
            rows, window_days=params["window_days"], display_names=names
        )
    except Exception as exc:
        raise ProjectError("build", str(exc)) from exc
    return graph, graph.content_digest()


def _exec_filter(graph: CoocGraph, params: Mapping) -> tuple[CoocGraph, set[str], str]:
    try:
        criterion = (
            MinDays(params["value"])
            if params["kind"] == "min_days"
            else TopN(params["value"])
        )
        filtered, retained = filter_graph(graph, criterion)
    except Exception as exc:
        raise ProjectError("filter", str(exc)) from exc
    return filtered, retained, filtered.content_digest()


def _exec_communities(graph: CoocGraph, params: Mapping) -> tuple[Partition, str]:
    try:
        if not graph.nodes:
            partition = Partition(assignment={}, levels=({},), modularity=(0.0,))
        else:
            partition = louvain(graph, seed=params["seed"], gamma=params["gamma"])
    except Exception as exc:
        raise ProjectError("communities", str(exc)) from exc
    return partition, partition_digest(partition)


def _exec_layout(
    graph: CoocGraph, params: Mapping
) -> tuple[dict[str, tuple[float, float]], bool, str]:
    try:
        layout_params = LayoutParams(
            **{k: params[k] for k in LayoutParams.__dataclass_fields__}
        )
        result = fa2_run(graph, layout_params, seed=params["seed"])
        positions = dict(result.positions)
        if positions:
            xs = [p[0] for p in positions.values()]
            ys = [p[1] for p in positions.values()]
            extent = max(max(xs) - min(xs), max(ys) - min(ys))
            scale = params["canvas"] / extent if extent > 0 else 1.0
            cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
            positions = {
                nid: ((x - cx) * scale, (y - cy) * scale)
                for nid, (x, y) in positions.items()
            }
            boxes = {
                nid: (
                    params["label_char_px"] * max(1, len(graph.nodes[nid].display_name)),
                    params["label_height_px"],
                )
                for nid in positions
            }
            positions, _ = resolve_label_overlaps(
                positions,
                boxes,
                max_passes=params["label_passes"],
                seed=params["seed"],
            )
    except Exception as exc:
        raise ProjectError("layout", str(exc)) from exc
    return positions, result.converged, positions_digest(positions)


def _exec_export(
    out_dir: Path,
    graph: CoocGraph,
    partition: Partition,
    positions: Mapping[str, tuple[float, float]],
    params: Mapping,
) -> tuple[list[Path], str]:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths: list[Path] = []
        for fmt in params["formats"]:
            paths.extend(
                export_graph(
                    graph,
                    partition.assignment,
                    positions,
                    format=fmt,
                    out_dir=out_dir,
                    stem="network",
                )
            )
        partition_path = out_dir / "partition.csv"
        write_partition_csv(partition, partition_path)
        positions_path = out_dir / "positions.csv"
        write_positions_csv(positions, positions_path)
        histogram_path = out_dir / "histogram.csv"
        write_histogram_csv(graph, histogram_path)
        paths += [partition_path, positions_path, histogram_path]
    except Exception as exc:
        raise ProjectError("export", str(exc)) from exc
    digest = digest_of(
        {p.name: sha256_hex(p.read_bytes()) for p in sorted(paths)}
    )
    return paths, digest


# ---------------------------------------------------------------------------
# Project
# ---------------------------------------------------------------------------


class Project:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        try:
            self.config: ProjectConfig = load_config(self.root / "project.yaml")
        except Exception as exc:
            raise ProjectError("config", str(exc)) from exc
        self.ledger = Ledger(self.root / "provenance.log")
        self.alias_log = AliasLog(self.root / "aliases.log")

    # -- alias helpers ------------------------------------------------------

    def alias_version(self) -> int:
        return len(self.alias_log.read_records(verify=True))

    def load_table(self, version: int | None = None) -> AliasTable:
        return self.alias_log.replay(version=version)

    # -- pipeline -----------------------------------------------------------

    def _stage_params(self) -> dict[str, dict]:
        cfg = self.config
        version = self.alias_version()
        return {
            "parse": {
                "globs": list(cfg.corpus_globs),
                "date_patterns": None if cfg.date_patterns is None else list(cfg.date_patterns),
            },
            "extract": {
                "honorifics": list(cfg.honorifics),
                "alias_version": version,
            },
            "decision": {"action": "resolve", "alias_version": version},
            "build": {
                "window_days": cfg.window_days,
                "exclude": list(cfg.exclude),
                "alias_version": version,
            },
            "filter": {"kind": cfg.filter.kind, "value": cfg.filter.value},
            "communities": {"seed": cfg.louvain_seed, "gamma": cfg.gamma},
            "layout": {
                "seed": cfg.layout_seed,
                "canvas": CANVAS,
                "label_char_px": LABEL_CHAR_PX,
                "label_height_px": LABEL_HEIGHT_PX,
                "label_passes": LABEL_PASSES,
                **{
                    k: getattr(cfg.layout, k)
                    for k in LayoutParams.__dataclass_fields__
                },
            },
            "export": {"formats": list(cfg.export_formats)},
        }

    def run(self, actor: str = "auto", ts: str | None = None) -> PipelineResult:
        """Execute all eight stages, appending one provenance record each.

        Unresolved mentions never block the run; they land in queue.json for
        later curation.
        """
        params = self._stage_params()
        records: list[ProvenanceRecord] = []

        def log(step: str, input_digest: str, output_digest: str) -> None:
            records.append(
                self.ledger.append(
                    step,
                    params[step],
                    input_digest,
                    output_digest,
                    actor=actor,
                    rationale="" if actor == "auto" else "pipeline run",
                    ts=ts,
                )
            )

        corpus, files_digest, parsed_digest = _exec_parse(self.root, params["parse"])
        log("parse", files_digest, parsed_digest)

        mentions, m_digest = _exec_extract(self.root, corpus, params["extract"])
        log("extract", parsed_digest, m_digest)

        table, resolved, r_digest = _exec_resolve(self.root, mentions, params["decision"])
        log("decision", m_digest, r_digest)
        self._write_queue(corpus, table, resolved)

        graph, g_digest = _exec_build(corpus, table, resolved, params["build"])
        log("build", r_digest, g_digest)
        # Lineage tag: chain-independent fingerprint of the build record, so a
        # re-run over unchanged inputs exports the same bytes even though the
        # record sits at a new chain position. content_digest() ignores it.
        graph = replace(graph, provenance_id=records[-1].fingerprint())

        filtered, retained, f_digest = _exec_filter(graph, params["filter"])
        log("filter", g_digest, f_digest)

        partition, p_digest = _exec_communities(filtered, params["communities"])
        log("communities", f_digest, p_digest)

        positions, converged, pos_digest = _exec_layout(filtered, params["layout"])
        log("layout", f_digest, pos_digest)

        export_input = digest_of(
            {"graph": f_digest, "partition": p_digest, "positions": pos_digest}
        )
        paths, e_digest = _exec_export(
            self.root / "exports", filtered, partition, positions, params["export"]
        )
        log("export", export_input, e_digest)

        return PipelineResult(
            corpus=corpus,
            table=table,
            mentions=mentions,
            resolved=resolved,
            graph_full=graph,
            graph_filtered=filtered,
            retained=retained,
            partition=partition,
            positions=positions,
            layout_converged=converged,
            records=records,
            export_paths=paths,
        )

    def _write_queue(
        self, corpus: Corpus, table: AliasTable, resolved: Sequence[ResolvedMention]
    ) -> None:
        queue = build_review_queue(resolved, ignored=table.ignored, corpus=corpus)
        payload = [
            {
                "form": item.form,
                "count": item.count,
                "status": item.status,
                "candidates": list(item.candidates),
                "snippets": [
                    {
                        "volume_id": s.volume_id,
                        "date": s.date,
                        "text": s.text,
                        "match_span": list(s.match_span),
                    }
                    for s in item.snippets
                ],
            }
            for item in queue
        ]
        (self.root / "queue.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    # -- curated decisions --------------------------------------------------

    def apply_decision(
        self, decision: Decision, actor: str, rationale: str, ts: str | None = None
    ) -> tuple[AliasTable, ProvenanceRecord]:
        """Append one curator decision to the alias log and the ledger.

        The decision is applied in memory first: an invalid decision (or a
        missing rationale) must fail before either log gains a record.  The
        provenance record digests the table before and after, so replay can
        verify the decision without re-running any extraction.
        """
        before = self.load_table()
        after = apply_decision_to_table(before, decision, actor, rationale)
        self.alias_log.append(decision, actor, rationale, ts=ts)
        record = self.ledger.append(
            "decision",
            {
                "action": "curate",
                "decision": decision_to_dict(decision),
                "alias_version": after.version,
            },
            table_digest(before),
            table_digest(after),
            actor=actor,
            rationale=rationale,
            ts=ts,
        )
        return after, record

    # -- replay ---------------------------------------------------------------

    def replay(self) -> int:
        """Re-execute every recorded step; return how many were verified.

        Artifacts are matched to consumers by digest, so interleaved curate
        decisions and repeated runs replay correctly.  The first divergence
        raises ReplayDivergenceError naming the sequence number.
        """
        records = self.ledger.read_records(verify=True)
        artifacts: dict[str, tuple[str, Any]] = {}

        def need(kind: str, digest: str, rec: ProvenanceRecord) -> Any:
            got = artifacts.get(digest)
            if got is None or got[0] != kind:
                raise ProjectError(
                    "replay",
                    f"record seq {rec.seq} ({rec.step}) consumes a {kind} artifact "
                    f"{digest[:12]}... that no earlier step produced",
                )
            return got[1]

        for rec in records:
            if rec.step == "parse":
                corpus, files_digest, out = _exec_parse(self.root, rec.params)
                if files_digest != rec.input_digest:
                    raise ProjectError(
                        "replay",
                        f"record seq {rec.seq} (parse): corpus files changed since "
                        f"the run was recorded",
                    )
                ensure_replay_digest(rec, out)
                artifacts[out] = ("corpus", corpus)
            elif rec.step == "extract":
                corpus = need("corpus", rec.input_digest, rec)
                mentions, out = _exec_extract(self.root, corpus, rec.params)
                ensure_replay_digest(rec, out)
                artifacts[out] = ("mentions", (corpus, mentions))
            elif rec.step == "decision" and rec.params.get("action") == "curate":
                version = rec.params["alias_version"]
                before = table_digest(self.load_table(version=version - 1))
                if before != rec.input_digest:
                    raise ProjectError(
                        "replay",
                        f"record seq {rec.seq} (decision): alias log history "
                        f"diverges before version {version}",
                    )
                ensure_replay_digest(rec, table_digest(self.load_table(version=version)))
            elif rec.step == "decision":
                corpus, mentions = need("mentions", rec.input_digest, rec)
                table, resolved, out = _exec_resolve(self.root, mentions, rec.params)
                ensure_replay_digest(rec, out)
                artifacts[out] = ("resolved", (corpus, table, resolved))
            elif rec.step == "build":
                corpus, table, resolved = need("resolved", rec.input_digest, rec)
                graph, out = _exec_build(corpus, table, resolved, rec.params)
                ensure_replay_digest(rec, out)
                graph = replace(graph, provenance_id=rec.fingerprint())
                artifacts[out] = ("graph", graph)
            elif rec.step == "filter":
                graph = need("graph", rec.input_digest, rec)
                filtered, _, out = _exec_filter(graph, rec.params)
                ensure_replay_digest(rec, out)
                artifacts[out] = ("graph", filtered)
            elif rec.step == "communities":
                graph = need("graph", rec.input_digest, rec)
                partition, out = _exec_communities(graph, rec.params)
                ensure_replay_digest(rec, out)
                artifacts[out] = ("partition", (graph, partition))
            elif rec.step == "layout":
                graph = need("graph", rec.input_digest, rec)
                positions, _, out = _exec_layout(graph, rec.params)
                ensure_replay_digest(rec, out)
                artifacts[out] = ("positions", (graph, positions))
            elif rec.step == "export":
                self._replay_export(rec, artifacts)
            else:  # pragma: no cover - verify() already rejects unknown steps
                raise ProjectError("replay", f"unknown step {rec.step!r}")
        return len(records)

    def _replay_export(
        self, rec: ProvenanceRecord, artifacts: dict[str, tuple[str, Any]]
    ) -> None:
        # The export input digest pins the (graph, partition, positions)
        # triple; find it by searching produced artifacts for the match.
        graph = partition = positions = None
        for f_digest, (kind, payload) in artifacts.items():
            if kind != "graph":
                continue
            for p_digest, (pkind, ppayload) in artifacts.items():
                if pkind != "partition" or ppayload[0] is not payload:
                    continue
                for pos_digest, (lkind, lpayload) in artifacts.items():
                    if lkind != "positions" or lpayload[0] is not payload:
                        continue
                    combined = digest_of(
                        {"graph": f_digest, "partition": p_digest, "positions": pos_digest}
                    )
                    if combined == rec.input_digest:
                        graph = payload
                        partition = ppayload[1]
                        positions = lpayload[1]
        if graph is None:
            raise ProjectError(
                "replay",
                f"record seq {rec.seq} (export) consumes artifacts no earlier "
                f"step produced",
            )
        with tempfile.TemporaryDirectory() as td:
            _, out = _exec_export(Path(td), graph, partition, positions, rec.params)
        ensure_replay_digest(rec, out)


# ---------------------------------------------------------------------------
# Staged execution (one pipeline stage at a time)
# ---------------------------------------------------------------------------

STAGE_SEQUENCE = (
    "parse", "extract", "decision", "build",
    "filter", "communities", "layout", "export",
)


def run_stage(
    project: Project,
    steps: Sequence[str],
    actor: str = "auto",
    ts: str | None = None,
) -> dict[str, Any]:
    """Execute the pipeline prefix ending at steps[-1], logging only `steps`.

    Earlier stages are recomputed and checked against their latest ledger
    record, so a stage invoked out of order (or after its inputs changed)
    aborts with the offending step's name instead of silently forking the
    lineage.  Returns the in-memory artifacts keyed by step name.
    """
    for step in steps:
        if step not in STAGE_SEQUENCE:
            raise ValueError(f"unknown step {step!r}")
    last = max(STAGE_SEQUENCE.index(s) for s in steps)
    params = project._stage_params()
    history = project.ledger.read_records(verify=True)

    def handle(step: str, input_digest: str, output_digest: str) -> ProvenanceRecord:
        if step in steps:
            return project.ledger.append(
                step, params[step], input_digest, output_digest,
                actor=actor,
                rationale="" if actor == "auto" else "pipeline stage",
                ts=ts,
            )
        rec = next(
            (
                r
                for r in reversed(history)
                if r.step == step
                and (step != "decision" or r.params.get("action") == "resolve")
            ),
            None,
        )
        if rec is None:
            raise ProjectError(step, f"no {step} step recorded yet; run it first")
        if rec.output_digest != output_digest:
            raise ProjectError(
                step,
                f"inputs of the recorded {step} step changed; re-run it "
                f"before continuing",
            )
        return rec

    out: dict[str, Any] = {}
    corpus, files_digest, parsed = _exec_parse(project.root, params["parse"])
    handle("parse", files_digest, parsed)
    out["corpus"] = corpus
    if last <= 0:
        return out

    mentions, m_digest = _exec_extract(project.root, corpus, params["extract"])
    handle("extract", parsed, m_digest)
    out["mentions"] = mentions
    if last <= 1:
        return out

    table, resolved, r_digest = _exec_resolve(project.root, mentions, params["decision"])
    handle("decision", m_digest, r_digest)
    out["table"], out["resolved"] = table, resolved
    if "decision" in steps:
        project._write_queue(corpus, table, resolved)
        out["queue"] = json.loads((project.root / "queue.json").read_text("utf-8"))
    if last <= 2:
        return out

    graph, g_digest = _exec_build(corpus, table, resolved, params["build"])
    build_rec = handle("build", r_digest, g_digest)
    # Lineage stamp follows the governing build record whether it was just
    # appended or verified, so staged exports match replay byte for byte.
    graph = replace(graph, provenance_id=build_rec.fingerprint())
    out["graph_full"] = graph
    if last <= 3:
        return out

    filtered, retained, f_digest = _exec_filter(graph, params["filter"])
    handle("filter", g_digest, f_digest)
    out["graph_filtered"], out["retained"] = filtered, retained
    if last <= 4:
        return out

    partition, p_digest = _exec_communities(filtered, params["communities"])
    handle("communities", f_digest, p_digest)
    out["partition"] = partition
    if last <= 5:
        return out

    positions, converged, pos_digest = _exec_layout(filtered, params["layout"])
    handle("layout", f_digest, pos_digest)
    out["positions"], out["layout_converged"] = positions, converged
    if last <= 6:
        return out

    export_input = digest_of(
        {"graph": f_digest, "partition": p_digest, "positions": pos_digest}
    )
    paths, e_digest = _exec_export(
        project.root / "exports", filtered, partition, positions, params["export"]
    )
    handle("export", export_input, e_digest)
    out["export_paths"] = paths
    return out


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def stats_report(project: Project) -> str:
    """Human-readable stats summary; also refreshes exports/histogram.csv.

    Tolerates an empty or never-run project by flagging statistics undefined.
    """
    root = project.root
    try:
        files = _glob_corpus_files(root, project.config.corpus_globs)
    except ProjectError:
        files = []
    corpus = (
        load_corpus(files, date_patterns=project.config.date_patterns)
        if files
        else Corpus(entries=(), warnings=())
    )
    table = project.load_table()
    gazetteer = compile_gazetteer(table, honorifics=project.config.honorifics)
    mentions: list[Mention] = []
    for entry in corpus.entries:
        mentions.extend(extract_mentions(entry, gazetteer))
    resolved = resolve_mentions(mentions, table)
    rows = assemble_resolved_corpus(
        resolved,
        exclude=project.config.exclude,
        all_dates=[e.date for e in corpus.entries],
    )
    stats = corpus_stats(rows)
    graph, _ = _exec_build(corpus, table, resolved, {
        "window_days": project.config.window_days,
        "exclude": list(project.config.exclude),
    })
    filtered, retained, _ = _exec_filter(graph, {
        "kind": project.config.filter.kind,
        "value": project.config.filter.value,
    })
    agreement = None
    if retained and graph.nodes:
        full_part, _ = _exec_communities(graph, {
            "seed": project.config.louvain_seed, "gamma": project.config.gamma,
        })
        filt_part, _ = _exec_communities(filtered, {
            "seed": project.config.louvain_seed, "gamma": project.config.gamma,
        })
        agreement = partition_agreement(
            full_part.assignment, filt_part.assignment, retained
        )

    exports = root / "exports"
    exports.mkdir(parents=True, exist_ok=True)
    write_histogram_csv(graph, exports / "histogram.csv")

    def fmt(x: float | None) -> str:
        return "undefined" if x is None else f"{x:.4f}"

    lines = [
        f"entries: {len(corpus.entries)}",
        f"defined: {stats.defined}",
        f"mean persons/day: {fmt(stats.mean_persons_per_day)}",
        f"sd persons/day: {fmt(stats.sd_persons_per_day)}",
        f"total persons: {stats.total_persons}",
        f"span days: {stats.span_days}",
        f"zero-mention days: {sum(1 for _, ids in rows if not ids)}",
        f"graph nodes: {len(graph.nodes)}",
        f"graph edges: {len(graph.edges)}",
        f"filtered nodes ({project.config.filter.kind}={project.config.filter.value}): {len(filtered.nodes)}",
        f"hidden persons: {len(graph.nodes) - len(filtered.nodes)}",
        f"partition agreement (filtered vs full): {fmt(agreement)}",
        f"alias version: {table.version}",
        f"review queue: {sum(1 for rm in resolved if rm.status != 'resolved')} unresolved mentions",
    ]
    report = "\n".join(lines) + "\n"
    (exports / "stats.txt").write_text(report, encoding="utf-8")
    return report
