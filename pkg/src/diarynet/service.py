"""Local HTTP API over a project directory, powering the curation UI.

SECURITY NOTE, READ THIS: the service binds 127.0.0.1 and has NO
authentication whatsoever.  It is a desk tool for a single curator on their
own machine.  Do not put it on a network interface; anyone who can reach the
port can rewrite your alias table.

Caching model: everything derived from the corpus and the alias table is
grouped into a base snapshot keyed by alias-table version.  Network views are
cached per (filter kind, filter value, alias version).  A posted decision
bumps the version, so the next read rebuilds from the new table; readers are
never locked, they just read through a version token (read-your-writes).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .communities import Partition, louvain, partition_agreement
from .corpus import Corpus
from .extraction import Mention
from .graph import (
    CoocGraph,
    CorpusStats,
    MinDays,
    TopN,
    assemble_resolved_corpus,
    corpus_stats,
    filter_graph,
    mention_frequency,
)
from .project import (
    Project,
    ProjectError,
    _exec_build,
    _exec_extract,
    _exec_layout,
    _exec_parse,
    _exec_resolve,
)
from .provenance import ChainIntegrityError
from .resolution import (
    AliasTable,
    ConflictError,
    NotFoundError,
    ResolvedMention,
    ReviewItem,
    ValidationError,
    build_review_queue,
    decision_from_dict,
)

__all__ = ["ProjectHandle", "ServiceError", "create_app"]


class ServiceError(Exception):
    """Request-level failure carrying the HTTP error body fields."""

    def __init__(self, status: int, code: str, message: str, detail: str = "") -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------


@dataclass
class _Base:
    """Everything derived from (corpus bytes, alias version).

    The corpus is assumed stable for the lifetime of the process; edits to
    the alias table flow through version keys.
    """

    alias_version: int
    corpus: Corpus
    table: AliasTable
    mentions: list[Mention]
    resolved: list[ResolvedMention]
    graph_full: CoocGraph
    queue: list[ReviewItem]
    stats: CorpusStats
    histogram: dict[int, int]
    full_partition: Partition | None = None  # lazy, memoized


@dataclass
class _NetworkView:
    graph: CoocGraph
    retained: set[str]
    partition: Partition
    agreement: float
    positions: dict[str, tuple[float, float]] | None = None  # lazy, memoized


class ProjectHandle:
    """Thread-safe read cache plus a single-writer gate over one Project."""

    def __init__(self, root: str | Path) -> None:
        self.project = Project(root)
        self._write_lock = threading.Lock()
        self._cache_lock = threading.Lock()
        self._base: _Base | None = None
        self._views: dict[tuple[str, int, int], _NetworkView] = {}

    # -- snapshot construction ------------------------------------------------

    def base(self) -> _Base:
        version = self.project.alias_version()
        with self._cache_lock:
            if self._base is not None and self._base.alias_version == version:
                return self._base
        built = self._build_base(version)
        with self._cache_lock:
            # Last writer wins; both candidates were built from the same
            # version so the result is identical either way.
            if self._base is None or self._base.alias_version != version:
                self._base = built
                self._views = {
                    k: v for k, v in self._views.items() if k[2] == version
                }
            return self._base

    def _build_base(self, version: int) -> _Base:
        project = self.project
        params = project._stage_params()
        if params["extract"]["alias_version"] != version:
            # Alias log grew between our version read and params; rebuild
            # against the newer version so the cache key stays honest.
            version = params["extract"]["alias_version"]
        corpus, _, _ = _exec_parse(project.root, params["parse"])
        mentions, _ = _exec_extract(project.root, corpus, params["extract"])
        table, resolved, _ = _exec_resolve(project.root, mentions, params["decision"])
        graph, _ = _exec_build(corpus, table, resolved, params["build"])
        queue = build_review_queue(resolved, ignored=table.ignored, corpus=corpus)
        rows = assemble_resolved_corpus(
            resolved,
            exclude=params["build"]["exclude"],
            all_dates=[e.date for e in corpus.entries],
        )
        return _Base(
            alias_version=version,
            corpus=corpus,
            table=table,
            mentions=mentions,
            resolved=resolved,
            graph_full=graph,
            queue=list(queue),
            stats=corpus_stats(rows),
            histogram=mention_frequency(graph),
        )

    def full_partition(self, base: _Base) -> Partition:
        with self._cache_lock:
            if base.full_partition is not None:
                return base.full_partition
        part = self._louvain(base.graph_full)
        with self._cache_lock:
            if base.full_partition is None:
                base.full_partition = part
            return base.full_partition

    def _louvain(self, graph: CoocGraph) -> Partition:
        if not graph.nodes:
            return Partition(assignment={}, levels=({},), modularity=(0.0,))
        cfg = self.project.config
        return louvain(graph, seed=cfg.louvain_seed, gamma=cfg.gamma)

    def network_view(self, criterion: MinDays | TopN) -> _NetworkView:
        base = self.base()
        kind, value = (
            ("min_days", criterion.k)
            if isinstance(criterion, MinDays)
            else ("top_n", criterion.n)
        )
        key = (kind, value, base.alias_version)
        with self._cache_lock:
            cached = self._views.get(key)
        if cached is not None:
            return cached
        filtered, retained = filter_graph(base.graph_full, criterion)
        partition = self._louvain(filtered)
        # vacuous agreement for an empty view; the scorer rejects empty subsets
        agreement = (
            partition_agreement(
                partition.assignment, self.full_partition(base).assignment, retained
            )
            if retained
            else 1.0
        )
        view = _NetworkView(
            graph=filtered, retained=retained, partition=partition,
            agreement=agreement,
        )
        with self._cache_lock:
            return self._views.setdefault(key, view)

    def positions_for(self, view: _NetworkView) -> dict[str, tuple[float, float]]:
        with self._cache_lock:
            if view.positions is not None:
                return view.positions
        layout_params = self.project._stage_params()["layout"]
        positions, _, _ = _exec_layout(view.graph, layout_params)
        with self._cache_lock:
            if view.positions is None:
                view.positions = positions
            return view.positions

    # -- writes ---------------------------------------------------------------

    def post_decision(self, decision_dict: Mapping, actor: str, rationale: str) -> dict:
        decision = decision_from_dict(decision_dict)
        with self._write_lock:
            table, record = self.project.apply_decision(decision, actor, rationale)
        return {"alias_version": table.version, "provenance_seq": record.seq}

    # -- envelope ---------------------------------------------------------

    def head_info(self) -> tuple[str | None, int]:
        records = self.project.ledger.read_records()
        return (records[-1].digest if records else None), len(records)

    def envelope(self, payload: dict) -> dict:
        head_digest, _ = self.head_info()
        out = {
            "alias_version": self.project.alias_version(),
            "provenance_head": head_digest,
        }
        out.update(payload)
        return out


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def _queue_item_json(item: ReviewItem) -> dict:
    return {
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


def _network_json(
    handle: ProjectHandle,
    view: _NetworkView,
    criterion: MinDays | TopN,
    with_communities: bool,
    with_layout: bool,
) -> dict:
    base = handle.base()
    positions = handle.positions_for(view) if with_layout else None
    nodes = []
    for nid in sorted(view.graph.nodes):
        info = view.graph.nodes[nid]
        node: dict[str, Any] = {
            "id": nid,
            "display_name": info.display_name,
            "days_mentioned": info.days_mentioned,
            "total_mentions": info.total_mentions,
        }
        if with_communities:
            node["community"] = view.partition.assignment[nid]
        if positions is not None:
            node["x"], node["y"] = positions[nid]
        nodes.append(node)
    edges = [
        {"source": u, "target": v, "weight": w}
        for (u, v), w in sorted(view.graph.edges.items())
    ]
    _, head_seq = handle.head_info()
    return {
        "filter": (
            {"kind": "min_days", "value": criterion.k}
            if isinstance(criterion, MinDays)
            else {"kind": "top_n", "value": criterion.n}
        ),
        "nodes": nodes,
        "edges": edges,
        "full_nodes": len(base.graph_full.nodes),
        "hidden_persons": len(base.graph_full.nodes) - len(nodes),
        "agreement": view.agreement,
        "provenance_seq": head_seq,
    }


def _parse_criterion(
    handle: ProjectHandle, min_days: int | None, top_n: int | None
) -> MinDays | TopN:
    if min_days is not None and top_n is not None:
        raise ServiceError(
            422, "validation", "pass min_days or top_n, not both"
        )
    if min_days is not None:
        if min_days < 1:
            raise ServiceError(422, "validation", "min_days must be >= 1")
        return MinDays(min_days)
    if top_n is not None:
        if top_n < 0:
            raise ServiceError(422, "validation", "top_n must be >= 0")
        return TopN(top_n)
    spec = handle.project.config.filter
    return MinDays(spec.value) if spec.kind == "min_days" else TopN(spec.value)


def _contexts_for(base: _Base, entity_id: str) -> list[dict]:
    """Every mention of any alias of the entity, snippet of +-120 chars."""
    from .resolution import SNIPPET_RADIUS

    entry_text: dict[tuple[str, Any], str] = {}
    for e in base.corpus.entries:
        entry_text.setdefault((e.volume_id, e.date), e.text)
    out = []
    for rm in base.resolved:
        if rm.status != "resolved" or rm.entity_id != entity_id:
            continue
        m = rm.mention
        text = entry_text.get((m.volume_id, m.date))
        if text is None:
            continue
        start, end = m.char_span
        lo = max(0, start - SNIPPET_RADIUS)
        hi = min(len(text), end + SNIPPET_RADIUS)
        out.append(
            {
                "date": m.date.isoformat(),
                "volume": m.volume_id,
                "surface": m.surface,
                "snippet": text[lo:hi],
                "match_span": [start - lo, end - lo],
                # full entry so a client can expand from snippet to source
                "entry": text,
                "entry_span": [start, end],
            }
        )
    # newest first; offsets keep same-day mentions in document order
    out.sort(key=lambda c: c["date"], reverse=True)
    return out


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------


def _default_static_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(root: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    handle = ProjectHandle(root)
    app = FastAPI(title="diarynet", docs_url=None, redoc_url=None)

    def fail(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
        return JSONResponse(
            status_code=status,
            content={"code": code, "message": message, "detail": detail},
        )

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return fail(exc.status, exc.code, exc.message, exc.detail)

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return fail(422, "validation", str(exc))

    @app.exception_handler(NotFoundError)
    async def _not_found_error(request: Request, exc: NotFoundError):
        return fail(404, "not_found", str(exc))

    @app.exception_handler(ConflictError)
    async def _conflict_error(request: Request, exc: ConflictError):
        return fail(409, "conflict", str(exc))

    @app.exception_handler(ChainIntegrityError)
    async def _integrity_error(request: Request, exc: ChainIntegrityError):
        return fail(500, "integrity", str(exc))

    @app.exception_handler(ProjectError)
    async def _project_error(request: Request, exc: ProjectError):
        return fail(500, f"stage:{exc.stage}", str(exc))

    @app.get("/api/queue")
    def get_queue(offset: int = 0, limit: int | None = None):
        if offset < 0 or (limit is not None and limit < 0):
            raise ServiceError(422, "validation", "offset/limit must be >= 0")
        queue = handle.base().queue
        page = queue[offset:] if limit is None else queue[offset : offset + limit]
        return handle.envelope(
            {
                "total": len(queue),
                "offset": offset,
                "limit": limit,
                "items": [_queue_item_json(i) for i in page],
            }
        )

    @app.post("/api/decisions")
    async def post_decision(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ServiceError(422, "validation", "body must be a JSON object")
        decision = body.get("decision")
        actor = body.get("actor", "")
        rationale = body.get("rationale", "")
        if not isinstance(decision, dict):
            raise ServiceError(422, "validation", "missing decision object")
        if not isinstance(actor, str) or not actor.strip():
            raise ServiceError(422, "validation", "actor must be a non-empty string")
        if not isinstance(rationale, str):
            raise ServiceError(422, "validation", "rationale must be a string")
        result = handle.post_decision(decision, actor, rationale)
        return handle.envelope(result)

    @app.get("/api/network")
    def get_network(
        min_days: int | None = None,
        top_n: int | None = None,
        with_layout: bool = False,
        with_communities: bool = False,
    ):
        criterion = _parse_criterion(handle, min_days, top_n)
        view = handle.network_view(criterion)
        return handle.envelope(
            _network_json(handle, view, criterion, with_communities, with_layout)
        )

    @app.get("/api/persons/{entity_id}/contexts")
    def get_contexts(entity_id: str, limit: int | None = None):
        if limit is not None and limit < 0:
            raise ServiceError(422, "validation", "limit must be >= 0")
        base = handle.base()
        if entity_id not in base.table.entities:
            survivor = base.table.retired.get(entity_id)
            if survivor:
                raise ServiceError(
                    404,
                    "retired",
                    f"entity {entity_id!r} was merged away",
                    detail=f"surviving entity: {survivor}",
                )
            raise ServiceError(404, "not_found", f"no entity {entity_id!r}")
        contexts = _contexts_for(base, entity_id)
        page = contexts if limit is None else contexts[:limit]
        return handle.envelope(
            {
                "entity_id": entity_id,
                "display_name": base.table.entities[entity_id].display_name,
                "total": len(contexts),
                "items": page,
            }
        )

    @app.get("/api/provenance")
    def get_provenance(offset: int = 0, limit: int | None = None):
        if offset < 0 or (limit is not None and limit < 0):
            raise ServiceError(422, "validation", "offset/limit must be >= 0")
        records = handle.project.ledger.read_records()
        page = records[offset:] if limit is None else records[offset : offset + limit]
        return handle.envelope(
            {
                "total": len(records),
                "records": [
                    {
                        "seq": r.seq,
                        "step": r.step,
                        "params": r.params,
                        "input_digest": r.input_digest,
                        "output_digest": r.output_digest,
                        "actor": r.actor,
                        "rationale": r.rationale,
                        "prev": r.prev,
                        "digest": r.digest,
                        "ts": r.ts,
                    }
                    for r in page
                ],
            }
        )

    @app.get("/api/stats")
    def get_stats():
        base = handle.base()
        spec = handle.project.config.filter
        view = handle.network_view(
            MinDays(spec.value) if spec.kind == "min_days" else TopN(spec.value)
        )
        s = base.stats
        return handle.envelope(
            {
                "defined": s.defined,
                "entries": len(base.corpus.entries),
                "span_days": s.span_days,
                "mean_persons_per_day": s.mean_persons_per_day,
                "sd_persons_per_day": s.sd_persons_per_day,
                "total_persons": s.total_persons,
                "full_nodes": len(base.graph_full.nodes),
                "full_edges": len(base.graph_full.edges),
                "filtered_nodes": len(view.graph.nodes),
                "filtered_edges": len(view.graph.edges),
                "hidden_persons": len(base.graph_full.nodes) - len(view.graph.nodes),
                "default_filter": {"kind": spec.kind, "value": spec.value},
                "queue_size": len(base.queue),
                "corpus_warnings": list(base.corpus.warnings),
            }
        )

    @app.get("/api/histogram")
    def get_histogram():
        base = handle.base()
        return handle.envelope(
            {
                "bins": [
                    {"days_mentioned": d, "persons": n}
                    for d, n in sorted(base.histogram.items())
                ]
            }
        )

    static = Path(static_dir) if static_dir is not None else _default_static_dir()
    if static is not None and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return (
                "<!doctype html><title>diarynet</title>"
                "<h1>diarynet API</h1>"
                "<p>The curation UI is not built. Endpoints live under "
                "<code>/api/</code>.</p>"
            )

    return app
