"""Command-line driver.

Every pipeline stage is individually invocable so each transformation can be
inspected on its own; stages check that their recorded prerequisites still
match the project's files before appending anything.  `run` executes all
eight stages in one go.

Exit codes (stable, scriptable):

    0   success
    2   configuration error
    10  parse failed          14  filter failed
    11  extract failed        15  communities failed
    12  resolve failed        16  layout failed
    13  build failed          17  export failed
    20  replay divergence (recorded digest no longer reproducible)
    21  ledger integrity failure (corruption, tampering, stale writer)
    1   anything else
"""

from __future__ import annotations

import sys
from dataclasses import replace
from datetime import date as Date
from pathlib import Path

import click

from .config import FilterSpec
from .project import (
    Project,
    ProjectError,
    run_stage,
    stats_report,
)
from .provenance import ChainIntegrityError, ReplayDivergenceError
from .synth import FixtureSpec, write_fixture

EXIT_DIVERGENCE = 20
EXIT_INTEGRITY = 21
STAGE_EXIT = {
    "config": 2,
    "parse": 10,
    "extract": 11,
    "decision": 12,
    "build": 13,
    "filter": 14,
    "communities": 15,
    "layout": 16,
    "export": 17,
    # replay-stage failures (changed corpus, broken lineage) are divergences
    "replay": EXIT_DIVERGENCE,
}


def _die(exc: BaseException) -> "click.exceptions.Exit":
    if isinstance(exc, ReplayDivergenceError):
        code = EXIT_DIVERGENCE
    elif isinstance(exc, ChainIntegrityError):
        code = EXIT_INTEGRITY
    elif isinstance(exc, ProjectError):
        code = STAGE_EXIT.get(exc.stage, 1)
    else:
        code = 1
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _project(ctx: click.Context) -> Project:
    try:
        return Project(ctx.obj)
    except Exception as exc:
        _die(exc)


@click.group()
@click.option(
    "--project",
    "-p",
    "project_dir",
    envvar="DIARYNET_PROJECT",
    default=".",
    type=click.Path(file_okay=False, path_type=Path),
    help="Project directory (env: DIARYNET_PROJECT).",
)
@click.pass_context
def main(ctx: click.Context, project_dir: Path) -> None:
    """Diary transcriptions in, curated person networks out."""
    ctx.obj = project_dir


def _stage(ctx: click.Context, steps: list[str]) -> dict:
    project = _project(ctx)
    try:
        return run_stage(project, steps)
    except Exception as exc:
        _die(exc)


@main.command()
@click.pass_context
def ingest(ctx: click.Context) -> None:
    """Parse the corpus into dated entries (stage 1)."""
    out = _stage(ctx, ["parse"])
    corpus = out["corpus"]
    click.echo(f"entries: {len(corpus.entries)}")
    click.echo(f"volumes: {len(corpus.volume_ids)}")
    for w in corpus.warnings:
        click.echo(f"warning: {w}", err=True)


@main.command()
@click.pass_context
def extract(ctx: click.Context) -> None:
    """Find person mentions via the alias gazetteer (stage 2)."""
    out = _stage(ctx, ["extract"])
    mentions = out["mentions"]
    forms = {m.normalized for m in mentions}
    click.echo(f"mentions: {len(mentions)}")
    click.echo(f"distinct forms: {len(forms)}")


@main.command()
@click.pass_context
def resolve(ctx: click.Context) -> None:
    """Resolve mentions against the alias table; refresh queue.json (stage 3)."""
    out = _stage(ctx, ["decision"])
    byst: dict[str, int] = {}
    for rm in out["resolved"]:
        byst[rm.status] = byst.get(rm.status, 0) + 1
    for status in ("resolved", "ambiguous", "unknown"):
        click.echo(f"{status}: {byst.get(status, 0)}")
    click.echo(f"queue items: {len(out['queue'])}")


@main.command()
@click.option("--window-days", type=int, default=None, help="Override co-occurrence window.")
@click.option("--min-days", type=int, default=None, help="Override filter: keep nodes on >= K days.")
@click.option("--top-n", type=int, default=None, help="Override filter: keep the N busiest nodes.")
@click.pass_context
def build(
    ctx: click.Context,
    window_days: int | None,
    min_days: int | None,
    top_n: int | None,
) -> None:
    """Build the co-occurrence graph and apply the filter (stages 4-5)."""
    if min_days is not None and top_n is not None:
        click.echo("error: pass --min-days or --top-n, not both", err=True)
        sys.exit(2)
    project = _project(ctx)
    cfg = project.config
    if window_days is not None:
        cfg = replace(cfg, window_days=window_days)
    if min_days is not None:
        cfg = replace(cfg, filter=FilterSpec("min_days", min_days))
    if top_n is not None:
        cfg = replace(cfg, filter=FilterSpec("top_n", top_n))
    project.config = cfg
    try:
        out = run_stage(project, ["build", "filter"])
    except Exception as exc:
        _die(exc)
    full, kept = out["graph_full"], out["graph_filtered"]
    click.echo(f"full graph: {len(full.nodes)} nodes, {len(full.edges)} edges")
    click.echo(f"filtered ({cfg.filter.kind}={cfg.filter.value}): "
               f"{len(kept.nodes)} nodes, {len(kept.edges)} edges")
    click.echo(f"hidden persons: {len(full.nodes) - len(kept.nodes)}")


@main.command()
@click.option("--seed", type=int, default=None, help="Override Louvain seed.")
@click.option("--gamma", type=float, default=None, help="Override resolution parameter.")
@click.pass_context
def communities(ctx: click.Context, seed: int | None, gamma: float | None) -> None:
    """Detect communities on the filtered graph (stage 6)."""
    project = _project(ctx)
    cfg = project.config
    if seed is not None:
        cfg = replace(cfg, louvain_seed=seed)
    if gamma is not None:
        cfg = replace(cfg, gamma=gamma)
    project.config = cfg
    try:
        out = run_stage(project, ["communities"])
    except Exception as exc:
        _die(exc)
    partition = out["partition"]
    labels = set(partition.assignment.values())
    click.echo(f"communities: {len(labels)}")
    click.echo(f"modularity: {partition.modularity[-1]:.6f}")


@main.command()
@click.option("--seed", type=int, default=None, help="Override layout seed.")
@click.pass_context
def layout(ctx: click.Context, seed: int | None) -> None:
    """Compute ForceAtlas2 positions and remove label overlaps (stage 7)."""
    project = _project(ctx)
    if seed is not None:
        project.config = replace(project.config, layout_seed=seed)
    try:
        out = run_stage(project, ["layout"])
    except Exception as exc:
        _die(exc)
    click.echo(f"positioned nodes: {len(out['positions'])}")
    click.echo(f"converged: {out['layout_converged']}")


@main.command()
@click.option(
    "--formats",
    default=None,
    help="Comma-separated export formats (gexf,csv); overrides config.",
)
@click.pass_context
def export(ctx: click.Context, formats: str | None) -> None:
    """Write GEXF/CSV exports under <project>/exports (stage 8)."""
    project = _project(ctx)
    if formats is not None:
        wanted = tuple(f.strip() for f in formats.split(",") if f.strip())
        project.config = replace(project.config, export_formats=wanted)
    try:
        out = run_stage(project, ["export"])
    except Exception as exc:
        _die(exc)
    for path in out["export_paths"]:
        click.echo(str(path))


@main.command()
@click.option("--actor", default="auto", help="Actor recorded in provenance.")
@click.pass_context
def run(ctx: click.Context, actor: str) -> None:
    """Execute every stage in order, appending provenance for each."""
    project = _project(ctx)
    try:
        result = project.run(actor=actor)
    except Exception as exc:
        _die(exc)
    for rec in result.records:
        click.echo(f"[{rec.seq}] {rec.step}: {rec.output_digest[:12]}")
    click.echo(f"queue items: {sum(1 for r in result.resolved if r.status != 'resolved')}")
    for path in result.export_paths:
        click.echo(str(path))


@main.command()
@click.pass_context
def stats(ctx: click.Context) -> None:
    """Print the corpus/network statistics report."""
    project = _project(ctx)
    try:
        click.echo(stats_report(project), nl=False)
    except Exception as exc:
        _die(exc)


@main.command()
@click.pass_context
def replay(ctx: click.Context) -> None:
    """Re-execute every recorded step and verify all digests match."""
    project = _project(ctx)
    try:
        n = project.replay()
    except Exception as exc:
        _die(exc)
    click.echo(f"replayed {n} records; every digest matches")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8147, show_default=True, type=int)
@click.option(
    "--static",
    "static_dir",
    default=None,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory of built UI assets to serve at /.",
)
@click.pass_context
def serve(ctx: click.Context, host: str, port: int, static_dir: Path | None) -> None:
    """Serve the curation API and UI. No auth: keep it on localhost."""
    import uvicorn

    from .service import create_app

    if host not in ("127.0.0.1", "localhost", "::1"):
        click.echo(
            "WARNING: the service has no authentication; binding a non-loopback "
            "address exposes your alias table to the network.",
            err=True,
        )
    try:
        app = create_app(ctx.obj, static_dir=static_dir)
    except Exception as exc:
        _die(exc)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("fixture-gen")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--days", default=FixtureSpec.days, show_default=True, type=int)
@click.option("--persons", default=FixtureSpec.persons, show_default=True, type=int)
@click.option("--mean", default=FixtureSpec.mean_per_day, show_default=True, type=float)
@click.option("--sd", default=FixtureSpec.sd_per_day, show_default=True, type=float)
@click.option("--seed", default=FixtureSpec.seed, show_default=True, type=int)
@click.option("--start", default="1891-01-01", show_default=True)
def fixture_gen(
    out: Path, days: int, persons: int, mean: float, sd: float, seed: int, start: str
) -> None:
    """Generate a synthetic diary project with known statistics."""
    try:
        spec = FixtureSpec(
            days=days,
            persons=persons,
            mean_per_day=mean,
            sd_per_day=sd,
            seed=seed,
            start=Date.fromisoformat(start),
        )
        summary = write_fixture(out, spec)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for key, value in summary.items():
        click.echo(f"{key}: {value}")


if __name__ == "__main__":
    main()
