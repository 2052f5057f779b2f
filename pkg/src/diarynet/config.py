"""Project configuration.

One human-editable YAML file (`project.yaml`) at the project root drives the
whole pipeline; CLI flags override individual values.  The parsed config is
a frozen dataclass, and `config_params` renders any section as a plain JSON
dict so provenance records can snapshot exactly what ran.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .extraction import DEFAULT_HONORIFICS
from .layout import LayoutParams

__all__ = [
    "ConfigError",
    "FilterSpec",
    "ProjectConfig",
    "load_config",
    "save_config",
    "config_params",
]


class ConfigError(ValueError):
    """project.yaml is missing, malformed, or carries unknown keys."""


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "min_days"  # "min_days" | "top_n"
    value: int = 2

    def __post_init__(self) -> None:
        if self.kind not in ("min_days", "top_n"):
            raise ConfigError(f"unknown filter kind {self.kind!r}")
        if not isinstance(self.value, int) or self.value < 0:
            raise ConfigError(f"filter value must be a non-negative int, got {self.value!r}")


@dataclass(frozen=True)
class ProjectConfig:
    corpus_globs: tuple[str, ...] = ("corpus/*.txt",)
    date_patterns: tuple[str, ...] | None = None  # None = built-in grammar
    honorifics: tuple[str, ...] = DEFAULT_HONORIFICS
    exclude: tuple[str, ...] = ()  # ego entity ids dropped before graph build
    window_days: int = 0
    filter: FilterSpec = field(default_factory=FilterSpec)
    louvain_seed: int = 0
    gamma: float = 1.0
    layout_seed: int = 0
    layout: LayoutParams = field(default_factory=LayoutParams)
    export_formats: tuple[str, ...] = ("gexf", "csv")


_LAYOUT_KEYS = {f.name for f in fields(LayoutParams)}


def _expect_mapping(value: Any, where: str) -> Mapping:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"{where} must be a mapping")
    return value


def _str_tuple(value: Any, where: str) -> tuple[str, ...]:
    if not isinstance(value, (list, tuple)) or not all(isinstance(s, str) for s in value):
        raise ConfigError(f"{where} must be a list of strings")
    return tuple(value)


def _check_keys(section: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def load_config(path: str | Path) -> ProjectConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    _check_keys(raw, {"corpus", "network", "communities", "layout", "exports"}, str(path))

    corpus = _expect_mapping(raw.get("corpus"), "corpus")
    _check_keys(corpus, {"globs", "date_patterns", "honorifics"}, "corpus")
    network = _expect_mapping(raw.get("network"), "network")
    _check_keys(network, {"exclude", "window_days", "filter"}, "network")
    communities = _expect_mapping(raw.get("communities"), "communities")
    _check_keys(communities, {"seed", "gamma"}, "communities")
    layout = _expect_mapping(raw.get("layout"), "layout")
    _check_keys(layout, _LAYOUT_KEYS | {"seed"}, "layout")
    exports = _expect_mapping(raw.get("exports"), "exports")
    _check_keys(exports, {"formats"}, "exports")

    globs = corpus.get("globs", ["corpus/*.txt"])
    patterns = corpus.get("date_patterns")
    honorifics = corpus.get("honorifics")
    filt = network.get("filter", {})
    if filt and not isinstance(filt, Mapping):
        raise ConfigError("network.filter must be a mapping {kind, value}")
    _check_keys(filt, {"kind", "value"}, "network.filter")

    layout_kwargs = {k: v for k, v in layout.items() if k != "seed"}
    try:
        layout_params = LayoutParams(**layout_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"layout: {exc}") from exc

    try:
        return ProjectConfig(
            corpus_globs=_str_tuple(globs, "corpus.globs"),
            date_patterns=None if patterns is None else _str_tuple(patterns, "corpus.date_patterns"),
            honorifics=DEFAULT_HONORIFICS if honorifics is None else _str_tuple(honorifics, "corpus.honorifics"),
            exclude=_str_tuple(network.get("exclude", []), "network.exclude"),
            window_days=int(network.get("window_days", 0)),
            filter=FilterSpec(
                kind=filt.get("kind", "min_days"), value=filt.get("value", 2)
            ),
            louvain_seed=int(communities.get("seed", 0)),
            gamma=float(communities.get("gamma", 1.0)),
            layout_seed=int(layout.get("seed", 0)),
            layout=layout_params,
            export_formats=_str_tuple(exports.get("formats", ["gexf", "csv"]), "exports.formats"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def save_config(cfg: ProjectConfig, path: str | Path) -> None:
    """Write the config back as deterministic YAML."""
    doc = {
        "corpus": {
            "globs": list(cfg.corpus_globs),
            "date_patterns": None if cfg.date_patterns is None else list(cfg.date_patterns),
            "honorifics": list(cfg.honorifics),
        },
        "network": {
            "exclude": list(cfg.exclude),
            "window_days": cfg.window_days,
            "filter": {"kind": cfg.filter.kind, "value": cfg.filter.value},
        },
        "communities": {"seed": cfg.louvain_seed, "gamma": cfg.gamma},
        "layout": {
            "seed": cfg.layout_seed,
            "k_r": cfg.layout.k_r,
            "k_g": cfg.layout.k_g,
            "edge_weight_influence": cfg.layout.edge_weight_influence,
            "tolerance": cfg.layout.tolerance,
            "linlog": cfg.layout.linlog,
            "strong_gravity": cfg.layout.strong_gravity,
            "max_iterations": cfg.layout.max_iterations,
            "convergence_threshold": cfg.layout.convergence_threshold,
            "barnes_hut_nodes": cfg.layout.barnes_hut_nodes,
            "barnes_hut_theta": cfg.layout.barnes_hut_theta,
        },
        "exports": {"formats": list(cfg.export_formats)},
    }
    Path(path).write_text(
        yaml.safe_dump(doc, sort_keys=True, default_flow_style=False),
        encoding="utf-8",
    )


def config_params(cfg: ProjectConfig) -> dict:
    """The whole config as a JSON-clean dict (provenance snapshot)."""
    return {
        "corpus_globs": list(cfg.corpus_globs),
        "date_patterns": None if cfg.date_patterns is None else list(cfg.date_patterns),
        "honorifics": list(cfg.honorifics),
        "exclude": list(cfg.exclude),
        "window_days": cfg.window_days,
        "filter": {"kind": cfg.filter.kind, "value": cfg.filter.value},
        "louvain_seed": cfg.louvain_seed,
        "gamma": cfg.gamma,
        "layout_seed": cfg.layout_seed,
        "layout": {
            "k_r": cfg.layout.k_r,
            "k_g": cfg.layout.k_g,
            "edge_weight_influence": cfg.layout.edge_weight_influence,
            "tolerance": cfg.layout.tolerance,
            "linlog": cfg.layout.linlog,
            "strong_gravity": cfg.layout.strong_gravity,
            "max_iterations": cfg.layout.max_iterations,
            "convergence_threshold": cfg.layout.convergence_threshold,
            "barnes_hut_nodes": cfg.layout.barnes_hut_nodes,
            "barnes_hut_theta": cfg.layout.barnes_hut_theta,
        },
        "export_formats": list(cfg.export_formats),
    }
