"""Run configuration: JSON parsing, validation and the output-directory rules."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .dataframe import MISSING_POLICIES
from .dea import DeaModelSpec
from .errors import ConfigError, FrontierBenchError
from .regress import RegressionSpec
from .report import RenderSettings
from .selection import DEFAULT_THRESHOLD
from .diagnostics import VIF_THRESHOLD

OUT_ENV = "FRONTIER_BENCH_OUT"

TOP_KEYS = {
    "data", "catalog", "monthly_counts", "year", "missing_policy", "productivity",
    "descriptive", "correlation", "pca", "dea", "regressions", "selection",
    "comparison", "output_dir", "render",
}
SELECTION_KEYS = {"threshold", "vif_threshold", "dummy_sets", "airspace", "demand", "staged"}


@dataclass(frozen=True)
class RegressionJob:
    label: str
    spec: RegressionSpec
    reduce: bool = False


@dataclass(frozen=True)
class StagedJob:
    label: str
    spec: RegressionSpec


@dataclass(frozen=True)
class Productivity:
    name: str
    output: str
    input: str


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration. Relative paths resolve against the config file's folder."""

    path: Path
    digest: str
    data: Path
    catalog: Path | None = None
    monthly_counts: Path | None = None
    year: int | None = None
    missing_policy: str = "drop_row"
    productivity: Productivity | None = None
    descriptive: tuple | None = None
    correlation: tuple | None = None
    pca_variables: tuple | None = None
    pca_retain: int | float = 1.0
    dea: tuple = ()
    regressions: tuple = ()
    threshold: float = DEFAULT_THRESHOLD
    vif_threshold: float = VIF_THRESHOLD
    dummy_sets: Mapping = field(default_factory=dict)
    airspace: tuple = ()
    demand: tuple = ()
    staged: tuple = ()
    comparison: tuple | None = None
    output_dir: Path | None = None
    render: RenderSettings = RenderSettings()

    def files(self) -> list[Path]:
        return [p for p in (self.data, self.catalog, self.monthly_counts) if p is not None]

    def missing_files(self) -> list[Path]:
        return [p for p in self.files() if not p.is_file()]

    def resolve_output(self, cli_out=None) -> Path:
        """``--out`` beats the environment variable, which beats ``output_dir``."""
        if cli_out:
            return Path(cli_out)
        if os.environ.get(OUT_ENV):
            return Path(os.environ[OUT_ENV])
        if self.output_dir is not None:
            return self.output_dir
        return self.path.parent / "frontier_bench_out"


def _names(value, key) -> tuple:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{key!r} must be a list of variable names")
    return tuple(value)


def _obj(value, key) -> Mapping:
    if not isinstance(value, dict):
        raise ConfigError(f"{key!r} must be a JSON object")
    return value


def parse_config(raw: Mapping[str, Any], path: Path, digest: str = "") -> RunConfig:
    """Validate a decoded config document. Does not touch the file system."""
    raw = _obj(raw, "config")
    unknown = sorted(set(raw) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "data" not in raw:
        raise ConfigError("config needs a 'data' path")
    base = path.parent

    def rel(key):
        v = raw.get(key)
        if v is None:
            return None
        if not isinstance(v, str):
            raise ConfigError(f"{key!r} must be a path string")
        return (base / v).resolve()

    kw: dict[str, Any] = {"path": path, "digest": digest, "data": rel("data"),
                          "catalog": rel("catalog"), "monthly_counts": rel("monthly_counts"),
                          "output_dir": rel("output_dir")}
    if raw.get("year") is not None:
        if not isinstance(raw["year"], int):
            raise ConfigError("'year' must be an integer")
        kw["year"] = raw["year"]
    policy = raw.get("missing_policy", "drop_row")
    if policy not in MISSING_POLICIES:
        raise ConfigError(f"missing_policy must be one of {', '.join(MISSING_POLICIES)}")
    kw["missing_policy"] = policy

    try:
        if "productivity" in raw:
            p = _obj(raw["productivity"], "productivity")
            kw["productivity"] = Productivity(str(p["name"]), str(p["output"]), str(p["input"]))
        for key in ("descriptive", "correlation"):
            if key in raw:
                kw[key] = _names(raw[key], key)
        if "pca" in raw:
            p = _obj(raw["pca"], "pca")
            kw["pca_variables"] = _names(p["variables"], "pca.variables")
            retain = p.get("retain", 1.0)
            if isinstance(retain, bool) or not isinstance(retain, (int, float)):
                raise ConfigError("'pca.retain' must be a component count or a variance share")
            kw["pca_retain"] = retain
        if not isinstance(raw.get("dea", []), list):
            raise ConfigError("'dea' must be a list of model objects")
        kw["dea"] = tuple(DeaModelSpec.from_dict(_obj(m, "dea[]")) for m in raw.get("dea", []))
        names = [m.name for m in kw["dea"]]
        if len(set(names)) != len(names):
            raise ConfigError("DEA model names must be unique")

        jobs = []
        for i, r in enumerate(raw.get("regressions", [])):
            r = _obj(r, "regressions[]")
            label = str(r.get("label", f"R{i + 1}"))
            body = {k: v for k, v in r.items() if k not in ("label", "reduce")}
            jobs.append(RegressionJob(label, RegressionSpec.from_dict(body), bool(r.get("reduce", False))))
        labels = [j.label for j in jobs]
        if len(set(labels)) != len(labels):
            raise ConfigError("regression labels must be unique")
        kw["regressions"] = tuple(jobs)

        sel = _obj(raw.get("selection", {}), "selection")
        bad = sorted(set(sel) - SELECTION_KEYS)
        if bad:
            raise ConfigError(f"unknown selection key(s): {', '.join(bad)}")
        kw["threshold"] = float(sel.get("threshold", DEFAULT_THRESHOLD))
        if not 0 < kw["threshold"] < 1:
            raise ConfigError("selection.threshold must lie in (0, 1)")
        kw["vif_threshold"] = float(sel.get("vif_threshold", VIF_THRESHOLD))
        groups = _obj(sel.get("dummy_sets", {}), "selection.dummy_sets")
        kw["dummy_sets"] = {str(k): _names(v, f"dummy_sets.{k}") for k, v in groups.items()}
        kw["airspace"] = _names(sel.get("airspace", []), "selection.airspace")
        kw["demand"] = _names(sel.get("demand", []), "selection.demand")
        staged = []
        for i, s in enumerate(sel.get("staged", [])):
            s = _obj(s, "selection.staged[]")
            body = {k: v for k, v in s.items() if k != "label"}
            staged.append(StagedJob(str(s.get("label", f"S{i + 1}")), RegressionSpec.from_dict(body)))
        kw["staged"] = tuple(staged)

        if "comparison" in raw:
            comp = _names(raw["comparison"], "comparison")
            missing = [c for c in comp if c not in labels]
            if missing:
                raise ConfigError(f"comparison cites unknown regression label(s): {', '.join(missing)}")
            if len(comp) < 2:
                raise ConfigError("comparison needs at least two regression labels")
            kw["comparison"] = comp
        kw["render"] = RenderSettings.from_dict(_obj(raw.get("render", {}), "render"))
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from None
    except (FrontierBenchError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None

    if not kw["dea"] and not kw["regressions"] and not kw["staged"]:
        raise ConfigError("config requests no analysis (add 'dea' or 'regressions')")
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    """Read, digest and validate a config file.

    Raises ``OSError`` if the file cannot be read and :class:`ConfigError`
    for JSON or schema problems. Referenced data files are not checked here;
    see :meth:`RunConfig.missing_files`.
    """
    path = Path(path).resolve()
    blob = path.read_bytes()
    digest = hashlib.sha256(blob).hexdigest()
    try:
        raw = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(raw, path, digest)
