"""End-to-end second-stage analysis driven by a :class:`RunConfig`.

Order: load, transforms, Gini (so that descriptive statistics can cover the
computed GINI column), descriptive statistics, DEA, correlation and
PCA, regressions (with optional backward elimination), staged inclusion,
model comparison, sign checks, rendering. Independent analyses that fail are
recorded under ``failures`` and the run carries on.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .dataframe import (Dataset, VariableCatalog, VariableSpec, apply_transforms,
                        descriptive_stats, load_catalog, load_csv, default_catalog)
from .dea import solve_envelopment
from .diagnostics import correlation_matrix, gini_from_counts_csv, pca, productivity, sign_check
from .errors import DataError, FrontierBenchError
from .regress import fit
from .report import render_report
from .selection import backward_eliminate, compare_models, staged_inclusion

REPORT_SECTIONS = ("metadata", "descriptive_stats", "gini", "dea", "correlation", "pca",
                   "regressions", "staged", "comparison", "failures")


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class RunOutcome:
    report: dict
    files: dict = field(default_factory=dict)   # file name -> text

    @property
    def failed(self) -> bool:
        return bool(self.report["failures"])


def _catalog(cfg: RunConfig) -> VariableCatalog:
    return load_catalog(cfg.catalog) if cfg.catalog else default_catalog()


def _performance(name: str, metric: str) -> VariableSpec:
    return VariableSpec(name, "performance", metric)


def _scores_csv(scores) -> str:
    lines = ["dmu_id,score"] + [f"{s.dmu_id},{format(s.score, '.17g')}" for s in scores]
    return "\n".join(lines) + "\n"


def _corr_csv(cm) -> str:
    lines = ["," + ",".join(cm.names)]
    for name, row in zip(cm.names, cm.matrix):
        lines.append(name + "," + ",".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def execute(cfg: RunConfig, seed: int = 0, timestamp: str | None = None) -> RunOutcome:
    """Run every configured analysis in memory.

    Raises :class:`OSError` for unreadable inputs and
    :class:`~frontier_bench.errors.FrontierBenchError` when the data cannot be
    loaded at all; later failures are collected in the report.
    """
    catalog = _catalog(cfg)
    if cfg.productivity is not None:
        catalog = catalog.extended([_performance(cfg.productivity.name, "ratio")])
    catalog = catalog.extended([_performance(f"DEA_{m.name}", "score") for m in cfg.dea])
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        raw = load_csv(cfg.data, catalog, cfg.missing_policy, cfg.year)

    failures: list[dict] = []
    files: dict[str, str] = {}

    def failed(analysis, exc):
        failures.append({"analysis": analysis, "error": str(exc)})

    if cfg.productivity is not None:
        p = cfg.productivity
        raw = raw.with_column(p.name, productivity(raw.column(p.output), raw.column(p.input)))

    ds = apply_transforms(raw, catalog)

    gini_section = None
    if cfg.monthly_counts is not None:
        try:
            values, periods = gini_from_counts_csv(cfg.monthly_counts)
            missing = [d for d in ds.dmu_ids if d not in values]
            if missing:
                raise DataError(f"no traffic counts for dmu(s) {', '.join(missing)}")
            col = [values[d] for d in ds.dmu_ids]
            raw, ds = raw.with_column("GINI", col), ds.with_column("GINI", col)
            gini_section = {"periods": periods, "convention": "population",
                            "values": {d: values[d] for d in ds.dmu_ids}}
        except FrontierBenchError as exc:
            failed("gini", exc)

    explanatory = [s.name for s in catalog if s.category != "performance" and s.name in raw]
    continuous = [v for v in explanatory if not catalog[v].is_dummy]
    stats_vars = list(cfg.descriptive) if cfg.descriptive is not None else continuous
    stats = None
    try:
        # stats are reported in the variables' own units, i.e. before log-scaling
        stats = [r.__dict__.copy() for r in descriptive_stats(raw, stats_vars)]
    except FrontierBenchError as exc:
        failed("descriptive_stats", exc)

    dea_section = []
    dea_scores: dict[str, dict] = {}
    for model in cfg.dea:
        try:
            scores = solve_envelopment(model, raw)
        except FrontierBenchError as exc:
            failed(f"dea {model.name}", exc)
            dea_section.append({"spec": model.to_dict(), "error": str(exc)})
            continue
        dea_scores[f"DEA_{model.name}"] = {s.dmu_id: s.score for s in scores}
        dea_section.append({"spec": model.to_dict(), "scores": [s.to_dict() for s in scores]})
        files[f"dea_{model.name}.csv"] = _scores_csv(scores)

    def frame_for(names) -> Dataset:
        """Transformed data restricted to DMUs scored by every DEA column in ``names``."""
        used = [n for n in names if n in dea_scores]
        frame = ds
        if used:
            keep = [d for d in ds.dmu_ids if all(d in dea_scores[u] for u in used)]
            frame = ds.select_rows(keep)
            for u in used:
                frame = frame.with_column(u, [dea_scores[u][d] for d in keep])
        return frame

    corr_section = None
    corr_vars = list(cfg.correlation) if cfg.correlation is not None else continuous
    skipped = []
    if cfg.correlation is None:
        # the default set quietly leaves out constant columns; an explicit list fails on them
        skipped = [v for v in corr_vars if np.ptp(raw.column(v)) == 0]
        corr_vars = [v for v in corr_vars if v not in skipped]
    if len(corr_vars) >= 2:
        try:
            cm = correlation_matrix(frame_for(corr_vars), corr_vars)
            corr_section = cm.to_dict()
            if skipped:
                corr_section["skipped_constant"] = skipped
            files["correlation.csv"] = _corr_csv(cm)
        except FrontierBenchError as exc:
            failed("correlation", exc)

    pca_section = None
    if cfg.pca_variables is not None:
        try:
            pca_section = pca(frame_for(cfg.pca_variables), cfg.pca_variables, cfg.pca_retain).to_dict()
        except FrontierBenchError as exc:
            failed("pca", exc)

    regressions = []
    finals = {}
    for job in cfg.regressions:
        entry = {"label": job.label, "spec": job.spec.to_dict()}
        try:
            frame = frame_for([job.spec.dependent, *job.spec.regressors])
            if job.reduce:
                trace = backward_eliminate(job.spec, frame, cfg.threshold, catalog, seed,
                                           cfg.vif_threshold)
                result = trace.final
                entry["reduction"] = trace.to_dict()
            else:
                result = fit(job.spec, frame, seed=seed)
            entry["result"] = result.to_dict()
            entry["sign_check"] = sign_check(result, catalog).to_dict()
            finals[job.label] = result
        except FrontierBenchError as exc:
            failed(f"regression {job.label}", exc)
            entry["error"] = str(exc)
        regressions.append(entry)

    staged = []
    for job in cfg.staged:
        try:
            pool = list(job.spec.regressors) or [
                s.name for s in catalog if s.category != "performance" and s.name in ds]
            frame = frame_for([job.spec.dependent, *pool])
            run = staged_inclusion(catalog, cfg.dummy_sets, job.spec.with_regressors(pool), frame,
                                   cfg.airspace, cfg.demand, seed, cfg.vif_threshold)
            if run.error:
                failed(f"staged {job.label}", run.error)
            staged.append({"label": job.label, **run.to_dict()})
        except FrontierBenchError as exc:
            failed(f"staged {job.label}", exc)
            staged.append({"label": job.label, "stages": [], "notes": [], "error": str(exc)})

    comparison = None
    labels = list(cfg.comparison) if cfg.comparison is not None else list(finals)
    if len(labels) >= 2:
        absent = [lab for lab in labels if lab not in finals]
        if absent:
            failed("comparison", f"cited regression(s) failed: {', '.join(absent)}")
        else:
            table = compare_models([(lab, finals[lab]) for lab in labels])
            comparison = table.to_dict()
            comparison["results"] = [{"label": lab, "result": finals[lab].to_dict()} for lab in labels]

    stamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    report = {
        "metadata": {
            "tool_version": __version__,
            "timestamp": stamp,
            "config_digest": cfg.digest,
            "data": str(cfg.data),
            "year": raw.year,
            "n": ds.n,
            "dropped_rows": raw.dropped_rows,
            "seed": seed,
        },
        "render": {"decimals": cfg.render.decimals, "decimal_separator": cfg.render.decimal_separator,
                   "minus_sign": cfg.render.minus},
        "descriptive_stats": stats,
        "gini": gini_section,
        "dea": dea_section,
        "correlation": corr_section,
        "pca": pca_section,
        "regressions": regressions,
        "staged": staged,
        "comparison": comparison,
        "failures": failures,
    }
    report = jsonable(report)
    files["report.json"] = json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    files["report.txt"] = render_report(report)
    return RunOutcome(report, files)


def write_outputs(outcome: RunOutcome, out_dir) -> list[Path]:
    """Write all output files; on an I/O error remove what was written and re-raise."""
    out_dir = Path(out_dir)
    created_dir = not out_dir.exists()
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(outcome.files):
            path = out_dir / name
            path.write_text(outcome.files[name], encoding="utf-8")
            written.append(path)
    except OSError:
        for path in written:
            path.unlink(missing_ok=True)
        if created_dir and out_dir.exists() and not any(out_dir.iterdir()):
            out_dir.rmdir()
        raise
    return written


def validate(cfg: RunConfig) -> list[str]:
    """Check a config against its input files without running any analysis.

    Returns a list of problems; empty means the run can start.
    """
    missing = cfg.missing_files()
    if missing:
        return [f"missing file: {p}" for p in missing]
    problems = []
    try:
        catalog = _catalog(cfg)
        if cfg.productivity is not None:
            catalog = catalog.extended([_performance(cfg.productivity.name, "ratio")])
        catalog = catalog.extended([_performance(f"DEA_{m.name}", "score") for m in cfg.dea])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ds = load_csv(cfg.data, catalog, cfg.missing_policy, cfg.year)
    except FrontierBenchError as exc:
        return [str(exc)]
    known = set(ds.names) | {f"DEA_{m.name}" for m in cfg.dea}
    if cfg.monthly_counts is not None:
        known.add("GINI")
    if cfg.productivity is not None:
        p = cfg.productivity
        known.add(p.name)
        problems += [f"productivity: unknown variable {v!r}" for v in (p.output, p.input) if v not in ds]

    def check(where, names):
        problems.extend(f"{where}: unknown variable {v!r}" for v in names if v not in known)

    for m in cfg.dea:
        check(f"dea {m.name}", [*m.inputs, *m.outputs])
        problems.extend(f"dea {m.name}: unknown excluded dmu {d!r}"
                        for d in m.excluded_dmus if d not in ds.dmu_ids)
    for job in cfg.regressions:
        check(f"regression {job.label}", [job.spec.dependent, *job.spec.regressors])
    for job in cfg.staged:
        check(f"staged {job.label}", [job.spec.dependent, *job.spec.regressors])
    check("descriptive", cfg.descriptive or ())
    check("correlation", cfg.correlation or ())
    check("pca", cfg.pca_variables or ())
    for group, members in cfg.dummy_sets.items():
        problems.extend(f"dummy set {group}: {v!r} is not a catalog dummy"
                        for v in members if v not in catalog or not catalog[v].is_dummy)
    return problems
