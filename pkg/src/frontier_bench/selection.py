"""Model-selection protocols: backward elimination, staged inclusion, model comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dataframe import Dataset, VariableCatalog
from .diagnostics import VIF_THRESHOLD, VifReport, vif
from .errors import DataError, FrontierBenchError
from .regress import INTERCEPT, RegressionResult, RegressionSpec, fit

DEFAULT_THRESHOLD = 0.33
STAGE_LABELS = ("endogenous", "+dummies", "+airspace", "+demand", "all")


def vif_report(ds: Dataset, regressors: Sequence[str], threshold: float = VIF_THRESHOLD,
               label: str = "") -> VifReport:
    """VIF for any regressor count; with fewer than two regressors every VIF is 1."""
    regs = list(regressors)
    if len(regs) < 2:
        return VifReport(tuple(regs), tuple(1.0 for _ in regs), threshold, label)
    return vif(ds, regs, threshold, label)


@dataclass(frozen=True)
class ReductionStep:
    removed: str
    p_value: float
    regressors: tuple
    adj_r2: float | None
    aic: float
    log_lik: float
    vif: VifReport

    def to_dict(self) -> dict:
        return {
            "removed": self.removed,
            "p_value": self.p_value,
            "regressors": list(self.regressors),
            "adj_r2": self.adj_r2,
            "aic": self.aic,
            "log_lik": self.log_lik,
            "vif": self.vif.to_dict(),
        }


@dataclass(frozen=True)
class ReductionTrace:
    threshold: float
    initial: RegressionResult
    steps: tuple
    final: RegressionResult

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "initial_regressors": list(self.initial.spec.regressors),
            "steps": [s.to_dict() for s in self.steps],
            "final": self.final.to_dict(),
        }


def _removal_candidate(result: RegressionResult, rank: Mapping[str, int]) -> tuple[str, float]:
    """Regressor with the largest p-value; among exact ties the one ranked latest."""
    terms = [t for t in result.terms if t.name != INTERCEPT]
    worst = max(t.p for t in terms)
    tied = [t.name for t in terms if t.p == worst]
    return max(tied, key=lambda name: rank[name]), worst


def backward_eliminate(spec: RegressionSpec, ds: Dataset, threshold: float = DEFAULT_THRESHOLD,
                       order: Sequence[str] | VariableCatalog | None = None, seed: int = 0,
                       vif_threshold: float = VIF_THRESHOLD) -> ReductionTrace:
    """Drop the least significant regressor one at a time until all p <= threshold.

    Stops early when a single regressor is left; the intercept is never a
    candidate. ``order`` (a catalog or a list of names) breaks exact p-value
    ties: the variable listed later is removed. The VIF of every refitted
    model is recorded with its step.
    """
    if not 0 < threshold < 1:
        raise DataError("threshold must lie in (0, 1)")
    names = list(order.names if isinstance(order, VariableCatalog) else (order or []))
    rank = {name: i for i, name in enumerate(names)}
    for i, name in enumerate(spec.regressors):
        rank.setdefault(name, len(names) + i)

    initial = fit(spec, ds, seed=seed)
    current = initial
    steps = []
    while len(current.spec.regressors) > 1:
        name, p = _removal_candidate(current, rank)
        if not p > threshold:
            break
        remaining = tuple(r for r in current.spec.regressors if r != name)
        current = fit(current.spec.with_regressors(remaining), ds, seed=seed)
        steps.append(ReductionStep(
            removed=name, p_value=p, regressors=remaining, adj_r2=current.adj_r2,
            aic=current.aic, log_lik=current.log_lik,
            vif=vif_report(ds, remaining, vif_threshold, label=f"step {len(steps) + 1}"),
        ))
    return ReductionTrace(threshold, initial, tuple(steps), current)


@dataclass(frozen=True)
class Stage:
    label: str
    added: tuple
    result: RegressionResult
    vif: VifReport

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "added": list(self.added),
            "regressors": list(self.result.spec.regressors),
            "result": self.result.to_dict(),
            "vif": self.vif.to_dict(),
        }


@dataclass(frozen=True)
class StagedRun:
    stages: tuple
    notes: tuple = ()
    error: str | None = None

    @property
    def regressor_sets(self) -> list[tuple]:
        return [s.result.spec.regressors for s in self.stages]

    def to_dict(self) -> dict:
        return {
            "stages": [s.to_dict() for s in self.stages],
            "notes": list(self.notes),
            "error": self.error,
        }


def stage_partition(catalog: VariableCatalog, pool: Sequence[str],
                    dummy_sets: Mapping[str, Sequence[str]],
                    airspace: Sequence[str], demand: Sequence[str]) -> list[list[str]]:
    """Split ``pool`` plus the dummy groups into the five incremental additions."""
    dummies = []
    for members in dummy_sets.values():
        dummies += [m for m in members if m not in dummies]
    rest = [v for v in pool if v not in dummies]
    endo = [v for v in rest if catalog[v].category == "endogenous"]
    air = [v for v in rest if v in airspace]
    dem = [v for v in rest if v in demand and v not in air]
    undeclared = [v for v in rest if catalog[v].category == "partly_exogenous"
                  and v not in air and v not in dem]
    if undeclared:
        raise DataError("partly exogenous variable(s) without airspace/demand membership: "
                        + ", ".join(undeclared))
    placed = set(endo) | set(air) | set(dem)
    final = [v for v in rest if v not in placed]
    return [endo, dummies, air, dem, final]


def staged_inclusion(catalog: VariableCatalog, dummy_sets: Mapping[str, Sequence[str]],
                     spec: RegressionSpec, ds: Dataset, airspace: Sequence[str] = (),
                     demand: Sequence[str] = (), seed: int = 0,
                     vif_threshold: float = VIF_THRESHOLD) -> StagedRun:
    """Fit five nested models, adding factor groups in a fixed order.

    Stage 1 holds the endogenous factors, stage 2 adds the configured dummy
    groups, stages 3 and 4 add airspace-structure and demand factors, and
    stage 5 adds everything left (the exogenous factors). ``spec.regressors``
    is the candidate pool; when empty, every non-performance catalog variable
    present in ``ds`` is used. Each stage carries a VIF report; flags warn
    but never abort. A failing fit ends the run early with ``error`` set.
    """
    pool = list(spec.regressors) or [s.name for s in catalog
                                     if s.category != "performance" and s.name in ds]
    additions = stage_partition(catalog, pool, dummy_sets, airspace, demand)
    notes = []
    if not additions[1]:
        notes.append("stage '+dummies' adds no variables (no dummy group configured)")
    stages = []
    current: list[str] = []
    for label, added in zip(STAGE_LABELS, additions):
        current = current + [v for v in added if v not in current]
        try:
            result = fit(spec.with_regressors(current), ds, seed=seed)
        except FrontierBenchError as exc:
            return StagedRun(tuple(stages), tuple(notes), f"stage {label!r}: {exc}")
        report = vif_report(ds, current, vif_threshold, label=f"stage {label}")
        if report.flagged:
            notes.append(f"stage {label!r}: VIF >= {vif_threshold:g} for {', '.join(report.flagged)}")
        stages.append(Stage(label, tuple(added), result, report))
    return StagedRun(tuple(stages), tuple(notes))


@dataclass(frozen=True)
class ComparisonTable:
    labels: tuple
    results: tuple
    terms: tuple
    best_aic: str
    best_log_lik: str
    cells: Mapping = field(default_factory=dict)

    def cell(self, label: str, term: str):
        return self.cells.get((label, term))

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "terms": list(self.terms),
            "columns": [
                {
                    "label": label,
                    "method": r.method,
                    "dependent": r.spec.dependent,
                    "adj_r2": r.adj_r2,
                    "aic": r.aic,
                    "log_lik": r.log_lik,
                    "n": r.n,
                    "terms": {t.name: {"coef": t.coef, "se": t.se, "p": t.p, "stars": t.stars}
                              for t in r.terms},
                }
                for label, r in zip(self.labels, self.results)
            ],
            "best_aic": self.best_aic,
            "best_log_lik": self.best_log_lik,
        }


def compare_models(results: Sequence[tuple[str, RegressionResult]]) -> ComparisonTable:
    """Align several fits by term name and mark the best AIC and log-likelihood."""
    if len(results) < 2:
        raise DataError("comparison needs at least two results")
    labels = [label for label, _ in results]
    if len(set(labels)) != len(labels):
        raise DataError("comparison labels must be unique")
    terms: list[str] = []
    cells = {}
    for label, r in results:
        for t in r.terms:
            if t.name not in terms:
                terms.append(t.name)
            cells[(label, t.name)] = t
    if INTERCEPT in terms:
        terms.remove(INTERCEPT)
        terms.insert(0, INTERCEPT)
    best_aic = min(results, key=lambda lr: lr[1].aic)[0]
    best_ll = max(results, key=lambda lr: lr[1].log_lik if not math.isnan(lr[1].log_lik) else -math.inf)[0]
    return ComparisonTable(tuple(labels), tuple(r for _, r in results), tuple(terms),
                           best_aic, best_ll, cells)
