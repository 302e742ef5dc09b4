"""Regression specification/result types and model-quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..dataframe import Dataset
from ..errors import DataError, EstimationError

INTERCEPT = "INT"
METHODS = {"ols": "OLS", "tobit": "Tobit", "truncated": "Truncated"}
STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.1, "*"))


def stars(p: float) -> str:
    """Significance marker: ``***`` below 1%, ``**`` below 5%, ``*`` below 10%."""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


def _bound(value, default):
    if value is None:
        return default
    return float(value)


@dataclass(frozen=True)
class RegressionSpec:
    """What to regress on what, and how.

    ``lower``/``upper`` are censoring (Tobit) or truncation (Truncated) limits;
    ``None`` means unbounded on that side. OLS ignores them.
    """

    dependent: str
    regressors: tuple = ()
    intercept: bool = True
    method: str = "OLS"
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        regs = tuple(self.regressors)
        object.__setattr__(self, "regressors", regs)
        method = METHODS.get(str(self.method).lower())
        if method is None:
            raise DataError(f"unknown regression method {self.method!r}")
        object.__setattr__(self, "method", method)
        if len(set(regs)) != len(regs):
            raise DataError("regressors must be duplicate-free")
        if self.dependent in regs:
            raise DataError(f"dependent {self.dependent!r} is also listed as a regressor")
        if not regs and not self.intercept:
            raise DataError("a model needs at least one regressor or an intercept")
        if INTERCEPT in regs:
            raise DataError(f"{INTERCEPT!r} is reserved for the intercept term")
        lo, hi = self.bounds
        if lo >= hi:
            raise DataError("lower bound must be below upper bound")
        if method == "Tobit" and not (math.isfinite(lo) or math.isfinite(hi)):
            raise DataError("Tobit needs at least one finite censoring bound")

    @property
    def bounds(self) -> tuple[float, float]:
        return _bound(self.lower, -math.inf), _bound(self.upper, math.inf)

    @property
    def terms(self) -> list[str]:
        return ([INTERCEPT] if self.intercept else []) + list(self.regressors)

    def with_regressors(self, regressors: Sequence[str]) -> "RegressionSpec":
        return RegressionSpec(self.dependent, tuple(regressors), self.intercept,
                              self.method, self.lower, self.upper)

    def with_method(self, method: str) -> "RegressionSpec":
        return RegressionSpec(self.dependent, self.regressors, self.intercept,
                              method, self.lower, self.upper)

    def to_dict(self) -> dict:
        return {
            "dependent": self.dependent,
            "regressors": list(self.regressors),
            "intercept": self.intercept,
            "method": self.method,
            "lower": self.lower,
            "upper": self.upper,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "RegressionSpec":
        """Build from config keys. Tobit without explicit bounds censors at [0, 1]."""
        method = str(obj.get("method", "OLS"))
        canonical = METHODS.get(method.lower()) == "Tobit"
        return cls(
            dependent=str(obj["dependent"]),
            regressors=tuple(obj.get("regressors", ())),
            intercept=bool(obj.get("intercept", True)),
            method=method,
            lower=obj.get("lower", 0.0 if canonical else None),
            upper=obj.get("upper", 1.0 if canonical else None),
        )


@dataclass(frozen=True)
class Term:
    name: str
    coef: float
    se: float
    p: float

    @property
    def stars(self) -> str:
        return stars(self.p)


@dataclass(frozen=True)
class RegressionResult:
    spec: RegressionSpec
    terms: tuple
    log_lik: float
    aic: float
    n: int
    n_params: int
    sigma: float | None = None
    adj_r2: float | None = None
    r2: float | None = None
    converged: bool = True
    iterations: int = 0
    notes: tuple = ()

    @property
    def method(self) -> str:
        return self.spec.method

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.terms]

    @property
    def coef(self) -> np.ndarray:
        return np.array([t.coef for t in self.terms])

    @property
    def se(self) -> np.ndarray:
        return np.array([t.se for t in self.terms])

    @property
    def pvalues(self) -> np.ndarray:
        return np.array([t.p for t in self.terms])

    def term(self, name: str) -> Term:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "terms": [
                {"name": t.name, "coef": t.coef, "se": t.se, "p": t.p, "stars": t.stars}
                for t in self.terms
            ],
            "sigma": self.sigma,
            "adj_r2": self.adj_r2,
            "r2": self.r2,
            "aic": self.aic,
            "log_lik": self.log_lik,
            "n": self.n,
            "n_params": self.n_params,
            "converged": self.converged,
            "iterations": self.iterations,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "RegressionResult":
        spec = obj["spec"]
        return cls(
            spec=RegressionSpec(spec["dependent"], tuple(spec["regressors"]), spec["intercept"],
                                spec["method"], spec["lower"], spec["upper"]),
            terms=tuple(Term(t["name"], float(t["coef"]), float(t["se"]), float(t["p"]))
                        for t in obj["terms"]),
            log_lik=float(obj["log_lik"]),
            aic=float(obj["aic"]),
            n=int(obj["n"]),
            n_params=int(obj["n_params"]),
            sigma=_opt_float(obj.get("sigma")),
            adj_r2=_opt_float(obj.get("adj_r2")),
            r2=_opt_float(obj.get("r2")),
            converged=obj.get("converged", True),
            iterations=obj.get("iterations", 0),
            notes=tuple(obj.get("notes", ())),
        )


def _opt_float(v):
    return None if v is None else float(v)


def fit_metrics(log_lik: float, n_params: int, r2: float | None = None,
                n: int | None = None) -> tuple[float | None, float, float]:
    """Return ``(adj_r2, aic, log_lik)``.

    ``aic = 2 p - 2 log_lik``. The adjusted R-squared is only formed when
    ``r2`` and ``n`` are given (OLS fits), using ``p`` as the coefficient count.
    """
    aic = 2.0 * n_params - 2.0 * log_lik
    adj = None
    if r2 is not None and n is not None:
        adj = 1.0 - (1.0 - r2) * (n - 1) / (n - n_params)
    return adj, aic, log_lik


@dataclass
class Design:
    y: np.ndarray
    X: np.ndarray
    names: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


def design(spec: RegressionSpec, ds: Dataset) -> Design:
    y = np.array(ds.column(spec.dependent), dtype=float)
    cols = [ds.column(v) for v in spec.regressors]
    if spec.intercept:
        cols.insert(0, np.ones(ds.n))
    X = np.column_stack(cols) if cols else np.empty((ds.n, 0))
    d = Design(y, X, spec.terms)
    if d.n <= d.k:
        raise EstimationError(f"need more observations than parameters (n={d.n}, k={d.k})")
    return d
