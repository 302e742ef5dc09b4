"""Pre- and post-regression checks: correlation, VIF, PCA, Gini, expected signs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataframe import Dataset, VariableCatalog
from .errors import CatalogError, DataError, EstimationError
from .regress.core import INTERCEPT, RegressionResult

VIF_THRESHOLD = 10.0
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _standardize(ds: Dataset, names: Sequence[str]) -> np.ndarray:
    if ds.n < 2:
        raise DataError("need at least two observations")
    M = ds.matrix(names)
    centred = M - M.mean(axis=0)
    sd = np.sqrt(np.sum(centred**2, axis=0))
    flat = [names[j] for j in np.flatnonzero(sd == 0)]
    if flat:
        raise DataError(f"zero-variance variable(s): {', '.join(flat)}")
    return centred / sd


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple
    matrix: np.ndarray

    def ranked_pairs(self) -> list[tuple[str, str, float]]:
        """Off-diagonal pairs ordered by ``|r|`` descending (ties keep matrix order)."""
        pairs = [(self.names[i], self.names[j], float(self.matrix[i, j]))
                 for i in range(len(self.names)) for j in range(i + 1, len(self.names))]
        return sorted(pairs, key=lambda p: -abs(p[2]))

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": self.matrix.tolist(),
            "ranked_pairs": [list(p) for p in self.ranked_pairs()],
        }

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(self.names))
            for name, row in zip(self.names, self.matrix):
                w.writerow([name] + [format(v, ".17g") for v in row])


def correlation_matrix(ds: Dataset, names: Sequence[str]) -> CorrelationMatrix:
    """Pearson correlations with an exact unit diagonal."""
    Z = _standardize(ds, list(names))
    R = Z.T @ Z
    R = np.clip(0.5 * (R + R.T), -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return CorrelationMatrix(tuple(names), R)


@dataclass(frozen=True)
class VifReport:
    names: tuple
    values: tuple
    threshold: float = VIF_THRESHOLD
    label: str = ""

    @property
    def flagged(self) -> list[str]:
        return [n for n, v in zip(self.names, self.values) if v >= self.threshold]

    @property
    def collinear(self) -> list[str]:
        return [n for n, v in zip(self.names, self.values) if math.isinf(v)]

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "threshold": self.threshold,
            "values": {n: (v if math.isfinite(v) else "inf") for n, v in zip(self.names, self.values)},
            "flagged": self.flagged,
            "collinear": self.collinear,
        }


def vif(ds: Dataset, regressors: Sequence[str], threshold: float = VIF_THRESHOLD,
        label: str = "") -> VifReport:
    """Variance inflation factors from auxiliary regressions on the other regressors.

    Exact collinearity yields ``inf`` for the affected variables (see
    :attr:`VifReport.collinear`).
    """
    names = list(regressors)
    if len(names) < 2:
        raise DataError("VIF needs at least two regressors")
    M = ds.matrix(names)
    n = ds.n
    values = []
    for j, name in enumerate(names):
        target = M[:, j]
        others = np.column_stack([np.ones(n), np.delete(M, j, axis=1)])
        tss = float(np.sum((target - target.mean()) ** 2))
        if tss == 0:
            raise DataError(f"zero-variance regressor {name!r}")
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        rss = float(resid @ resid)
        values.append(math.inf if rss <= 1e-12 * tss else tss / rss)
    return VifReport(tuple(names), tuple(values), threshold, label)


def jacobi_eigh(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` in the original (unsorted) order;
    eigenvectors are the columns of the second array.
    """
    A = np.array(A, dtype=float)
    m = A.shape[0]
    V = np.eye(m)
    offdiag = ~np.eye(m, dtype=bool)
    for _ in range(max_sweeps):
        if math.sqrt(float(np.sum(A[offdiag] ** 2))) < tol:
            return np.diag(A).copy(), V
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(tau * tau + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise EstimationError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class PcaResult:
    names: tuple
    eigenvalues: np.ndarray
    loadings: np.ndarray      # (variables, components), orthonormal columns
    shares: np.ndarray
    retained: int
    scores: np.ndarray        # (observations, retained)

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "eigenvalues": self.eigenvalues.tolist(),
            "explained_share": self.shares.tolist(),
            "retained": self.retained,
            "loadings": self.loadings[:, : self.retained].tolist(),
        }


def pca(ds: Dataset, names: Sequence[str], retain: int | float = 1.0) -> PcaResult:
    """Principal components of the correlation matrix.

    ``retain`` is either a component count (int) or the cumulative
    explained-variance share to reach (float in (0, 1]). Each component is
    signed so that its largest-magnitude loading is positive.
    """
    names = list(names)
    R = correlation_matrix(ds, names).matrix
    evals, evecs = jacobi_eigh(R)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    for j in range(evecs.shape[1]):
        if evecs[np.argmax(np.abs(evecs[:, j])), j] < 0:
            evecs[:, j] = -evecs[:, j]
    clipped = np.maximum(evals, 0.0)
    shares = clipped / clipped.sum()
    if isinstance(retain, (int, np.integer)) and not isinstance(retain, bool):
        if not 1 <= retain <= len(names):
            raise DataError(f"retain must be between 1 and {len(names)}")
        k = int(retain)
    else:
        if not 0 < retain <= 1:
            raise DataError("a variance-share retain value must lie in (0, 1]")
        k = int(np.searchsorted(np.cumsum(shares), retain - 1e-12) + 1)
        k = min(k, len(names))
    Z = _standardize(ds, names) * math.sqrt(ds.n - 1)
    return PcaResult(tuple(names), evals, evecs, shares, k, Z @ evecs[:, :k])


def gini(series) -> float:
    """Gini coefficient, population convention: mean absolute pairwise difference over twice the mean."""
    v = np.sort(np.asarray(series, dtype=float).ravel())
    if v.size == 0:
        raise DataError("gini needs at least one value")
    if np.any(v < 0):
        raise DataError("gini is undefined for negative values")
    total = v.sum()
    if total <= 0:
        raise DataError("gini is undefined for an all-zero series")
    n = v.size
    rank_weights = 2.0 * np.arange(1, n + 1) - n - 1
    return float(rank_weights @ v / (n * total))


def gini_from_counts_csv(path) -> tuple[dict, int]:
    """Per-DMU Gini from a ``dmu_id, period_1 .. period_T`` counts file.

    Returns ``({dmu_id: gini}, T)``. Any periodization (months, weeks, days)
    is accepted; ``T`` is reported so the caller can record it.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if not rows or rows[0][0].strip() != "dmu_id":
        raise DataError(f"{path}: first column must be 'dmu_id'")
    periods = len(rows[0]) - 1
    if periods < 1:
        raise DataError(f"{path}: no period columns")
    out = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != periods + 1:
            raise DataError(f"{path}: line {lineno} has {len(row)} fields, expected {periods + 1}")
        try:
            counts = [float(c) for c in row[1:]]
        except ValueError:
            raise DataError(f"{path}: line {lineno} has a non-numeric count") from None
        dmu = row[0].strip()
        if dmu in out:
            raise DataError(f"{path}: duplicate dmu_id {dmu!r}")
        out[dmu] = gini(counts)
    return out, periods


MATCH, MISMATCH, AMBIGUOUS = "match", "mismatch", "ambiguous-expected"


@dataclass(frozen=True)
class SignRow:
    term: str
    expected: str
    coef: float
    estimated: str
    status: str


@dataclass(frozen=True)
class SignCheck:
    rows: tuple

    @property
    def mismatches(self) -> list[str]:
        return [r.term for r in self.rows if r.status == MISMATCH]

    def status(self, term: str) -> str:
        return next(r.status for r in self.rows if r.term == term)

    def to_dict(self) -> dict:
        return {"rows": [r.__dict__.copy() for r in self.rows], "mismatches": self.mismatches}


def sign_check(result: RegressionResult, catalog: VariableCatalog) -> SignCheck:
    """Compare estimated coefficient signs with the catalog's expected influence."""
    rows = []
    for t in result.terms:
        if t.name == INTERCEPT:
            continue
        if t.name not in catalog:
            raise CatalogError(f"term {t.name!r} is not in the catalog")
        expected = catalog[t.name].expected_sign
        estimated = "positive" if t.coef > 0 else "negative" if t.coef < 0 else "zero"
        if expected == "ambiguous":
            status = AMBIGUOUS
        elif (expected == "positive" and t.coef < 0) or (expected == "negative" and t.coef > 0):
            status = MISMATCH
        else:
            status = MATCH
        rows.append(SignRow(t.name, expected, t.coef, estimated, status))
    return SignCheck(tuple(rows))


def productivity(composite_flight_hours, atco_hours) -> np.ndarray:
    """Composite flight hours per ATCO working hour, element-wise."""
    out = np.asarray(composite_flight_hours, dtype=float)
    den = np.asarray(atco_hours, dtype=float)
    if out.shape != den.shape:
        raise DataError("service and resource vectors must have equal length")
    if np.any(den <= 0):
        raise DataError("ATCO hours must be strictly positive")
    return out / den

