from __future__ import annotations

import numpy as np
from scipy import linalg, stats

from ..dataframe import Dataset
from ..errors import RankDeficiencyError
from .core import Design, RegressionResult, RegressionSpec, Term, design, fit_metrics

RANK_TOL = 1e-10


def check_rank(d: Design) -> None:
    """Raise :class:`RankDeficiencyError` naming the columns that add no new direction."""
    if d.k == 0:
        return
    _, R, piv = linalg.qr(d.X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag[0] > 0 else 0
    if rank < d.k:
        dropped = [d.names[j] for j in piv[rank:]]
        raise RankDeficiencyError(
            f"design matrix is rank deficient ({rank} < {d.k}); collinear: {', '.join(dropped)}",
            dropped,
        )


def least_squares(d: Design):
    """QR least squares. Returns ``(beta, rss, R)`` with ``X = Q R``."""
    Q, R = np.linalg.qr(d.X)
    beta = linalg.solve_triangular(R, Q.T @ d.y)
    resid = d.y - d.X @ beta
    return beta, float(resid @ resid), R


def gaussian_loglik(rss: float, n: int) -> float:
    """Normal log-likelihood with the variance concentrated out (``sigma^2 = rss/n``)."""
    with np.errstate(divide="ignore"):
        return float(-0.5 * n * (np.log(2.0 * np.pi * rss / n) + 1.0))


def fit_ols(spec: RegressionSpec, ds: Dataset) -> RegressionResult:
    """Ordinary least squares with classical standard errors and t-based p-values."""
    d = design(spec, ds)
    check_rank(d)
    n, k = d.n, d.k
    beta, rss, R = least_squares(d)
    dof = n - k
    s2 = rss / dof
    Rinv = linalg.solve_triangular(R, np.eye(k))
    se = np.sqrt(s2 * np.sum(Rinv**2, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.inf))
    p = np.clip(2.0 * stats.t.sf(np.abs(t), dof), 0.0, 1.0)

    centre = d.y.mean() if spec.intercept else 0.0
    tss = float(np.sum((d.y - centre) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else float("nan")
    log_lik = gaussian_loglik(rss, n)
    adj, aic, _ = fit_metrics(log_lik, k, r2, n)
    terms = tuple(Term(name, float(b), float(s), float(pv))
                  for name, b, s, pv in zip(d.names, beta, se, p))
    return RegressionResult(spec=spec, terms=terms, log_lik=float(log_lik), aic=float(aic), n=n,
                            n_params=k, sigma=float(np.sqrt(s2)), adj_r2=adj, r2=r2)
