"""Maximum-likelihood estimators for limited dependent variables."""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg
from scipy.special import ndtr

from ..dataframe import Dataset
from ..errors import ConvergenceError, DataError, EstimationError
from .core import Design, RegressionResult, RegressionSpec, Term, design, fit_metrics
from .likelihood import newton_maximize, tobit_loglike, truncated_loglike
from .ols import check_rank, least_squares

GRAD_TOL = 1e-8
MAX_ITER = 500
N_STARTS = 5
START_AGREEMENT = 1e-4


def _ols_start(d: Design) -> np.ndarray:
    beta, rss, _ = least_squares(d)
    sigma = math.sqrt(rss / d.n) if rss > 0 else 1.0
    return np.append(beta / sigma, 1.0 / sigma)


def _natural_params(theta, hess):
    """Map Olsen estimates and their Hessian to ``(beta, sigma)`` with covariance.

    Uses the delta method on ``beta = delta / gamma``, ``sigma = 1 / gamma``;
    at a stationary point this equals inverting the observed information in
    the natural parameters.
    """
    delta, gamma = theta[:-1], theta[-1]
    k = delta.size
    J = np.zeros((k + 1, k + 1))
    J[:k, :k] = np.eye(k) / gamma
    J[:k, k] = -delta / gamma**2
    J[k, k] = -1.0 / gamma**2
    try:
        cov_theta = linalg.inv(-hess)
        ok = np.all(np.diag(cov_theta) > 0)
    except linalg.LinAlgError:
        cov_theta, ok = np.full_like(hess, np.nan), False
    cov = J @ cov_theta @ J.T
    return delta / gamma, 1.0 / gamma, cov, ok


def _result(spec, d, theta, ll, g, hess, iterations, notes):
    beta, sigma, cov, ok = _natural_params(theta, hess)
    k = d.k
    se = np.sqrt(np.where(np.diag(cov)[:k] > 0, np.diag(cov)[:k], np.nan))
    if not ok:
        notes = notes + ("observed information is not positive definite; standard errors unreliable",)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = beta / se
    p = np.clip(2.0 * ndtr(-np.abs(z)), 0.0, 1.0)
    gnorm = float(np.max(np.abs(g)))
    if gnorm > GRAD_TOL:
        notes = notes + (f"stopped at numerical optimum with gradient norm {gnorm:.3g}",)
    _, aic, _ = fit_metrics(ll, k + 1)
    terms = tuple(Term(name, float(b), float(s), float(pv))
                  for name, b, s, pv in zip(d.names, beta, se, p))
    return RegressionResult(spec=spec, terms=terms, log_lik=float(ll), aic=float(aic), n=d.n,
                            n_params=k + 1, sigma=float(sigma), adj_r2=None, r2=None,
                            converged=True, iterations=iterations, notes=tuple(notes))


def fit_tobit(spec: RegressionSpec, ds: Dataset) -> RegressionResult:
    """Censored-normal (Tobit) regression.

    Values at or beyond a finite bound are treated as censored there. The
    likelihood is concave in Olsen coordinates, so a single Newton run from
    the OLS solution reaches the global maximum.
    """
    d = design(spec, ds)
    check_rank(d)
    lower, upper = spec.bounds
    censored = (d.y <= lower) | (d.y >= upper)
    if censored.all():
        raise EstimationError("every observation is censored; the likelihood has no interior information")
    notes = ()
    n_cens = int(censored.sum())
    if n_cens:
        notes += (f"{n_cens} censored observation(s)",)

    def fun(theta):
        return tobit_loglike(theta, d.y, d.X, lower, upper)

    theta, ll, g, H, it = newton_maximize(fun, _ols_start(d), GRAD_TOL, MAX_ITER)
    return _result(spec, d, theta, ll, g, H, it, notes)


def fit_truncated(spec: RegressionSpec, ds: Dataset, seed: int = 0,
                  n_starts: int = N_STARTS) -> RegressionResult:
    """Truncated-normal regression with deterministic multi-start.

    Starts are the OLS solution plus ``n_starts - 1`` perturbations drawn from
    ``numpy.random.default_rng(seed)``. The highest likelihood wins (ties go to
    the earlier start, up to round-off). If converged starts disagree by more than ``1e-4`` in
    any coefficient the result carries a note.
    """
    d = design(spec, ds)
    check_rank(d)
    lower, upper = spec.bounds
    outside = (d.y <= lower) | (d.y >= upper)
    if outside.any():
        i = int(np.argmax(outside))
        raise DataError(f"observation {ds.dmu_ids[i]!r} of {spec.dependent} lies on or outside "
                        f"the truncation bounds ({lower}, {upper})")

    def fun(theta):
        return truncated_loglike(theta, d.y, d.X, lower, upper)

    base = _ols_start(d)
    rng = np.random.default_rng(seed)
    starts = [base]
    for _ in range(n_starts - 1):
        pert = base.copy()
        pert[:-1] += rng.normal(0.0, 0.25, d.k) * (np.abs(base[:-1]) + 0.1)
        pert[-1] *= math.exp(rng.normal(0.0, 0.25))
        starts.append(pert)

    fits, failures = [], []
    for idx, start in enumerate(starts):
        try:
            fits.append((idx,) + newton_maximize(fun, start, GRAD_TOL, MAX_ITER))
        except (ConvergenceError, EstimationError) as exc:
            failures.append(exc)
    if not fits:
        raise failures[0]
    top = max(f[2] for f in fits)
    best = next(f for f in fits if f[2] >= top - 1e-10 * (1.0 + abs(top)))
    _, theta, ll, g, H, it = best
    beta_best = theta[:-1] / theta[-1]
    spread = max(float(np.max(np.abs(f[1][:-1] / f[1][-1] - beta_best) / (1.0 + np.abs(beta_best))))
                 for f in fits)
    notes = ()
    if spread > START_AGREEMENT:
        notes += (f"multi-start disagreement {spread:.3g} exceeds {START_AGREEMENT:g}; best optimum kept",)
    if failures:
        notes += (f"{len(failures)} of {len(starts)} starts failed to converge",)
    return _result(spec, d, theta, ll, g, H, it, notes)
