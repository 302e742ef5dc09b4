"""Censored- and truncated-normal log-likelihoods and a safeguarded Newton ascent.

Both likelihoods use Olsen's reparameterization ``theta = (delta, gamma)`` with
``delta = beta / sigma`` and ``gamma = 1 / sigma``. Every observation then
depends on ``theta`` only through standardized indices that are linear in
``theta``, which keeps the derivatives short. In these coordinates the Tobit
log-likelihood is globally concave.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg
from scipy.special import log_ndtr

from ..errors import ConvergenceError, EstimationError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SIGMA_FLOOR = 1e-10
DECREMENT_FLOOR = 1e-13
FLAT_STEPS = 3


def log_phi(z):
    return -0.5 * np.square(z) - LOG_SQRT_2PI


def mills(z):
    """Inverse Mills ratio ``phi(z) / Phi(z)``, evaluated in log space."""
    return np.exp(log_phi(z) - log_ndtr(z))


def log_prob_between(a, b):
    """``log(Phi(b) - Phi(a))`` for ``a < b`` without cancellation in either tail."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    upper_tail = a > 0
    hi = np.where(upper_tail, log_ndtr(-a), log_ndtr(b))
    lo = np.where(upper_tail, log_ndtr(-b), log_ndtr(a))
    with np.errstate(divide="ignore"):
        return hi + np.log1p(-np.exp(lo - hi))


def _split(theta):
    theta = np.asarray(theta, dtype=float)
    return theta[:-1], theta[-1]


def tobit_loglike(theta, y, X, lower=-math.inf, upper=math.inf):
    """Censored-normal log-likelihood, gradient and Hessian in Olsen coordinates.

    Observations with ``y <= lower`` (``y >= upper``) contribute the probability
    mass below (above) the bound; all others contribute the density.
    Returns ``(-inf, None, None)`` outside the domain ``gamma > 0``.
    """
    delta, gamma = _split(theta)
    if not gamma > 0:
        return -math.inf, None, None
    n, k = X.shape
    xb = X @ delta
    at_lo = y <= lower
    at_hi = y >= upper
    mid = ~(at_lo | at_hi)

    grad = np.zeros(k + 1)
    hess = np.zeros((k + 1, k + 1))

    z = gamma * y[mid] - xb[mid]
    D = np.column_stack([-X[mid], y[mid]])
    ll = np.sum(math.log(gamma) + log_phi(z))
    grad -= D.T @ z
    grad[-1] += mid.sum() / gamma
    hess -= D.T @ D
    hess[-1, -1] -= mid.sum() / gamma**2

    for mask, sign, bound in ((at_lo, -1.0, lower), (at_hi, 1.0, upper)):
        if not mask.any():
            continue
        # index z = sign * (x delta - gamma * bound), contributes log Phi(z)
        z = sign * (xb[mask] - gamma * bound)
        D = sign * np.column_stack([X[mask], np.full(mask.sum(), -bound)])
        lam = mills(z)
        ll += np.sum(log_ndtr(z))
        grad += D.T @ lam
        w = lam * (lam + z)
        hess -= (D * w[:, None]).T @ D
    return float(ll), grad, hess


def truncated_loglike(theta, y, X, lower=-math.inf, upper=math.inf):
    """Truncated-normal log-likelihood, gradient and Hessian in Olsen coordinates.

    Each density term is renormalized by the probability that the latent
    variable falls inside ``(lower, upper)``. Infinite bounds drop out, so with
    both bounds infinite this is the plain normal-regression likelihood.
    """
    delta, gamma = _split(theta)
    if not gamma > 0:
        return -math.inf, None, None
    n, k = X.shape
    xb = X @ delta
    z = gamma * y - xb
    D = np.column_stack([-X, y])
    ll = n * math.log(gamma) + np.sum(log_phi(z))
    grad = -D.T @ z
    grad[-1] += n / gamma
    hess = -D.T @ D
    hess[-1, -1] -= n / gamma**2

    lo_fin, hi_fin = math.isfinite(lower), math.isfinite(upper)
    if not (lo_fin or hi_fin):
        return float(ll), grad, hess

    a = gamma * lower - xb if lo_fin else np.full(n, -math.inf)
    b = gamma * upper - xb if hi_fin else np.full(n, math.inf)
    logP = log_prob_between(a, b)
    ll -= np.sum(logP)

    pa = np.exp(log_phi(a) - logP) if lo_fin else np.zeros(n)
    pb = np.exp(log_phi(b) - logP) if hi_fin else np.zeros(n)
    Da = np.column_stack([-X, np.full(n, lower if lo_fin else 0.0)])
    Db = np.column_stack([-X, np.full(n, upper if hi_fin else 0.0)])
    G = Db * pb[:, None] - Da * pa[:, None]
    grad -= G.sum(axis=0)
    wa = a * pa if lo_fin else np.zeros(n)
    wb = b * pb if hi_fin else np.zeros(n)
    hess += (Db * wb[:, None]).T @ Db - (Da * wa[:, None]).T @ Da + G.T @ G
    return float(ll), grad, hess


def newton_maximize(fun, theta0, tol=1e-8, max_iter=500):
    """Maximize ``fun(theta) -> (ll, grad, hess)`` by damped Newton steps.

    Where the Hessian is not negative definite a multiple of the identity is
    added until it is (Levenberg). Steps are halved until the objective does
    not decrease. Converges when the max-norm of the gradient is ``<= tol``,
    or, on badly scaled designs where that norm has a round-off floor above
    ``tol``, when the Newton decrement ``g' (-H)^-1 g`` drops below
    ``DECREMENT_FLOOR * max(1, |ll|)`` for ``FLAT_STEPS`` iterations; the caller sees the final gradient.

    Returns ``(theta, ll, grad, hess, iterations)``.
    Raises :class:`ConvergenceError` after ``max_iter`` iterations or when no
    ascent step can be found while the gradient is still large.
    """
    theta = np.array(theta0, dtype=float)
    ll, g, H = fun(theta)
    if not math.isfinite(ll):
        raise EstimationError("log-likelihood is not finite at the starting point")
    eye = np.eye(theta.size)
    flat = 0
    for it in range(max_iter + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol:
            return theta, ll, g, H, it
        if it == max_iter:
            break
        negH = -H
        mu = 0.0
        scale = max(1.0, float(np.max(np.abs(np.diag(negH)))))
        for _ in range(80):
            try:
                c = linalg.cho_factor(negH + mu * eye)
                break
            except linalg.LinAlgError:
                mu = max(2.0 * mu, 1e-10 * scale)
        else:
            raise ConvergenceError("could not regularize the Hessian", gnorm, it)
        d = linalg.cho_solve(c, g)
        slope = float(g @ d)
        if mu == 0.0 and slope <= DECREMENT_FLOOR * max(1.0, abs(ll)):
            # predicted gain is below round-off of ll; a few such steps in a row
            # mean the gradient has hit its floating-point floor
            flat += 1
            if flat >= FLAT_STEPS:
                return theta, ll, g, H, it
        else:
            flat = 0
        step = 1.0
        for _ in range(60):
            cand = theta + step * d
            ll_c, g_c, H_c = fun(cand)
            if math.isfinite(ll_c) and ll_c >= ll + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            # no ascent at machine precision: accept as stationary if flat
            if slope <= 1e-15 * max(1.0, abs(ll)):
                return theta, ll, g, H, it
            raise ConvergenceError(f"line search failed (gradient norm {gnorm:.3g})", gnorm, it)
        theta, ll, g, H = cand, ll_c, g_c, H_c
        if theta[-1] > 1.0 / SIGMA_FLOOR:
            raise EstimationError("scale parameter collapsed below 1e-10")
    gnorm = float(np.max(np.abs(g)))
    raise ConvergenceError(f"no convergence after {max_iter} iterations "
                           f"(gradient norm {gnorm:.3g})", gnorm, max_iter)
