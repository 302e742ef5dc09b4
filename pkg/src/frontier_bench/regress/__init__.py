"""Second-stage estimators: OLS, Tobit (censored) and truncated regression."""

from .core import (INTERCEPT, RegressionResult, RegressionSpec, Term, fit_metrics,
                   stars)
from .mle import fit_tobit, fit_truncated
from .ols import fit_ols


def fit(spec: RegressionSpec, ds, seed: int = 0) -> RegressionResult:
    """Dispatch on ``spec.method``."""
    if spec.method == "OLS":
        return fit_ols(spec, ds)
    if spec.method == "Tobit":
        return fit_tobit(spec, ds)
    return fit_truncated(spec, ds, seed=seed)


__all__ = [
    "INTERCEPT", "RegressionResult", "RegressionSpec", "Term", "fit", "fit_metrics",
    "fit_ols", "fit_tobit", "fit_truncated", "stars",
]
