"""Exception hierarchy shared by all frontier_bench modules."""


class FrontierBenchError(Exception):
    """Base class for every error raised by the toolkit."""


class DataError(FrontierBenchError, ValueError):
    """Malformed, inconsistent or out-of-domain input data."""


class CatalogError(DataError):
    pass


class LpError(FrontierBenchError):
    pass


class DimensionError(LpError, ValueError):
    pass


class SingularBasisError(LpError):
    pass


class InfeasibleError(LpError):
    """Raised by callers that require a feasible LP (the solver itself only reports status)."""

    def __init__(self, message, dmu_id=None):
        super().__init__(message)
        self.dmu_id = dmu_id


class EstimationError(FrontierBenchError):
    pass


class RankDeficiencyError(EstimationError):
    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class ConvergenceError(EstimationError):
    def __init__(self, message, grad_norm=float("nan"), iterations=0):
        super().__init__(message)
        self.grad_norm = grad_norm
        self.iterations = iterations


class ConfigError(FrontierBenchError):
    pass
