"""Exception hierarchy shared by all modules."""


class FluxCoolingError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(FluxCoolingError, ValueError):
    pass


class ParameterError(FluxCoolingError, ValueError):
    pass


class SolverError(FluxCoolingError, RuntimeError):
    """Numerical failure inside a linear solve; ``diagnostics`` carries details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DegenerateSteadyStateError(SolverError):
    pass


class ConvergenceError(SolverError):
    """Fock truncation loop did not settle; ``n_sequence`` holds (fock_dim, n_ss) pairs."""

    def __init__(self, message, n_sequence):
        super().__init__(message, {"n_sequence": list(n_sequence)})
        self.n_sequence = list(n_sequence)


class IntegrationError(SolverError):
    pass


class FormulaError(FluxCoolingError, ValueError):
    pass


class InsufficientDataError(FluxCoolingError, ValueError):
    pass


class ConfigError(FluxCoolingError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
