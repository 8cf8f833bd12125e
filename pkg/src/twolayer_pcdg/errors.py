"""Exception types shared by the solver modules."""


class DomainError(ValueError):
    """A state left the admissible set (nonpositive layer thickness)."""


class SolverError(RuntimeError):
    """A nonlinear solve failed to converge or hit a singular Jacobian."""

    def __init__(self, message, last_iterate=None, residual=None, where=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.where = where


class ConfigError(ValueError):
    """Invalid run configuration."""
