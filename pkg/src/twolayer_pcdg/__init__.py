"""Well-balanced path-conservative DG methods for the two-layer shallow water equations."""
from .basis import DGField, Mesh1D, Mesh2D, ModalBasis, gauss_rule, legendre_eval, project
from .boundary import BoundaryCondition, apply_boundary
from .errors import ConfigError, DomainError, SolverError
from .harness import ErrorReport, RunConfig, Solution, convergence_table, error_norms, run_case
from .model import PhysParams, cons_to_equil_moving, eigenvalues_exact, equil_to_cons_moving

__version__ = "0.1.0"
