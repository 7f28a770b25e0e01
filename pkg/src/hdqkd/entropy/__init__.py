"""Lower bounds on the conditional entropy S(A|E) by semidefinite programming."""

from .export import export_sdp, load_conic
from .oracle import direct_entropy_oracle
from .quadrature import Quadrature, gauss_radau
from .sdp import (
                  ConicForm,
                  SdpProblem,
                  assemble_sdp,
                  constraint_rank,
                  key_pinching_projectors,
                  objective_constant,
)
from .solvers import (
                  SdpSolution,
                  SolverOptions,
                  SolveStatus,
                  available_backends,
                  register_backend,
                  solve_conic,
                  solve_entropy_bound,
)

__all__ = [
    "ConicForm", "Quadrature", "SdpProblem", "SdpSolution", "SolveStatus", "SolverOptions",
    "assemble_sdp", "available_backends", "constraint_rank", "direct_entropy_oracle",
    "export_sdp", "gauss_radau", "key_pinching_projectors", "load_conic", "objective_constant",
    "register_backend", "solve_conic", "solve_entropy_bound",
]
