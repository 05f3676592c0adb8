"""Random matrices with external source eigenvalues -a, 0, a in the three-cut regime."""
from .curve import (
    ModelParams,
    Phase,
    Side,
    SupportData,
    boundary_values,
    branch_points,
    classify_phase,
    critical_points,
    discriminants,
    evaluate_z_of_xi,
    solve_sheets,
)
from .density import bin_masses, edge_constants, masses, rho
from .precision import get_profile, set_profile, use_profile

__all__ = [
    "ModelParams",
    "Phase",
    "Side",
    "SupportData",
    "boundary_values",
    "branch_points",
    "classify_phase",
    "critical_points",
    "discriminants",
    "evaluate_z_of_xi",
    "solve_sheets",
    "bin_masses",
    "edge_constants",
    "masses",
    "rho",
    "get_profile",
    "set_profile",
    "use_profile",
]
