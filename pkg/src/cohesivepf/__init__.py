"""Cohesive phase-field fracture with an eigenstrain internal variable.

A finite element library for a regularized cohesive fracture model in
which a per-element inelastic strain carries a damage-degraded
dissipation threshold.  Includes structured 1D/2D meshing, the staggered
quasi-static solver, the closed-form cohesive law with its exponential
optimal damage profile, and scripted verification experiments
(1D cohesive-law reproduction, refinement limit of the jump + damage
profile construction, and mesh-isotropy studies on square and L-shaped
domains).
"""

from .energetics import (
    ElasticDomainPoint,
    MaterialParams,
    damage_regularization_energy,
    degradation,
    eta_star_1d,
    eta_star_antiplane,
    eta_star_planestrain,
    f_1d,
    f_antiplane,
    optimal_profile,
    phi_analytic,
    pi_potential,
)
from .fields import (
    ElementField,
    NodalField,
    SparseSystem,
    assemble_and_solve,
    element_mean,
    gradient,
)
from .meshkit import (
    Mesh,
    MeshSpec,
    band_width,
    build_interval,
    build_structured_triangulation,
)
from .solvers import (
    DiscreteModel,
    EdgeCondition,
    EnergyBreakdown,
    LoadProgram,
    RegionConstraint,
    StaggeredState,
    linear_ramp,
    run_quasistatic,
    solve_d,
    solve_eta,
    solve_u,
    staggered_step,
)

__version__ = "1.0.0"

__all__ = [
    "ElasticDomainPoint",
    "MaterialParams",
    "damage_regularization_energy",
    "degradation",
    "eta_star_1d",
    "eta_star_antiplane",
    "eta_star_planestrain",
    "f_1d",
    "f_antiplane",
    "optimal_profile",
    "phi_analytic",
    "pi_potential",
    "ElementField",
    "NodalField",
    "SparseSystem",
    "assemble_and_solve",
    "element_mean",
    "gradient",
    "Mesh",
    "MeshSpec",
    "band_width",
    "build_interval",
    "build_structured_triangulation",
    "DiscreteModel",
    "EdgeCondition",
    "EnergyBreakdown",
    "LoadProgram",
    "RegionConstraint",
    "StaggeredState",
    "linear_ramp",
    "run_quasistatic",
    "solve_d",
    "solve_eta",
    "solve_u",
    "staggered_step",
]
