"""Potentials of insulated and superconducting spherical-shell inclusions.

Exact separated-variable solutions of the Laplace problems on a shell
B_{r0+eps} \\ B_{r0} in any dimension d >= 2, together with the spherical
harmonic machinery needed to expand boundary data, finite-difference
oracles that verify the closed forms, and sweep experiments measuring how
the field strength responds to a shrinking shell width.
"""

from .sphere_basis import (
    BasisSpec,
    HarmonicIndex,
    QuadratureRule,
    SpherePoint,
    build_quadrature,
    enumerate_basis,
    eval_Y,
    eval_grad_Y,
    harmonic_space_dim,
    surface_area,
)
from .boundary_data import (
    BoundaryFunction,
    ExpansionCoefficients,
    coefficient_energy,
    constant,
    coordinate,
    exp_coordinate,
    expand,
    gaussian_bump,
    polynomial,
    reconstruct,
    sampled,
    smooth_catalog,
    truncation_error,
)
from .exact_solutions import (
    Geometry,
    InsulatedSolution,
    PerfectSolution,
    insulated_coeffs,
    perfect_C0,
    perfect_profile_derivatives,
    perfect_profiles,
    rho,
    rho_diff,
    solve_insulated,
    solve_perfect,
)
from .oracle import (
    ModeBVPSpec,
    PolarField2D,
    RadialGrid,
    discrete_laplacian_residual,
    flux_integral,
    polar_laplace_solve_2d,
    radial_bvp_solve,
    radial_convergence_study,
)
from .experiments import (
    PowerLawFit,
    SweepRow,
    TaylorGapReport,
    epsilon_sweep,
    fit_power_law,
    sup_grad,
    taylor_gap_check,
)

__all__ = [
    "BasisSpec",
    "BoundaryFunction",
    "ExpansionCoefficients",
    "Geometry",
    "HarmonicIndex",
    "InsulatedSolution",
    "ModeBVPSpec",
    "PerfectSolution",
    "PolarField2D",
    "PowerLawFit",
    "QuadratureRule",
    "RadialGrid",
    "SpherePoint",
    "SweepRow",
    "TaylorGapReport",
    "build_quadrature",
    "coefficient_energy",
    "constant",
    "coordinate",
    "discrete_laplacian_residual",
    "enumerate_basis",
    "epsilon_sweep",
    "eval_Y",
    "eval_grad_Y",
    "exp_coordinate",
    "expand",
    "fit_power_law",
    "flux_integral",
    "gaussian_bump",
    "harmonic_space_dim",
    "insulated_coeffs",
    "perfect_C0",
    "perfect_profile_derivatives",
    "perfect_profiles",
    "polar_laplace_solve_2d",
    "polynomial",
    "radial_bvp_solve",
    "radial_convergence_study",
    "reconstruct",
    "rho",
    "rho_diff",
    "sampled",
    "smooth_catalog",
    "solve_insulated",
    "solve_perfect",
    "sup_grad",
    "surface_area",
    "taylor_gap_check",
    "truncation_error",
]

__version__ = "0.1.0"
