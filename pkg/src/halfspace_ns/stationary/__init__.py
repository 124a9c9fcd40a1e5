"""Stationary boundary-layer problem: equilibrium, manifolds, profiles."""
from .equilibrium import (Equilibrium, auxiliary_constants, eigen_analysis, jacobian,
                          nonlinear_terms, ode_rhs, vector_field)
from .manifolds import (CenterManifold, ManifoldExpansion, StableCurve, center_manifold_numeric,
                        diagonal_nonlinear, fit_taylor, manifold_coefficients,
                        stable_manifold_U, stable_manifold_numeric)
from .profiles import (CenterFlow, Classification, DegenerateReport, Existence, GridSpec,
                       StationaryProfile, center_flow_for_profile, classify_boundary,
                       degenerate_structure, profile_residual, riccati_rate, riccati_solution,
                       solve_center_flow, solve_stationary)

__all__ = [name for name in dir() if not name.startswith("_")]
