"""Time integration of the outflow problem."""
from .scheme import (AlgebraicTail, Compact, EvolutionResult, EvolutionState, FarFieldBC,
                     FluxReport, GaussianBump, Grid, Integrator, PerturbationSpec, SchemeConfig,
                     apply_boundary, build_initial, evolve, flux_balance, mass_residual,
                     momentum_residual, pde_rhs, reference_rate, resample_profile, stable_dt, step)

__all__ = [name for name in dir() if not name.startswith("_")]
