"""Measurable objects of the stability analysis: norms, forms, rate fits."""
from .forms import (BETA_CRITICAL, F1, F1_squares, F2, F2_squares, F4, PoincareResult,
                    QuadraticFormReport, a_hat_11_closed_form, matrix_F1, matrix_F2, matrix_F4,
                    nu_closed_form, poincare_check, quadratic_forms)
from .norms import (CompositeNorms, NormSpec, Perturbation, WeightKind, composite_norms,
                    derivative, energy_density, energy_form, omega, perturbation, trapezoid,
                    weighted_norm, weighted_norm_sq)
from .rates import MIN_R_SQUARED, MIN_SAMPLES, RateFit, RateModel, fit_loglinear, fit_rate
from .series import SERIES_COLUMNS, SeriesRecorder

__all__ = [name for name in dir() if not name.startswith("_")]
