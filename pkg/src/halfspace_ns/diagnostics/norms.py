"""Perturbation fields, the convex energy density and weighted norms.

All integrals are composite trapezoid sums on the uniform grid.
Derivatives use ``np.gradient`` with second-order one-sided stencils at
the ends, so ``phi_x(0)`` is second-order accurate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, PositivityError
from ..model import DimensionlessParams

BOUNDARY_TOL = 1e-8


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.trapezoid(y, x)) if hasattr(np, "trapezoid") else float(np.trapz(y, x))


def derivative(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.gradient(f, x, edge_order=2)


@dataclass(frozen=True)
class Perturbation:
    x: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    chi: np.ndarray

    @property
    def Phi(self) -> np.ndarray:
        return np.vstack([self.phi, self.psi, self.chi])

    @property
    def boundary_defect(self) -> float:
        return float(max(abs(self.psi[0]), abs(self.chi[0])))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.Phi)))


def perturbation(state, profile) -> Perturbation:
    """``(phi, psi, chi) = (rho, u, theta) - profile``, on a shared grid."""
    x = profile.x
    if state.rho.size != x.size or not np.allclose(state.grid.x, x, rtol=0, atol=1e-12 * max(1.0, x[-1])):
        raise DomainError("state and profile live on different grids")
    p = Perturbation(x, state.rho - profile.rho, state.u - profile.u, state.theta - profile.theta)
    if p.boundary_defect > BOUNDARY_TOL:
        raise DomainError(f"perturbation does not vanish at the wall (|psi, chi|(0) = {p.boundary_defect:.2e})")
    return p


def omega(s):
    """``s - 1 - log s`` for ``s > 0``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise DomainError("omega requires s > 0")
    # log1p keeps the O((s-1)^2) behaviour accurate near s = 1
    out = (s_arr - 1.0) - np.log1p(s_arr - 1.0)
    return float(out) if out.ndim == 0 else out


def energy_density(rho, u, theta, profile, params: DimensionlessParams) -> np.ndarray:
    if np.any(np.asarray(rho) <= 0) or np.any(np.asarray(theta) <= 0):
        raise PositivityError("energy density needs positive rho and theta")
    m2 = params.mach**2
    tt = profile.theta
    return (tt * omega(profile.rho / rho) / (m2 * params.gamma)
            + 0.5 * (u - profile.u) ** 2
            + params.cv_hat / m2 * tt * omega(theta / tt))


def energy_form(state, profile, params: DimensionlessParams):
    """Pointwise density and its integral ``int rho E dx``."""
    e = energy_density(state.rho, state.u, state.theta, profile, params)
    return e, trapezoid(state.rho * e, profile.x)


class WeightKind(str, enum.Enum):
    PLAIN = "plain"
    DELTA_SCALED = "delta_scaled"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class NormSpec:
    """Weight ``(1+x)^alpha``, ``(1+delta x)^alpha`` or ``exp(zeta x)``."""

    kind: WeightKind = WeightKind.PLAIN
    alpha: float = 0.0
    delta: float = 1.0
    zeta: float = 0.0
    derivative_order: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if self.derivative_order not in (0, 1):
            raise ValueError("derivative_order must be 0 or 1")
        if self.kind is WeightKind.EXPONENTIAL and self.zeta < 0:
            raise ValueError("zeta must be non-negative")

    @classmethod
    def plain(cls, alpha=0.0, derivative_order=0):
        return cls(WeightKind.PLAIN, alpha=alpha, derivative_order=derivative_order)

    @classmethod
    def delta_scaled(cls, alpha, delta, derivative_order=0):
        return cls(WeightKind.DELTA_SCALED, alpha=alpha, delta=delta, derivative_order=derivative_order)

    @classmethod
    def exponential(cls, zeta, derivative_order=0):
        return cls(WeightKind.EXPONENTIAL, zeta=zeta, derivative_order=derivative_order)

    def weight(self, x: np.ndarray) -> np.ndarray:
        if self.kind is WeightKind.PLAIN:
            return (1.0 + x) ** self.alpha
        if self.kind is WeightKind.DELTA_SCALED:
            return (1.0 + self.delta * x) ** self.alpha
        return np.exp(self.zeta * x)


def _as_rows(fields) -> list:
    if isinstance(fields, np.ndarray) and fields.ndim == 1:
        return [fields]
    return [np.asarray(f, dtype=float) for f in fields]


def weighted_norm_sq(fields, spec: NormSpec, x: np.ndarray) -> float:
    w = spec.weight(x)
    total = 0.0
    for f in _as_rows(fields):
        total += trapezoid(w * f * f, x)
        if spec.derivative_order == 1:
            fx = derivative(f, x)
            total += trapezoid(w * fx * fx, x)
    return total


def weighted_norm(fields, spec: NormSpec, x) -> float:
    """Square root of ``sum_f int weight |f|^2`` (plus ``|f_x|^2`` if first order).

    ``fields`` is one array or a sequence of arrays (a vector field);
    ``x`` is the grid (array or an object with an ``x`` attribute).
    """
    x = getattr(x, "x", x)
    return math.sqrt(weighted_norm_sq(fields, spec, x))


@dataclass(frozen=True)
class CompositeNorms:
    N_snapshot: float
    D: float
    D_tilde: float
    E_alpha: float
    D_alpha: float
    E_tilde: float
    D_tilde_alpha: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def composite_norms(pert: Perturbation, profile, params: DimensionlessParams, alpha: float,
                    delta: float | None = None) -> CompositeNorms:
    """Snapshot values of the energy and dissipation norms.

    ``N_snapshot = ||Phi||_{H^1}``; ``D``, ``D_tilde``, ``E_alpha``,
    ``D_alpha``, ``E_tilde``, ``D_tilde_alpha`` follow their definitions with
    unweighted ``||.||``, ``(1+x)^alpha`` and ``(1+delta x)^alpha`` weights.
    """
    x = pert.x
    if delta is None:
        delta = profile.delta if profile is not None else 0.0
    Phi = [pert.phi, pert.psi, pert.chi]
    phx = derivative(pert.phi, x)
    psx = derivative(pert.psi, x)
    chx = derivative(pert.chi, x)
    plain0 = NormSpec.plain(0.0)
    plain0_h1 = NormSpec.plain(0.0, 1)

    boundary = pert.phi[0] ** 2 + phx[0] ** 2
    h1_sq = weighted_norm_sq(Phi, plain0_h1, x)
    D_sq = boundary + weighted_norm_sq(phx, plain0, x) + weighted_norm_sq([psx, chx], plain0_h1, x)
    ds = lambda a, order=0: NormSpec.delta_scaled(a, delta, order)
    D_tilde_sq = D_sq + delta**2 * weighted_norm_sq(Phi, ds(-2.0), x)
    E_alpha_sq = h1_sq + weighted_norm_sq(Phi, NormSpec.plain(alpha), x)
    D_alpha_sq = (D_sq + alpha * weighted_norm_sq(Phi, NormSpec.plain(alpha - 1.0), x)
                  + weighted_norm_sq([psx, chx], NormSpec.plain(alpha), x))
    E_tilde_sq = weighted_norm_sq(Phi, ds(alpha, 1), x)
    D_tilde_alpha_sq = (boundary + delta**2 * weighted_norm_sq(Phi, ds(alpha - 2.0), x)
                        + weighted_norm_sq(phx, ds(alpha), x)
                        + weighted_norm_sq([psx, chx], ds(alpha, 1), x))
    return CompositeNorms(*(math.sqrt(v) for v in (h1_sq, D_sq, D_tilde_sq, E_alpha_sq, D_alpha_sq,
                                                   E_tilde_sq, D_tilde_alpha_sq)))
