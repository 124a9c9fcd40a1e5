"""Gas parameters and their dimensionless form.

Everything downstream of this module works with :class:`DimensionlessParams`.
Physical inputs (:class:`PhysicalGas`, :class:`FarField`) exist only at the
ingestion boundary and are normalized so that the far field becomes
``(rho, u, theta) = (1, -1, 1)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError

#: default width of the band around M = 1 treated as transonic
TRANSONIC_TOL = 1e-9


class Regime(str, enum.Enum):
    SUPERSONIC = "supersonic"
    TRANSONIC = "transonic"
    SUBSONIC = "subsonic"


def _require(cond, message):
    if not cond:
        raise DomainError(message)


@dataclass(frozen=True)
class PhysicalGas:
    R: float
    gamma: float
    mu: float
    kappa: float

    def __post_init__(self):
        _require(self.R > 0, "R must be positive")
        _require(self.gamma > 1, "gamma must exceed 1")
        _require(self.mu > 0, "mu must be positive")
        _require(self.kappa > 0, "kappa must be positive")

    @property
    def cv(self) -> float:
        return self.R / (self.gamma - 1.0)

    @property
    def cp(self) -> float:
        return self.gamma * self.cv

    @property
    def prandtl(self) -> float:
        return self.mu * self.cp / self.kappa


@dataclass(frozen=True)
class FarField:
    rho_plus: float
    u_plus: float
    theta_plus: float

    def __post_init__(self):
        _require(self.rho_plus > 0, "rho_plus must be positive")
        _require(self.u_plus < 0, "u_plus must be negative (outflow)")
        _require(self.theta_plus > 0, "theta_plus must be positive")


@dataclass(frozen=True)
class DimensionlessParams:
    """Constants governing both the stationary ODE and the evolution PDE.

    Only ``gamma``, ``mu_hat``, ``kappa_hat`` and ``mach`` are free; the rest
    are derived.  ``scale_L``/``scale_T`` record the length and time scales
    used for the reduction (1 when built directly from dimensionless input).
    """

    gamma: float
    mu_hat: float
    kappa_hat: float
    mach: float
    scale_L: float = 1.0
    scale_T: float = 1.0
    transonic_tol: float = field(default=TRANSONIC_TOL, compare=False)

    def __post_init__(self):
        _require(self.gamma > 1, "gamma must exceed 1")
        _require(self.mu_hat > 0, "mu_hat must be positive")
        _require(self.kappa_hat > 0, "kappa_hat must be positive")
        _require(self.mach > 0, "mach must be positive")

    @property
    def cv_hat(self) -> float:
        return 1.0 / (self.gamma * (self.gamma - 1.0))

    @property
    def prandtl(self) -> float:
        return self.mu_hat / self.kappa_hat / (self.mach**2 * (self.gamma - 1.0))

    @property
    def d(self) -> float:
        return self.mu_hat + self.kappa_hat * (self.gamma - 1.0) ** 2

    @property
    def gamma_star(self) -> float:
        g = self.gamma
        return 0.5 * (g * g - g + 2.0)

    @property
    def regime(self) -> Regime:
        if abs(self.mach - 1.0) <= self.transonic_tol:
            return Regime.TRANSONIC
        return Regime.SUPERSONIC if self.mach > 1.0 else Regime.SUBSONIC

    @property
    def effective_mach(self) -> float:
        """Mach number snapped to exactly 1 inside the transonic band."""
        return 1.0 if self.regime is Regime.TRANSONIC else self.mach

    def with_prandtl(self, prandtl: float) -> "DimensionlessParams":
        """Copy with ``kappa_hat`` tuned so that Pr equals ``prandtl``."""
        _require(prandtl > 0, "prandtl must be positive")
        kappa = self.mu_hat / (prandtl * self.mach**2 * (self.gamma - 1.0))
        return DimensionlessParams(self.gamma, self.mu_hat, kappa, self.mach,
                                   self.scale_L, self.scale_T, self.transonic_tol)

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "mu_hat": self.mu_hat,
            "kappa_hat": self.kappa_hat,
            "mach": self.mach,
            "cv_hat": self.cv_hat,
            "prandtl": self.prandtl,
            "d": self.d,
            "gamma_star": self.gamma_star,
            "regime": self.regime.value,
            "scale_L": self.scale_L,
            "scale_T": self.scale_T,
        }


def dimensionless(gamma: float, mu_hat: float = 1.0, kappa_hat: float = 1.0,
                  mach: float = 1.0, transonic_tol: float = TRANSONIC_TOL) -> DimensionlessParams:
    """Build parameters directly from ``(gamma, mu_hat, kappa_hat, mach)``."""
    return DimensionlessParams(gamma, mu_hat, kappa_hat, mach, transonic_tol=transonic_tol)


def mach_number(gas: PhysicalGas, far: FarField) -> float:
    if not far.theta_plus > 0:
        raise DomainError("theta_plus must be positive")
    return abs(far.u_plus) / math.sqrt(gas.R * gas.gamma * far.theta_plus)


def nondimensionalize(gas: PhysicalGas, far: FarField,
                      transonic_tol: float = TRANSONIC_TOL) -> DimensionlessParams:
    speed = abs(far.u_plus)
    mu_hat = gas.mu / (far.rho_plus * speed**2)
    kappa_hat = gas.kappa * far.theta_plus / (far.rho_plus * speed**4)
    return DimensionlessParams(
        gamma=gas.gamma,
        mu_hat=mu_hat,
        kappa_hat=kappa_hat,
        mach=mach_number(gas, far),
        scale_L=speed,
        scale_T=1.0,
        transonic_tol=transonic_tol,
    )


def boundary_strength(u_b: float, theta_b: float) -> float:
    _require(u_b < 0, "u_b must be negative (outflow)")
    _require(theta_b > 0, "theta_b must be positive")
    return math.hypot(u_b + 1.0, theta_b - 1.0)


@dataclass(frozen=True)
class BoundaryData:
    """Dimensionless wall values ``u(t, 0) = u_b``, ``theta(t, 0) = theta_b``."""

    u_b: float
    theta_b: float

    def __post_init__(self):
        _require(self.u_b < 0, "u_b must be negative (outflow)")
        _require(self.theta_b > 0, "theta_b must be positive")

    @property
    def delta(self) -> float:
        return boundary_strength(self.u_b, self.theta_b)

    @property
    def offset(self) -> tuple[float, float]:
        """``(u_b + 1, theta_b - 1)``, the offset from the far-field state."""
        return (self.u_b + 1.0, self.theta_b - 1.0)

    @classmethod
    def from_offset(cls, du: float, dtheta: float) -> "BoundaryData":
        return cls(-1.0 + du, 1.0 + dtheta)
