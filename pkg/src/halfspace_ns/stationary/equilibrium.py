"""Linear structure of the stationary ODE at the far-field equilibrium.

The stationary problem reduces to an autonomous system for the offsets
``(ubar, tbar) = (u + 1, theta - 1)``::

    d/dx (ubar, tbar) = J (ubar, tbar) + (fbar, gbar)

whose equilibrium ``(0, 0)`` is a stable node (M > 1), a saddle-node with
a one-dimensional center direction (M = 1) or a saddle (M < 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularityError
from ..model import DimensionlessParams, Regime

#: |ubar - 1| below which the vector field is treated as singular
SINGULAR_GAP = 1e-8


def jacobian(params: DimensionlessParams) -> np.ndarray:
    g, mu, ka = params.gamma, params.mu_hat, params.kappa_hat
    m2 = params.effective_mach**2
    return np.array([
        [(1.0 / (m2 * g) - 1.0) / mu, 1.0 / (mu * m2 * g)],
        [1.0 / (ka * m2 * g), -params.cv_hat / (ka * m2)],
    ])


def auxiliary_constants(params: DimensionlessParams) -> tuple[float, float, float]:
    """``(a, b, c)`` with ``Tr J = -(a + b + c)`` and ``det J = b c``."""
    g, mu, ka = params.gamma, params.mu_hat, params.kappa_hat
    m2 = params.effective_mach**2
    a = (g - 1.0) / (mu * m2 * g)
    b = (m2 - 1.0) / (mu * m2)
    c = params.cv_hat / (ka * m2)
    return a, b, c


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    first = v[np.flatnonzero(np.abs(v) > 1e-300)[0]]
    return v if first > 0 else -v


@dataclass(frozen=True)
class Equilibrium:
    J: np.ndarray
    lambda1: float
    lambda2: float
    r1: np.ndarray
    r2: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    regime: Regime
    a: float
    b: float
    c: float

    def to_diagonal(self, ubar, tbar):
        """Map offsets ``(ubar, tbar)`` to eigen-coordinates ``(U, Theta)``."""
        y = self.P_inv @ np.vstack([np.atleast_1d(ubar), np.atleast_1d(tbar)])
        return y[0], y[1]

    def from_diagonal(self, U, Theta):
        y = self.P @ np.vstack([np.atleast_1d(U), np.atleast_1d(Theta)])
        return y[0], y[1]

    def as_dict(self) -> dict:
        return {
            "J": self.J.tolist(),
            "trace": float(np.trace(self.J)),
            "det": float(np.linalg.det(self.J)),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "r1": self.r1.tolist(),
            "r2": self.r2.tolist(),
            "P": self.P.tolist(),
            "det_P": float(np.linalg.det(self.P)),
            "regime": self.regime.value,
            "a": self.a,
            "b": self.b,
            "c": self.c,
        }


def eigen_analysis(params: DimensionlessParams) -> Equilibrium:
    """Eigenvalues, eigenvectors and diagonalizer of ``J``.

    Eigenvectors are unit length with first nonzero component positive,
    except in the transonic case where the closed-form vectors
    ``r1 = (-1, 1 - gamma)`` and ``r2 = (kappa (1 - gamma), mu)`` are kept
    unscaled so that ``det P = -d``.
    """
    J = jacobian(params)
    regime = params.regime
    a, b, c = auxiliary_constants(params)
    w, v = np.linalg.eig(J)
    if np.iscomplexobj(w):
        # J always has real spectrum; imaginary parts are rounding noise
        w, v = w.real, v.real
    order = np.argsort(w)[::-1]
    lam1, lam2 = float(w[order[0]]), float(w[order[1]])

    if regime is Regime.TRANSONIC:
        g, mu, ka = params.gamma, params.mu_hat, params.kappa_hat
        r1 = np.array([-1.0, 1.0 - g])
        r2 = np.array([ka * (1.0 - g), mu])
        if abs(lam1) <= 1e-12 * np.abs(J).max():
            lam1 = 0.0
    else:
        r1 = _normalize(v[:, order[0]])
        r2 = _normalize(v[:, order[1]])
    P = np.column_stack([r1, r2])
    return Equilibrium(J, lam1, lam2, r1, r2, P, np.linalg.inv(P), regime, a, b, c)


def nonlinear_terms(ubar, tbar, params: DimensionlessParams):
    """``(fbar, gbar)``; works elementwise on arrays."""
    m2 = params.effective_mach**2
    fbar = -ubar * (ubar + tbar) / (params.mu_hat * m2 * params.gamma * (ubar - 1.0))
    gbar = ubar * ubar / (2.0 * params.kappa_hat)
    return fbar, gbar


def ode_rhs(ubar, tbar, params: DimensionlessParams, J: np.ndarray | None = None):
    """Right side of the stationary system at offset ``(ubar, tbar)``.

    Raises :class:`SingularityError` near ``ubar = 1`` (velocity zero).
    """
    if np.any(np.abs(np.asarray(ubar) - 1.0) < SINGULAR_GAP):
        raise SingularityError("stationary vector field is singular at u = 0")
    if J is None:
        J = jacobian(params)
    fbar, gbar = nonlinear_terms(ubar, tbar, params)
    du = J[0, 0] * ubar + J[0, 1] * tbar + fbar
    dt = J[1, 0] * ubar + J[1, 1] * tbar + gbar
    return du, dt


def vector_field(params: DimensionlessParams):
    """Closure ``F(x, y)`` for :func:`scipy.integrate.solve_ivp`."""
    J = jacobian(params)

    def F(_x, y):
        du, dt = ode_rhs(y[0], y[1], params, J)
        return np.array([du, dt])

    return F
