"""Center and stable manifolds of the stationary equilibrium.

Closed-form Taylor coefficients (transonic case) live next to two numeric
constructions that serve as independent checks:

* the center manifold ``Theta = h_c(U)`` from a Gauss-Newton collocation
  solve of the invariance equation ``lambda2 h + g(U, h) = h' f(U, h)``;
* the stable manifold ``U = h_s(Theta)`` traced by integrating the ODE
  backward in ``x`` from tiny offsets along ``r2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp

from ..errors import ConvergenceError, IntegrationError, RegimeError
from ..model import DimensionlessParams, Regime
from .equilibrium import Equilibrium, eigen_analysis, nonlinear_terms, vector_field

# tolerances for manifold tracing; tighter than profile integration because
# the curvature signal at radius 0.05 is O(1e-5)
MANIFOLD_RTOL = 1e-12
MANIFOLD_ATOL = 1e-15
SEED_OFFSET = 1e-9


@dataclass(frozen=True)
class ManifoldExpansion:
    c2: float
    c3: float | None
    s2: float
    s3: float | None
    gamma_star: float
    prandtl: float
    htc_coeffs: tuple
    hts_coeffs: tuple

    def as_dict(self) -> dict:
        return {
            "c2": self.c2, "c3": self.c3, "s2": self.s2, "s3": self.s3,
            "gamma_star": self.gamma_star, "prandtl": self.prandtl,
            "htc_coeffs": list(self.htc_coeffs), "hts_coeffs": list(self.hts_coeffs),
        }


def _require_transonic(params: DimensionlessParams, what: str):
    if params.regime is not Regime.TRANSONIC:
        raise RegimeError(f"{what} requires M = 1 (got M = {params.mach:g})")


def manifold_coefficients(params: DimensionlessParams, degenerate_tol: float = 1e-9) -> ManifoldExpansion:
    """Taylor coefficients of h_c, h_s and of their images in ``(u, theta)``.

    ``c3`` (``s3``) is filled only when Pr = 2 (Pr = gamma*) within
    ``degenerate_tol``; elsewhere the quadratic term already fixes the shape.
    The original-coordinate tuples are ``(1, linear, quadratic, cubic)`` with
    the cubic entry ``None`` off the degenerate case.
    """
    _require_transonic(params, "manifold_coefficients")
    g, mu, ka, d = params.gamma, params.mu_hat, params.kappa_hat, params.d
    pr, gs = params.prandtl, params.gamma_star

    c2 = g * (g - 1) ** 2 * ka * (pr - 2.0) / (2.0 * d * d)
    s2 = -(g - 1) ** 3 * mu * ka**3 * (pr - gs) / (2.0 * d * d)
    at_pr2 = abs(pr - 2.0) <= degenerate_tol
    at_gs = abs(pr - gs) <= degenerate_tol
    c3 = g * (g - 1) ** 2 * ka / (d * d) if at_pr2 else None
    s3 = g * (g - 1) ** 5 * mu * ka**4 / (6.0 * d * d) if at_gs else None

    denom = pr + g - 1.0
    htc = (1.0, g - 1.0, g * (g - 1.0) * (pr - 2.0) / (2.0 * denom),
           -g * (g - 1.0) / denom if at_pr2 else None)
    hts = (1.0, -pr, pr * (pr - gs) / (2.0 * denom),
           g * (g - 1.0) * pr / (6.0 * denom) if at_gs else None)
    return ManifoldExpansion(c2, c3, s2, s3, gs, pr, htc, hts)


def diagonal_nonlinear(U, Theta, eq: Equilibrium, params: DimensionlessParams):
    """Nonlinear terms ``(f, g)`` in eigen-coordinates."""
    ubar = eq.P[0, 0] * U + eq.P[0, 1] * Theta
    tbar = eq.P[1, 0] * U + eq.P[1, 1] * Theta
    fb, gb = nonlinear_terms(ubar, tbar, params)
    f = eq.P_inv[0, 0] * fb + eq.P_inv[0, 1] * gb
    g = eq.P_inv[1, 0] * fb + eq.P_inv[1, 1] * gb
    return f, g


@dataclass(frozen=True)
class CenterManifold:
    """Sampled center manifold ``Theta = h(U)`` on ``[-radius, radius]``."""

    radius: float
    coef: np.ndarray
    U: np.ndarray
    h: np.ndarray
    residual: float
    iterations: int

    @property
    def series(self) -> Polynomial:
        return Polynomial(self.coef / self.radius ** np.arange(self.coef.size))

    def __call__(self, U):
        return self.series(U)

    def derivative(self, U):
        return self.series.deriv()(U)

    def taylor(self, degree: int = 4) -> np.ndarray:
        """Power-series coefficients about ``U = 0``."""
        out = np.zeros(degree + 1)
        c = self.series.coef
        n = min(degree + 1, c.size)
        out[:n] = c[:n]
        return out


def center_manifold_numeric(params: DimensionlessParams, radius: float = 0.05,
                            order: int = 12, tol: float = 1e-15) -> CenterManifold:
    """Collocation solve of the invariance equation.

    ``h`` is a polynomial ``sum_{k=2..order} a_k (U/radius)**k``, which builds
    in ``h(0) = h'(0) = 0``; the coefficients minimize the invariance residual
    ``lambda2 h + g(U, h) - h' f(U, h)`` at Chebyshev points by Gauss-Newton.
    """
    _require_transonic(params, "center_manifold_numeric")
    if not 0 < radius <= 0.2:
        raise ValueError("radius must lie in (0, 0.2]")
    if order < 3:
        raise ValueError("order must be at least 3")
    eq = eigen_analysis(params)
    lam2 = eq.lambda2
    m = 3 * order
    t = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    U = radius * t
    k = np.arange(2, order + 1)
    basis = t[:, None] ** k
    dbasis = k * t[:, None] ** (k - 1) / radius

    def residual(a):
        h = basis @ a
        f, g = diagonal_nonlinear(U, h, eq, params)
        return (lam2 * h + g - (dbasis @ a) * f) / radius**2

    def jac(a):
        h = basis @ a
        dh = dbasis @ a
        eps = 1e-7 * radius**2
        f0, g0 = diagonal_nonlinear(U, h, eq, params)
        f1, g1 = diagonal_nonlinear(U, h + eps, eq, params)
        fh, gh = (f1 - f0) / eps, (g1 - g0) / eps
        return ((lam2 + gh - dh * fh)[:, None] * basis - f0[:, None] * dbasis) / radius**2

    a = np.zeros(k.size)
    for it in range(1, 60):
        r = residual(a)
        step = np.linalg.lstsq(jac(a), -r, rcond=None)[0]
        a = a + step
        if np.max(np.abs(step)) <= tol:
            break
    else:
        raise ConvergenceError("center manifold collocation did not converge")

    coef = np.concatenate([[0.0, 0.0], a])
    Us = np.linspace(-radius, radius, 401)
    cm = CenterManifold(radius, coef, Us, np.zeros(0), 0.0, it)
    hv = cm(Us)
    f, g = diagonal_nonlinear(Us, hv, eq, params)
    res = float(np.max(np.abs(lam2 * hv + g - cm.derivative(Us) * f)))
    return CenterManifold(radius, coef, Us, hv, res, it)


def fit_taylor(x: np.ndarray, y: np.ndarray, degree: int = 8) -> np.ndarray:
    """Least-squares power-series coefficients of ``y(x)`` about 0."""
    scale = float(np.max(np.abs(x)))
    p = Polynomial.fit(x / scale, y, degree, domain=[-1, 1], window=[-1, 1])
    return p.coef / scale ** np.arange(p.coef.size)


@dataclass(frozen=True)
class StableCurve:
    """Samples of the stable manifold, sorted by ``Theta``."""

    Theta: np.ndarray
    U: np.ndarray
    ubar: np.ndarray
    tbar: np.ndarray
    radius: float

    def taylor(self, degree: int = 8) -> np.ndarray:
        return fit_taylor(self.Theta, self.U, degree)


def _trace_branch(params, eq, sign, theta_stop, t_eval_theta=None, max_s=400.0):
    """Integrate backward from ``sign * SEED_OFFSET * r2`` until |Theta| hits ``theta_stop``."""
    F = vector_field(params)
    r2 = eq.r2 / np.linalg.norm(eq.r2)
    y0 = sign * SEED_OFFSET * r2
    pinv_row = eq.P_inv[1]

    def back(s, y):
        return -F(s, y)

    def reached(s, y):
        return abs(pinv_row @ y) - theta_stop

    reached.terminal = True
    sol = solve_ivp(back, (0.0, max_s), y0, method="RK45", rtol=MANIFOLD_RTOL,
                    atol=MANIFOLD_ATOL, events=reached, dense_output=True)
    if sol.status < 0 or not sol.t_events[0].size:
        raise IntegrationError(f"stable manifold trace failed: {sol.message}")
    return sol, float(sol.t_events[0][0])


def stable_manifold_numeric(params: DimensionlessParams, radius: float = 0.05,
                            n_samples: int = 201) -> StableCurve:
    """Stable manifold through the equilibrium, both branches, for |Theta| <= radius.

    Points are produced by backward integration, so each lies on a trajectory
    that reaches the equilibrium as x -> infinity.
    """
    if params.regime is Regime.SUPERSONIC:
        raise RegimeError("stable manifold is two-dimensional for M > 1; nothing to trace")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if radius > 0.3:
        raise ValueError("radius leaves the small-data neighborhood")
    eq = eigen_analysis(params)
    parts = []
    for sign in (-1.0, 1.0):
        sol, s_end = _trace_branch(params, eq, sign, radius)
        s = np.linspace(0.0, s_end, n_samples)
        y = sol.sol(s)
        parts.append(y)
    y = np.hstack(parts)
    U, Theta = eq.P_inv @ y
    order = np.argsort(Theta)
    return StableCurve(Theta[order], U[order], y[0][order], y[1][order], radius)


def stable_manifold_U(params: DimensionlessParams, theta: float,
                      eq: Equilibrium | None = None) -> float:
    """Evaluate ``h_s(theta)`` by backward integration to ``Theta = theta``."""
    if eq is None:
        eq = eigen_analysis(params)
    if abs(theta) < 10.0 * SEED_OFFSET:
        # below the seed scale the curve is indistinguishable from its tangent
        return 0.0
    sign = np.sign(theta) * np.sign(eq.P_inv[1] @ eq.r2)
    sol, s_end = _trace_branch(params, eq, sign, abs(theta))
    U, _ = eq.P_inv @ sol.sol(s_end)
    return float(U)
