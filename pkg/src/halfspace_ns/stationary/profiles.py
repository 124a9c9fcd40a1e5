"""Boundary classification and stationary boundary-layer profiles."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from ..diagnostics.rates import RateFit, RateModel, fit_loglinear
from ..errors import (DomainError, DomainTooShort, IntegrationError, InsufficientData,
                      NoStationarySolution, RegimeError, ShootingError)
from ..model import BoundaryData, DimensionlessParams, Regime
from .equilibrium import Equilibrium, eigen_analysis, ode_rhs, vector_field
from .manifolds import (SEED_OFFSET, _trace_branch, center_manifold_numeric,
                        diagonal_nonlinear, stable_manifold_U)

log = logging.getLogger(__name__)

PROFILE_RTOL = 1e-10
PROFILE_ATOL = 1e-12
DEFAULT_EPS0 = 0.2
DEFAULT_MANIFOLD_TOL = 1e-6
EXP_FIT_BAND = (1e-9, 1e-3)
ALG_FIT_WINDOW = (2.0, 20.0)


class Existence(str, enum.Enum):
    INTERIOR = "InteriorExistence"
    ON_STABLE = "OnStableManifold"
    NONE = "NoStationarySolution"
    OUTSIDE = "OutsideSmallness"


@dataclass(frozen=True)
class Classification:
    verdict: Existence
    regime: Regime
    delta: float
    U_hat: float
    Theta_hat: float
    hs_value: float | None = None
    margin: float | None = None
    uncertain: bool = False

    @property
    def exists(self) -> bool:
        return self.verdict in (Existence.INTERIOR, Existence.ON_STABLE)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value, "regime": self.regime.value, "delta": self.delta,
            "U_hat": self.U_hat, "Theta_hat": self.Theta_hat, "hs_value": self.hs_value,
            "margin": self.margin, "uncertain": self.uncertain, "exists": self.exists,
        }


def classify_boundary(bd: BoundaryData, params: DimensionlessParams,
                      eps0: float = DEFAULT_EPS0,
                      manifold_tol: float = DEFAULT_MANIFOLD_TOL,
                      eq: Equilibrium | None = None) -> Classification:
    """Decide whether a stationary solution exists for the wall data ``bd``.

    In the transonic case the sign of ``U_hat - h_s(Theta_hat)`` picks the
    side of the stable manifold; points with ``|margin| <= manifold_tol``
    count as on the curve (the closed side).  Margins in
    ``(tol, 2 tol]`` carry ``uncertain=True``.
    """
    eq = eq or eigen_analysis(params)
    delta = bd.delta
    Uh, Th = (float(v) for v in eq.P_inv @ np.array(bd.offset))
    regime = params.regime
    if delta == 0.0:
        return Classification(Existence.ON_STABLE, regime, 0.0, 0.0, 0.0, 0.0, 0.0)
    if delta >= eps0:
        return Classification(Existence.OUTSIDE, regime, delta, Uh, Th)
    if regime is Regime.SUPERSONIC:
        return Classification(Existence.INTERIOR, regime, delta, Uh, Th)

    hs = stable_manifold_U(params, Th, eq)
    margin = Uh - hs
    dist = abs(margin)
    uncertain = manifold_tol < dist <= 2.0 * manifold_tol
    if dist <= manifold_tol:
        verdict = Existence.ON_STABLE
    elif regime is Regime.TRANSONIC:
        verdict = Existence.INTERIOR if margin > 0 else Existence.NONE
    else:
        verdict = Existence.NONE
    return Classification(verdict, regime, delta, Uh, Th, hs, margin, uncertain)


@dataclass(frozen=True)
class GridSpec:
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 2 or not self.x_max > 0:
            raise DomainError("grid needs n >= 2 and x_max > 0")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n)

    @property
    def dx(self) -> float:
        return self.x_max / (self.n - 1)


@dataclass(frozen=True)
class StationaryProfile:
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    u_x: np.ndarray
    theta_x: np.ndarray
    delta: float
    regime: Regime
    residual: float
    decay: RateFit | None
    boundary: BoundaryData
    params: DimensionlessParams
    classification: Classification | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def ubar(self) -> np.ndarray:
        return self.u + 1.0

    @property
    def tbar(self) -> np.ndarray:
        return self.theta - 1.0

    def columns(self) -> dict:
        return {"x": self.x, "rho": self.rho, "u": self.u, "theta": self.theta,
                "u_x": self.u_x, "theta_x": self.theta_x}

    def summary(self) -> dict:
        return {
            "delta": self.delta, "regime": self.regime.value, "residual": self.residual,
            "decay": self.decay.as_dict() if self.decay else None,
            "mass_flux_error": float(np.max(np.abs(self.rho * self.u + 1.0))),
            "boundary": {"u_b": self.boundary.u_b, "theta_b": self.boundary.theta_b},
            "boundary_mismatch": float(math.hypot(self.u[0] - self.boundary.u_b,
                                                  self.theta[0] - self.boundary.theta_b)),
            "classification": self.classification.as_dict() if self.classification else None,
            "notes": list(self.notes),
        }


def simpson_defect(x_nodes, y_nodes, y_mid, F_nodes, F_mid) -> float:
    """Largest per-unit-length defect of the integral form of ``y' = F(y)``.

    Compares ``y_{i+1} - y_i`` with Simpson's rule for ``int F`` over each
    cell, so an exact trajectory scores at quadrature-error level.
    """
    h = np.diff(x_nodes)
    integral = h / 6.0 * (F_nodes[:, :-1] + 4.0 * F_mid + F_nodes[:, 1:])
    return float(np.max(np.abs(np.diff(y_nodes, axis=1) - integral) / h))


def _tail_fit(x, ubar, tbar, regime, delta, algebraic: bool) -> RateFit | None:
    try:
        if algebraic:
            return fit_loglinear(delta * x, np.abs(ubar), RateModel.ALGEBRAIC, window=ALG_FIT_WINDOW)
        amp = np.hypot(ubar, tbar)
        lo, hi = EXP_FIT_BAND
        band = (amp >= lo) & (amp <= hi)
        keep = (x >= x[0] + 0.6 * (x[-1] - x[0])) & band
        if keep.sum() < 5:
            # long domains push the last 40% under the floor; the band alone
            # already excludes the near-wall transient
            keep = band
        if keep.sum() < 5:
            return None
        return fit_loglinear(x[keep], amp[keep], RateModel.EXPONENTIAL)
    except InsufficientData:
        return None


def _forward(params, y0, x_fine, rtol, atol):
    F = vector_field(params)
    sol = solve_ivp(F, (x_fine[0], x_fine[-1]), y0, method="RK45", t_eval=x_fine,
                    rtol=rtol, atol=atol)
    if sol.status < 0:
        raise IntegrationError(f"stationary integration failed: {sol.message}")
    return sol.y


def _subsonic_backward(params, eq, bd, x_fine, rtol, atol):
    """Profile along the stable manifold through the wall data.

    The branch is traced backward from ``SEED_OFFSET * r2``; the free
    parameter (arc position) is chosen to minimize the distance to
    ``(u_b + 1, theta_b - 1)``.  Beyond the seed the tail is the linear
    solution ``seed * r2 * exp(lambda2 (x - s0))``.
    """
    target = np.array(bd.offset)
    Th = float(eq.P_inv[1] @ target)
    sign = np.sign(Th) * np.sign(eq.P_inv[1] @ eq.r2)
    sol, s_end = _trace_branch(params, eq, sign, 1.25 * abs(Th))
    res = minimize_scalar(lambda s: float(np.sum((sol.sol(s) - target) ** 2)),
                          bounds=(0.0, s_end), method="bounded",
                          options={"xatol": 1e-12})
    s0 = float(res.x)
    miss = math.sqrt(res.fun)
    y = np.empty((2, x_fine.size))
    inner = x_fine <= s0
    y[:, inner] = sol.sol(s0 - x_fine[inner])
    seed = sign * SEED_OFFSET * eq.r2 / np.linalg.norm(eq.r2)
    y[:, ~inner] = seed[:, None] * np.exp(eq.lambda2 * (x_fine[~inner] - s0))
    return y, miss


def solve_stationary(bd: BoundaryData, params: DimensionlessParams, grid: GridSpec,
                     eps0: float = DEFAULT_EPS0, manifold_tol: float = DEFAULT_MANIFOLD_TOL,
                     rtol: float = PROFILE_RTOL, atol: float = PROFILE_ATOL) -> StationaryProfile:
    """Compute the stationary solution sampled on ``grid``.

    Supersonic and transonic profiles are integrated forward from the wall;
    subsonic ones come from backward tracing along the stable manifold.
    Raises :class:`NoStationarySolution` when ``bd`` is outside the
    existence region.
    """
    eq = eigen_analysis(params)
    cls = classify_boundary(bd, params, eps0, manifold_tol, eq)
    if not cls.exists:
        raise NoStationarySolution(
            f"no stationary solution for (u_b, theta_b) = ({bd.u_b}, {bd.theta_b}): {cls.verdict.value}",
            diagnostic=cls.as_dict())
    x = grid.x
    regime = params.regime
    delta = cls.delta
    notes = []
    if delta == 0.0:
        zeros = np.zeros_like(x)
        return StationaryProfile(x, np.ones_like(x), -np.ones_like(x), np.ones_like(x), zeros, zeros.copy(),
                                 0.0, regime, 0.0, None, bd, params, cls, ("constant",))

    x_fine = np.linspace(0.0, grid.x_max, 2 * grid.n - 1)
    if regime is Regime.SUBSONIC:
        y, miss = _subsonic_backward(params, eq, bd, x_fine, rtol, atol)
        if miss > 2.0 * manifold_tol:
            raise ShootingError(f"closest approach to wall data is {miss:.2e} > {2 * manifold_tol:.1e}")
        notes.append(f"shooting miss {miss:.3e}")
    else:
        y = _forward(params, np.array(bd.offset), x_fine, rtol, atol)
    if np.any(y[0] >= 1.0):
        raise NoStationarySolution("velocity changes sign along the trajectory", cls.as_dict())
    Fu, Ft = ode_rhs(y[0], y[1], params, eq.J)
    Fall = np.vstack([Fu, Ft])
    residual = simpson_defect(x_fine[::2], y[:, ::2], y[:, 1::2], Fall[:, ::2], Fall[:, 1::2])

    ubar, tbar = y[0, ::2], y[1, ::2]
    end_amp = math.hypot(ubar[-1], tbar[-1])
    if end_amp >= 0.5 * delta:
        raise DomainTooShort(f"tail amplitude {end_amp:.3e} at x_max has not settled (delta {delta:.3e})")
    if regime is Regime.TRANSONIC and cls.verdict is Existence.INTERIOR:
        if delta * grid.x_max < 20.0 - 1e-9:
            log.warning("transonic profile with delta * x_max = %.1f < 20", delta * grid.x_max)
            notes.append("short transonic domain")
        decay = _tail_fit(x, ubar, tbar, regime, delta, algebraic=True)
    else:
        decay = _tail_fit(x, ubar, tbar, regime, delta, algebraic=False)

    u = ubar - 1.0
    theta = tbar + 1.0
    if np.any(theta <= 0):
        raise NoStationarySolution("temperature becomes non-positive", cls.as_dict())
    return StationaryProfile(x, -1.0 / u, u, theta, Fu[::2], Ft[::2], delta, regime, residual,
                             decay, bd, params, cls, tuple(notes))


def profile_residual(profile: StationaryProfile) -> float:
    """Pointwise mismatch of stored derivatives against the vector field."""
    du, dt = ode_rhs(profile.ubar, profile.tbar, profile.params)
    return float(max(np.max(np.abs(du - profile.u_x)), np.max(np.abs(dt - profile.theta_x))))


# --- center flow -----------------------------------------------------------

@dataclass(frozen=True)
class CenterFlow:
    x: np.ndarray
    z: np.ndarray
    z0: float
    delta: float
    params: DimensionlessParams
    c_lower: float | None = None
    c_upper: float | None = None

    def envelope(self) -> np.ndarray:
        """``z (1 + delta x) / delta``; bounded above and below for a decaying flow."""
        return self.z * (1.0 + self.delta * self.x) / self.delta


def riccati_rate(params: DimensionlessParams) -> float:
    """Leading coefficient ``(gamma + 1) / (2 d)`` of ``z' = -k z^2``."""
    return (params.gamma + 1.0) / (2.0 * params.d)


def riccati_solution(z0: float, params: DimensionlessParams, x) -> np.ndarray:
    k = riccati_rate(params)
    return z0 / (1.0 + k * z0 * np.asarray(x))


def _center_rhs(params):
    eq = eigen_analysis(params)
    cache = {}

    def manifold(r):
        key = round(r, 6)
        if key not in cache:
            cache[key] = center_manifold_numeric(params, r)
        return cache[key]

    def rhs_factory(radius):
        cm = manifold(radius)

        def rhs(_x, z):
            f, _ = diagonal_nonlinear(z[0], cm(z[0]), eq, params)
            return [f]

        return rhs

    return rhs_factory


def _integrate_center(params, z_start, x_start, x_eval, rtol=1e-11, atol=1e-14):
    radius = float(min(0.2, max(0.05, 1.25 * abs(z_start))))
    rhs = _center_rhs(params)(radius)
    out = np.empty_like(x_eval)
    fwd = x_eval >= x_start
    for mask, end in ((fwd, x_eval.max()), (~fwd, x_eval.min())):
        if not mask.any():
            continue
        pts = x_eval[mask]
        if end == x_start:
            out[mask] = z_start
            continue
        order = np.argsort(pts) if end > x_start else np.argsort(pts)[::-1]
        sol = solve_ivp(rhs, (x_start, end), [z_start], method="RK45", t_eval=pts[order],
                        rtol=rtol, atol=atol)
        if sol.status < 0:
            raise IntegrationError(f"center flow integration failed: {sol.message}")
        vals = np.empty(pts.size)
        vals[order] = sol.y[0]
        out[mask] = vals
    return out


def solve_center_flow(z0: float, params: DimensionlessParams, x_max: float, n: int = 2001,
                      delta: float | None = None) -> CenterFlow:
    """Dynamics restricted to the center manifold, ``z' = f(z, h_c(z))``."""
    if params.regime is not Regime.TRANSONIC:
        raise RegimeError("center flow exists only for M = 1")
    if z0 < 0:
        raise NoStationarySolution("center-flow datum must be positive for a decaying solution",
                                   {"z0": z0})
    x = np.linspace(0.0, x_max, n)
    if z0 == 0.0:
        return CenterFlow(x, np.zeros_like(x), 0.0, delta or 0.0, params)
    z = _integrate_center(params, z0, 0.0, x)
    dl = delta if delta is not None else z0
    env = z * (1.0 + dl * x) / dl
    return CenterFlow(x, z, z0, dl, params, float(env.min()), float(env.max()))


def center_flow_for_profile(profile: StationaryProfile) -> CenterFlow:
    """Center-flow solution that the transonic profile shadows.

    Matched at the point where the stable transient has decayed by 1e-10,
    then integrated across the whole grid.
    """
    params = profile.params
    eq = eigen_analysis(params)
    U, _ = eq.P_inv @ np.vstack([profile.ubar, profile.tbar])
    x = profile.x
    x_match = min(math.log(1e10) / abs(eq.lambda2), 0.5 * x[-1])
    i = int(np.searchsorted(x, x_match))
    z = _integrate_center(params, float(U[i]), float(x[i]), x)
    env = z * (1.0 + profile.delta * x) / profile.delta
    return CenterFlow(x, z, float(z[0]), profile.delta, params, float(env.min()), float(env.max()))


@dataclass(frozen=True)
class DegenerateReport:
    window: tuple[float, float]
    ux_ratio_error: float | None
    thetax_ratio_error: float | None
    u_linear_coeff: float | None
    theta_linear_coeff: float | None
    rho_linear_coeff: float | None
    insufficient_signal: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def degenerate_structure(profile: StationaryProfile, flow: CenterFlow | None = None,
                         window: tuple[float, float] = ALG_FIT_WINDOW) -> DegenerateReport:
    """Compare a transonic profile with its center-flow leading order.

    Reported over ``delta * x`` in ``window``:

    * ``ux_ratio_error`` = max |u_x 2d / ((gamma+1) z^2) - 1|
    * ``thetax_ratio_error`` = max |theta_x / ((gamma-1) u_x) - 1|
    * ``*_linear_coeff`` = max |remainder| / z^2 of the linear relations
      u + 1 = -z, theta - 1 = (1 - gamma) z, rho - 1 = -z (bounded if they hold).
    """
    params = profile.params
    if params.regime is not Regime.TRANSONIC:
        raise RegimeError("degenerate structure applies to M = 1 profiles")
    empty = DegenerateReport(window, None, None, None, None, None, True)
    if profile.delta == 0.0:
        return empty
    if flow is None:
        flow = center_flow_for_profile(profile)
    dx_scaled = profile.delta * profile.x
    sel = (dx_scaled >= window[0]) & (dx_scaled <= window[1])
    if not sel.any():
        raise DomainTooShort(f"no samples with delta*x in {window}")
    z = flow.z[sel]
    if np.max(np.abs(z)) < 1e-8:
        return empty
    g, d = params.gamma, params.d
    ux, tx = profile.u_x[sel], profile.theta_x[sel]
    r_u = ux * 2.0 * d / ((g + 1.0) * z * z) - 1.0
    r_t = tx / ((g - 1.0) * ux) - 1.0
    z2 = z * z
    lin_u = np.max(np.abs(profile.ubar[sel] + z) / z2)
    lin_t = np.max(np.abs(profile.tbar[sel] - (1.0 - g) * z) / z2)
    lin_r = np.max(np.abs(profile.rho[sel] - 1.0 + z) / z2)
    return DegenerateReport(window, float(np.max(np.abs(r_u))), float(np.max(np.abs(r_t))),
                            float(lin_u), float(lin_t), float(lin_r), False)
