"""Explicit method-of-lines integration of the outflow problem on [0, x_max]."""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..errors import ConfigError, DomainError, PositivityError
from ..model import BoundaryData, DimensionlessParams
from . import kernels

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 10.0
BLOWUP_FLOOR = 1e-3


class Integrator(str, enum.Enum):
    RK2 = "RK2"
    RK4 = "RK4"


class FarFieldBC(str, enum.Enum):
    DIRICHLET = "Dirichlet"
    EXTRAPOLATION = "Extrapolation"


@dataclass(frozen=True)
class Grid:
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise DomainError("grid needs n >= 16")
        if not self.x_max > 0:
            raise DomainError("x_max must be positive")

    @property
    def dx(self) -> float:
        return self.x_max / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n)


@dataclass(frozen=True)
class SchemeConfig:
    """Discretization knobs.

    ``balanced`` subtracts the discrete rate of the reference profile from
    every evaluation, so the sampled stationary solution is an exact
    fixed point and the perturbation is evolved without truncation drift.
    """

    cfl: float = 0.4
    diff_safety: float = 0.4
    integrator: Integrator = Integrator.RK2
    farfield_bc: FarFieldBC = FarFieldBC.DIRICHLET
    balanced: bool = False

    def __post_init__(self):
        object.__setattr__(self, "integrator", Integrator(self.integrator))
        object.__setattr__(self, "farfield_bc", FarFieldBC(self.farfield_bc))
        if not 0 < self.cfl <= 0.9:
            raise ConfigError("cfl must lie in (0, 0.9]")
        if not 0 < self.diff_safety <= 0.5:
            raise ConfigError("diff_safety must lie in (0, 0.5]")


@dataclass
class EvolutionState:
    t: float
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    grid: Grid

    def copy(self) -> "EvolutionState":
        return EvolutionState(self.t, self.rho.copy(), self.u.copy(), self.theta.copy(), self.grid)

    def stack(self) -> np.ndarray:
        return np.vstack([self.rho, self.u, self.theta])

    def check(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.u))
                and np.all(np.isfinite(self.theta))):
            raise PositivityError("non-finite field values", self)
        if np.any(self.rho <= 0) or np.any(self.theta <= 0):
            raise PositivityError("density or temperature lost positivity", self)
        if np.any(self.u >= 0):
            raise PositivityError("velocity is no longer negative (outflow lost)", self)


# --- perturbations ---------------------------------------------------------

@dataclass(frozen=True)
class AlgebraicTail:
    exponent: float


@dataclass(frozen=True)
class GaussianBump:
    center: float
    width: float


@dataclass(frozen=True)
class Compact:
    cutoff: float


@dataclass(frozen=True)
class PerturbationSpec:
    """Initial perturbation ``A * shape(x)`` added to selected fields.

    Perturbations of u and theta are multiplied by ``1 - exp(-x^2)`` so that
    they vanish at the wall; rho is left untapered.
    """

    amplitude: float
    shape: AlgebraicTail | GaussianBump | Compact
    fields_mask: tuple = ("rho", "u", "theta")

    def __post_init__(self):
        bad = set(self.fields_mask) - {"rho", "u", "theta"}
        if bad:
            raise ConfigError(f"unknown perturbation fields: {sorted(bad)}")

    def profile(self, x: np.ndarray) -> np.ndarray:
        s = self.shape
        if isinstance(s, AlgebraicTail):
            return (1.0 + x) ** (-s.exponent)
        if isinstance(s, GaussianBump):
            return np.exp(-((x - s.center) / s.width) ** 2)
        if isinstance(s, Compact):
            return np.where(x < s.cutoff, np.sin(np.pi * x / s.cutoff) ** 2, 0.0)
        raise ConfigError(f"unknown perturbation shape {s!r}")

    def fields(self, x: np.ndarray) -> dict:
        base = self.amplitude * self.profile(x)
        taper = 1.0 - np.exp(-x * x)
        out = {}
        for name in ("rho", "u", "theta"):
            if name not in self.fields_mask:
                out[name] = np.zeros_like(x)
            elif name == "rho":
                out[name] = base.copy()
            else:
                out[name] = base * taper
        return out


def build_initial(profile, pert: PerturbationSpec | None, grid: Grid | None = None) -> EvolutionState:
    """Profile plus perturbation; raises on positivity or wall incompatibility."""
    x = profile.x
    if grid is None:
        grid = Grid(float(x[-1]), x.size)
    elif grid.n != x.size or not np.allclose(grid.x, x, rtol=0, atol=1e-12 * grid.x_max):
        raise DomainError("profile grid differs from evolution grid; resample the profile first")
    rho, u, th = profile.rho.copy(), profile.u.copy(), profile.theta.copy()
    if pert is not None and pert.amplitude != 0.0:
        f = pert.fields(x)
        if abs(f["u"][0]) > 0 or abs(f["theta"][0]) > 0:
            raise DomainError("perturbation of u or theta must vanish at x = 0")
        rho += f["rho"]
        u += f["u"]
        th += f["theta"]
    state = EvolutionState(0.0, rho, u, th, grid)
    try:
        state.check()
    except PositivityError as exc:
        raise PositivityError(f"initial state invalid: {exc}; reduce the amplitude", state) from exc
    return state


# --- semi-discrete operator ------------------------------------------------

def _consts(params: DimensionlessParams):
    return (params.gamma, params.mu_hat, params.kappa_hat, params.mach**2, params.cv_hat)


def pde_rhs(state: EvolutionState, params: DimensionlessParams, profileless: bool = True,
            reference: np.ndarray | None = None, numerics: str = "auto") -> np.ndarray:
    """Discrete time derivative as a (3, n) array (rho, u, theta rows).

    With ``profileless=False`` the rate of ``reference`` (a (3, n) profile
    rate) is subtracted.
    """
    if np.any(state.rho <= 0) or np.any(state.theta <= 0):
        raise PositivityError("positivity breach during rate evaluation", state)
    out = np.zeros((3, state.rho.size))
    fn = {"auto": kernels.rhs, "numpy": kernels.rhs_numpy,
          "numba": kernels.rhs_numba or kernels.rhs_numpy}[numerics]
    fn(state.rho, state.u, state.theta, state.grid.dx, *_consts(params), out[0], out[1], out[2])
    if not profileless:
        if reference is None:
            raise ValueError("reference rate required when profileless=False")
        out -= reference
    return out


def reference_rate(profile, grid: Grid, params: DimensionlessParams) -> np.ndarray:
    ref = EvolutionState(0.0, profile.rho, profile.u, profile.theta, grid)
    return pde_rhs(ref, params)


def apply_boundary(state: EvolutionState, bd: BoundaryData, config: SchemeConfig,
                   far_values: tuple | None = None) -> EvolutionState:
    """Impose u, theta at the wall and the far-field condition, in place."""
    state.u[0] = bd.u_b
    state.theta[0] = bd.theta_b
    if config.farfield_bc is FarFieldBC.EXTRAPOLATION:
        state.rho[-1] = state.rho[-2]
        state.u[-1] = state.u[-2]
        state.theta[-1] = state.theta[-2]
    else:
        r, u, th = far_values if far_values is not None else (1.0, -1.0, 1.0)
        state.rho[-1], state.u[-1], state.theta[-1] = r, u, th
    return state


def stable_dt(state: EvolutionState, grid: Grid, params: DimensionlessParams,
              config: SchemeConfig) -> float:
    rho, u, th = state.rho, state.u, state.theta
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u)) and np.all(np.isfinite(th))):
        raise PositivityError("cannot size a time step on non-finite fields", state)
    if np.any(rho <= 0) or np.any(th <= 0):
        raise PositivityError("cannot size a time step on non-positive fields", state)
    m = params.mach
    s_max = float(np.max(np.abs(u) + np.sqrt(th) / m))
    nu_max = float(np.max(np.maximum(params.mu_hat / rho, params.kappa_hat * m * m / (params.cv_hat * rho))))
    dx = grid.dx
    return min(config.cfl * dx / s_max, config.diff_safety * dx * dx / (2.0 * nu_max))


def _advance(state, dt, nsteps, params, config, reference, numerics="auto"):
    fn = {"auto": kernels.advance, "numpy": kernels.advance_numpy,
          "numba": kernels.advance_numba or kernels.advance_numpy}[numerics]
    ref = reference if reference is not None else np.zeros((3, state.rho.size))
    order = 2 if config.integrator is Integrator.RK2 else 4
    far = kernels.FAR_EXTRAPOLATE if config.farfield_bc is FarFieldBC.EXTRAPOLATION else kernels.FAR_DIRICHLET
    status, done = fn(state.rho, state.u, state.theta, ref, float(dt), int(nsteps), order, far,
                      state.grid.dx, *_consts(params))
    return status, done


def step(state: EvolutionState, dt: float, params: DimensionlessParams, bd: BoundaryData,
         config: SchemeConfig, reference: np.ndarray | None = None,
         numerics: str = "auto") -> EvolutionState:
    """One explicit step; returns a new state."""
    new = state.copy()
    apply_boundary(new, bd, config, far_values=(new.rho[-1], new.u[-1], new.theta[-1]))
    status, _ = _advance(new, dt, 1, params, config, reference, numerics)
    new.t = state.t + dt
    if status:
        raise PositivityError(f"positivity lost at t = {new.t:.6g}", new)
    return new


@dataclass
class EvolutionResult:
    final: EvolutionState
    times: list
    status: str = "ok"
    message: str = ""
    steps: int = 0
    wall_clock: float = 0.0
    dt: list = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.status == "ok"


def evolve(state: EvolutionState, t_final: float, sample_dt: float, params: DimensionlessParams,
           bd: BoundaryData, config: SchemeConfig, profile=None,
           sink: Callable[[EvolutionState], None] | None = None,
           numerics: str = "auto", progress_every: float = 30.0) -> EvolutionResult:
    """Integrate to ``t_final``, calling ``sink`` at t = 0 and every ``sample_dt``.

    Within a sample interval the step is uniform: the interval is divided
    into the fewest steps not exceeding :func:`stable_dt`.  The run stops
    early (``status`` "positivity" or "blowup") with the partial series kept;
    blow-up means ``sup|state - profile|`` exceeding 10 times
    ``max(sup|Phi_0|, 1e-3)``.
    """
    if sample_dt <= 0 or t_final < 0:
        raise ConfigError("sample_dt must be positive and t_final non-negative")
    grid = state.grid
    cur = state.copy()
    reference = None
    base = None
    if profile is not None:
        base = np.vstack([profile.rho, profile.u, profile.theta])
        if config.balanced:
            reference = reference_rate(profile, grid, params)
    far = (cur.rho[-1], cur.u[-1], cur.theta[-1]) if profile is None else \
        (profile.rho[-1], profile.u[-1], profile.theta[-1])
    apply_boundary(cur, bd, config, far_values=far)
    threshold = None
    if base is not None:
        threshold = BLOWUP_FACTOR * max(float(np.max(np.abs(cur.stack() - base))), BLOWUP_FLOOR)
    if sink:
        sink(cur.copy())
    n_samples = int(math.floor(t_final / sample_dt + 1e-9))
    edges = [k * sample_dt for k in range(1, n_samples + 1)]
    if not edges or edges[-1] < t_final * (1 - 1e-12):
        edges.append(t_final)
    times = [0.0]
    result = EvolutionResult(cur, times)
    t0 = time.perf_counter()
    last_report = t0
    steps = 0
    for t_next in edges:
        interval = t_next - cur.t
        if interval <= 0:
            continue
        dt_max = stable_dt(cur, grid, params, config)
        nsub = max(1, int(math.ceil(interval / dt_max - 1e-12)))
        dt = interval / nsub
        status, done = _advance(cur, dt, nsub, params, config, reference, numerics)
        steps += done
        if status:
            cur.t += done * dt
            result.status, result.message = "positivity", f"positivity lost at t = {cur.t:.6g}"
            log.error(result.message)
            break
        cur.t = t_next
        result.dt.append(dt)
        times.append(cur.t)
        if sink:
            sink(cur.copy())
        if threshold is not None:
            dev = float(np.max(np.abs(cur.stack() - base)))
            if not math.isfinite(dev) or dev > threshold:
                result.status = "blowup"
                result.message = f"perturbation {dev:.3e} exceeded {threshold:.3e} at t = {cur.t:.6g}"
                log.error(result.message)
                break
        now = time.perf_counter()
        if now - last_report > progress_every:
            log.info("t = %.4g / %.4g (%d steps)", cur.t, t_final, steps)
            last_report = now
    result.final = cur
    result.steps = steps
    result.wall_clock = time.perf_counter() - t0
    return result


# --- conservation bookkeeping ----------------------------------------------

def _trapz(y, dx):
    return float(dx * (np.sum(y) - 0.5 * (y[0] + y[-1])))


@dataclass(frozen=True)
class FluxReport:
    t: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray

    @property
    def max_mass(self) -> float:
        return float(np.max(self.mass)) if self.mass.size else 0.0

    @property
    def max_momentum(self) -> float:
        return float(np.max(self.momentum)) if self.momentum.size else 0.0


def mass_residual(state: EvolutionState, params: DimensionlessParams) -> float:
    """``|int rho_t dx - (rho u)(0) + (rho u)(L)|`` with ``rho_t`` from the scheme."""
    r = pde_rhs(state, params)
    dx = state.grid.dx
    flux_in = state.rho[0] * state.u[0] - state.rho[-1] * state.u[-1]
    return abs(_trapz(r[0], dx) - flux_in)


def momentum_residual(state: EvolutionState, params: DimensionlessParams) -> float:
    """Momentum analogue, boundary flux ``rho u^2 + p - mu u_x`` evaluated one-sidedly."""
    r = pde_rhs(state, params)
    dx = state.grid.dx
    rho, u, th = state.rho, state.u, state.theta
    m2g = params.mach**2 * params.gamma
    mt = r[0] * u + rho * r[1]
    ux0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx)
    uxL = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dx)
    flux0 = rho[0] * u[0] ** 2 + rho[0] * th[0] / m2g - params.mu_hat * ux0
    fluxL = rho[-1] * u[-1] ** 2 + rho[-1] * th[-1] / m2g - params.mu_hat * uxL
    # interior time derivative is zero at the wall nodes by construction
    return abs(_trapz(mt, dx) - (flux0 - fluxL))


def flux_balance(states, params: DimensionlessParams) -> FluxReport:
    """Per-snapshot mass and momentum balance residuals."""
    states = list(states)
    t = np.array([s.t for s in states])
    mass = np.array([mass_residual(s, params) for s in states])
    mom = np.array([momentum_residual(s, params) for s in states])
    return FluxReport(t, mass, mom)


def resample_profile(profile, grid: Grid):
    """Linear interpolation of a profile onto ``grid`` (flags the copy)."""
    x = grid.x
    cols = {k: np.interp(x, profile.x, getattr(profile, k))
            for k in ("rho", "u", "theta", "u_x", "theta_x")}
    cols["rho"] = -1.0 / cols["u"]
    return replace(profile, x=x, notes=tuple(profile.notes) + ("resampled",), **cols)
