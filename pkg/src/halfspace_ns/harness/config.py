"""Run configuration: loading, dotted overrides, validation and object construction.

A configuration is a JSON or YAML mapping with the blocks

    gas        {R, gamma, mu, kappa}                 physical route (with farfield)
    farfield   {rho_plus, u_plus, theta_plus}
    mach       {gamma, mu_hat, kappa_hat, mach, prandtl?}   dimensionless route
    boundary   {u_b, theta_b} or {delta, direction, angle?}
    grid       {x_max, n}
    stationary {eps0, manifold_tol}
    evolve     {t_final, sample_dt, cfl, diff_safety, integrator, farfield_bc, balanced,
                numerics, snapshot_every}
    perturbation {amplitude, shape, exponent, center, width, cutoff, fields}
    weights    {alpha, zeta?}
    rate       {norm, model, tolerance?}
    sweep      {command, axes: {dotted.key: [values]}}
    seed       integer

Either ``mach`` or ``gas`` + ``farfield`` fixes the parameters; when both
are present ``mach`` wins.  Boundary ``direction`` is one of ``angle``
(offset ``delta (cos a, sin a)``), ``center`` (transonic interior side,
along ``r1``), ``across`` (the mirror point ``-delta r1``) or ``stable``
(a point on the stable manifold).
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from ..errors import ConfigError, DomainError
from ..model import (BoundaryData, DimensionlessParams, FarField, PhysicalGas, Regime,
                     dimensionless, nondimensionalize)

DEFAULTS = {
    "mach": {"gamma": 5.0 / 3.0, "mu_hat": 1.0, "kappa_hat": 1.0, "mach": 1.0},
    "boundary": {"u_b": -1.0, "theta_b": 1.0},
    "grid": {"x_max": 100.0, "n": 2001},
    "stationary": {"eps0": 0.2, "manifold_tol": 1e-6},
    "evolve": {"t_final": 10.0, "sample_dt": 1.0, "cfl": 0.4, "diff_safety": 0.4,
               "integrator": "RK2", "farfield_bc": "Dirichlet", "balanced": True,
               "numerics": "auto", "snapshot_every": 0},
    "perturbation": {"amplitude": 0.0, "shape": "gaussian", "center": 5.0, "width": 1.0,
                     "fields": ["rho", "u", "theta"]},
    "weights": {"alpha": 2.0},
    "rate": {"norm": "sup_norm", "model": "algebraic"},
    "seed": 0,
}

ALPHA_TRANSONIC_MAX = 2.0 * (1.0 + math.sqrt(2.0))
KNOWN_BLOCKS = {"gas", "farfield", "mach", "boundary", "grid", "stationary", "evolve",
                "perturbation", "weights", "rate", "sweep", "seed"}


def load_config(path: str | Path | None) -> dict:
    """Read a JSON/YAML document; ``None`` gives an empty mapping."""
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text()
    try:
        data = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return data


def parse_value(text: str):
    """Scalar or list literal from a ``--set`` value (YAML flow syntax)."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value {text!r}: {exc}") from exc


def set_dotted(cfg: dict, key: str, value) -> dict:
    parts = key.split(".")
    if not all(parts):
        raise ConfigError(f"malformed key {key!r}")
    node = cfg
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"{key}: {part} is not a block")
        node = nxt
    node[parts[-1]] = value
    return cfg


def get_dotted(cfg: dict, key: str, default=None):
    node = cfg
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def apply_overrides(cfg: dict, overrides) -> dict:
    out = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, val = item.split("=", 1)
        set_dotted(out, key.strip(), parse_value(val.strip()))
    return out


def merged(cfg: dict) -> dict:
    """User config on top of the defaults (block-wise)."""
    unknown = set(cfg) - KNOWN_BLOCKS
    if unknown:
        raise ConfigError(f"unknown config block(s): {', '.join(sorted(unknown))}")
    out = copy.deepcopy(DEFAULTS)
    physical = "gas" in cfg or "farfield" in cfg
    if physical and "mach" not in cfg:
        del out["mach"]
    for k, v in cfg.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k].update(copy.deepcopy(v))
        else:
            out[k] = copy.deepcopy(v)
    return out


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def config_hash(cfg: dict, command: str = "") -> str:
    return hashlib.sha256((command + "|" + canonical_json(cfg)).encode()).hexdigest()


def _num(block: dict, key: str, name: str, cond=None, msg=None, integer=False):
    if key not in block:
        raise ConfigError(f"{name}.{key} is required")
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}.{key} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{name}.{key} must be an integer")
    if not math.isfinite(v):
        raise ConfigError(f"{name}.{key} must be finite")
    if cond is not None and not cond(v):
        raise ConfigError(msg or f"{name}.{key} out of range")
    return int(v) if integer else float(v)


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    params: DimensionlessParams
    boundary: BoundaryData
    defaulted_params: bool = False

    def block(self, name: str) -> dict:
        return self.raw.get(name, {})

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    @property
    def hash(self) -> str:
        return config_hash(self.raw)


def build_params(cfg: dict) -> DimensionlessParams:
    try:
        if "mach" in cfg:
            m = cfg["mach"]
            gamma = _num(m, "gamma", "mach", lambda v: v > 1, "gamma must exceed 1")
            mu = _num(m, "mu_hat", "mach", lambda v: v > 0, "mu_hat must be positive")
            ka = _num(m, "kappa_hat", "mach", lambda v: v > 0, "kappa_hat must be positive")
            mach = _num(m, "mach", "mach", lambda v: v > 0, "mach must be positive")
            tol = float(m.get("transonic_tol", 1e-9))
            p = dimensionless(gamma, mu, ka, mach, transonic_tol=tol)
            if m.get("prandtl") is not None:
                p = p.with_prandtl(_num(m, "prandtl", "mach", lambda v: v > 0, "prandtl must be positive"))
            return p
        g, f = cfg.get("gas"), cfg.get("farfield")
        if not isinstance(g, dict) or not isinstance(f, dict):
            raise ConfigError("physical route needs both gas and farfield blocks")
        gas = PhysicalGas(_num(g, "R", "gas"), _num(g, "gamma", "gas", lambda v: v > 1, "gamma must exceed 1"),
                          _num(g, "mu", "gas"), _num(g, "kappa", "gas"))
        far = FarField(_num(f, "rho_plus", "farfield"), _num(f, "u_plus", "farfield"),
                       _num(f, "theta_plus", "farfield"))
        return nondimensionalize(gas, far)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def build_boundary(cfg: dict, params: DimensionlessParams) -> BoundaryData:
    b = cfg.get("boundary", {})
    try:
        if "delta" not in b:
            return BoundaryData(_num(b, "u_b", "boundary"), _num(b, "theta_b", "boundary"))
        delta = _num(b, "delta", "boundary", lambda v: v >= 0, "boundary.delta must be non-negative")
        direction = b.get("direction", "angle")
        if delta == 0:
            return BoundaryData(-1.0, 1.0)
        if direction == "angle":
            a = float(b.get("angle", math.pi - 0.3))
            return BoundaryData.from_offset(delta * math.cos(a), delta * math.sin(a))
        from ..stationary.equilibrium import eigen_analysis
        from ..stationary.manifolds import stable_manifold_U
        eq = eigen_analysis(params)
        r1 = eq.r1 / np.linalg.norm(eq.r1)
        if direction in ("center", "across"):
            if params.regime is not Regime.TRANSONIC:
                raise ConfigError(f"boundary.direction={direction} needs a transonic configuration")
            s = 1.0 if direction == "center" else -1.0
            return BoundaryData.from_offset(*(s * delta * r1))
        if direction == "stable":
            if params.regime is Regime.SUPERSONIC:
                raise ConfigError("boundary.direction=stable needs M <= 1")
            side = float(b.get("side", 1.0))
            theta_hat = math.copysign(delta / np.linalg.norm(eq.P[:, 1]), side)
            U = stable_manifold_U(params, theta_hat, eq)
            return BoundaryData.from_offset(*(eq.P @ np.array([U, theta_hat])))
        raise ConfigError(f"boundary.direction must be angle, center, across or stable (got {direction!r})")
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def validate(cfg: dict) -> RunConfig:
    """Merge defaults, check ranges and build parameter objects."""
    raw = merged(cfg)
    params = build_params(raw)
    boundary = build_boundary(raw, params)
    g = raw["grid"]
    _num(g, "x_max", "grid", lambda v: v > 0, "grid.x_max must be positive")
    _num(g, "n", "grid", lambda v: v >= 16, "grid.n must be at least 16", integer=True)
    ev = raw["evolve"]
    _num(ev, "t_final", "evolve", lambda v: v >= 0, "evolve.t_final must be non-negative")
    _num(ev, "sample_dt", "evolve", lambda v: v > 0, "evolve.sample_dt must be positive")
    _num(ev, "cfl", "evolve", lambda v: 0 < v <= 0.9, "evolve.cfl must lie in (0, 0.9]")
    _num(ev, "diff_safety", "evolve", lambda v: 0 < v <= 0.5, "evolve.diff_safety must lie in (0, 0.5]")
    if ev["integrator"] not in ("RK2", "RK4"):
        raise ConfigError("evolve.integrator must be RK2 or RK4")
    if ev["farfield_bc"] not in ("Dirichlet", "Extrapolation"):
        raise ConfigError("evolve.farfield_bc must be Dirichlet or Extrapolation")
    if ev["numerics"] not in ("auto", "numpy", "numba"):
        raise ConfigError("evolve.numerics must be auto, numpy or numba")
    st = raw["stationary"]
    _num(st, "eps0", "stationary", lambda v: v > 0, "stationary.eps0 must be positive")
    _num(st, "manifold_tol", "stationary", lambda v: v > 0, "stationary.manifold_tol must be positive")
    pt = raw["perturbation"]
    _num(pt, "amplitude", "perturbation")
    if pt.get("shape") not in ("algebraic", "gaussian", "compact"):
        raise ConfigError("perturbation.shape must be algebraic, gaussian or compact")
    w = raw["weights"]
    _num(w, "alpha", "weights", lambda v: v >= 0, "weights.alpha must be non-negative")
    if not isinstance(raw.get("seed", 0), int) or isinstance(raw.get("seed"), bool):
        raise ConfigError("seed must be an integer")
    # flagged when gamma, mu_hat or kappa_hat come from DEFAULTS rather than the user
    user_mach = cfg.get("mach") or {}
    defaulted = "gas" not in cfg and not {"gamma", "mu_hat", "kappa_hat"} <= set(user_mach)
    return RunConfig(raw, params, boundary, defaulted)


def check_rate_hypotheses(rc: RunConfig):
    """Reject rate studies outside the hypotheses of the decay estimate."""
    alpha = float(rc.raw["weights"]["alpha"])
    if rc.params.regime is Regime.TRANSONIC and not 1.0 <= alpha < ALPHA_TRANSONIC_MAX:
        raise ConfigError(
            f"weights.alpha = {alpha:g} is outside [1, 2(1+sqrt 2)) = [1, {ALPHA_TRANSONIC_MAX:.6f}), "
            "the admissible weight range for the transonic decay rate")
    pt = rc.raw["perturbation"]
    if pt.get("shape") == "algebraic":
        r = _num(pt, "exponent", "perturbation")
        if not r > (alpha + 1.0) / 2.0:
            raise ConfigError(
                f"perturbation.exponent = {r:g} must exceed (alpha+1)/2 = {(alpha + 1) / 2:g} "
                "for the initial perturbation to lie in L^2_alpha")
