"""Subcommand implementations shared by the CLI and the sweep workers."""
from __future__ import annotations

import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..diagnostics.forms import quadratic_forms
from ..diagnostics.rates import RateModel, fit_rate
from ..diagnostics.series import SERIES_COLUMNS, SeriesRecorder
from ..errors import (ConfigError, ConvergenceError, DomainError, DomainTooShort, HalfspaceError,
                      InsufficientData, IntegrationError, NoStationarySolution, PositivityError,
                      RegimeError, ShootingError, SingularityError)
from ..evolution.scheme import (AlgebraicTail, Compact, GaussianBump, Grid, PerturbationSpec,
                                SchemeConfig, build_initial, evolve, flux_balance, stable_dt)
from ..model import Regime
from ..stationary.equilibrium import eigen_analysis
from ..stationary.manifolds import manifold_coefficients
from ..stationary.profiles import GridSpec, classify_boundary, solve_stationary
from . import io
from .config import RunConfig, canonical_json, config_hash, get_dotted, set_dotted, validate

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NONEXISTENCE = 3
EXIT_NUMERICAL = 4
EXIT_INCONCLUSIVE = 5

SLOW_WORK = 5e9  # node-steps above which a run is flagged "slow"
RATE_TOLERANCE = {Regime.SUPERSONIC: 0.25, Regime.TRANSONIC: 0.30}
NUMERICAL_ERRORS = (IntegrationError, ConvergenceError, PositivityError, SingularityError,
                    DomainTooShort, ShootingError)
DEFAULT_OUT = "runs"
OUT_ENV = "HALFSPACE_NS_OUT"


def output_root(out: str | Path | None) -> Path:
    return Path(out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


@dataclass
class CommandResult:
    exit_code: int
    run_dir: Path | None
    manifest: dict = field(default_factory=dict)
    message: str = ""


class _Run:
    """Bookkeeping for one run directory."""

    def __init__(self, command: str, rc: RunConfig, out_root: Path):
        self.command = command
        self.rc = rc
        self.hash = config_hash(rc.raw, command)
        self.run_id = f"{command}-{self.hash[:12]}"
        self.dir = out_root / self.run_id
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.outputs: dict = {}
        self.flags: list[str] = []
        self.t0 = time.perf_counter()
        if rc.defaulted_params:
            # gamma, mu_hat, kappa_hat defaults are an artifact choice; say so
            self.flags.append("default-parameters")

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.dir / name

    def finish(self, exit_code: int, status: str, message: str = "") -> CommandResult:
        p = self.rc.params
        manifest = {
            "run_id": self.run_id,
            "command": self.command,
            "config_hash": self.hash,
            "config": self.rc.raw,
            "seed": self.rc.seed,
            "regime": p.regime.value,
            "delta": self.rc.boundary.delta,
            "params": p.as_dict(),
            "status": status,
            "message": message,
            "exit_code": exit_code,
            "outputs": self.outputs,
            "flags": sorted(set(self.flags)),
            "files": sorted(set(self.files + ["manifest.json"])),
            "version": __version__,
            "timing": {"wall_clock_s": time.perf_counter() - self.t0},
        }
        io.write_json(self.dir / "manifest.json", manifest)
        return CommandResult(exit_code, self.dir, manifest, message)


def _grid(rc: RunConfig) -> GridSpec:
    g = rc.raw["grid"]
    return GridSpec(float(g["x_max"]), int(g["n"]))


def _stationary_kwargs(rc: RunConfig) -> dict:
    st = rc.raw["stationary"]
    return {"eps0": float(st["eps0"]), "manifold_tol": float(st["manifold_tol"])}


def _write_equilibrium(run: _Run, cls=None):
    rc = run.rc
    eq = eigen_analysis(rc.params)
    expansion = manifold_coefficients(rc.params) if rc.params.regime is Regime.TRANSONIC else None
    rec = io.equilibrium_record(rc.params, eq, expansion, cls)
    io.write_json(run.path("equilibrium.json"), rec)
    return eq, expansion


def cmd_analyze(rc: RunConfig, out_root: Path) -> CommandResult:
    run = _Run("analyze", rc, out_root)
    cls = classify_boundary(rc.boundary, rc.params, **_stationary_kwargs(rc))
    eq, expansion = _write_equilibrium(run, cls)
    beta = float(rc.raw["weights"].get("beta", 2.0))
    forms = quadratic_forms(rc.params.gamma, rc.params.mach, beta, rc.params.mu_hat, rc.params.kappa_hat)
    io.write_json(run.path("forms.json"), forms.as_dict())
    run.outputs.update({
        "lambda1": eq.lambda1, "lambda2": eq.lambda2, "det_P": float(np.linalg.det(eq.P)),
        "verdict": cls.verdict.value, "uncertain": cls.uncertain,
        "c2": expansion.c2 if expansion else None, "s2": expansion.s2 if expansion else None,
        "prandtl": rc.params.prandtl,
    })
    return run.finish(EXIT_OK, "ok")


def cmd_classify(rc: RunConfig, out_root: Path) -> CommandResult:
    run = _Run("classify", rc, out_root)
    cls = classify_boundary(rc.boundary, rc.params, **_stationary_kwargs(rc))
    io.write_json(run.path("classification.json"), cls.as_dict())
    run.outputs.update(cls.as_dict())
    return run.finish(EXIT_OK, "ok", cls.verdict.value)


def _solve(run: _Run):
    rc = run.rc
    profile = solve_stationary(rc.boundary, rc.params, _grid(rc), **_stationary_kwargs(rc))
    io.write_profile(run.path("profile.csv"), profile)
    return profile


def _failure(run: _Run, exc: Exception) -> CommandResult:
    if isinstance(exc, NoStationarySolution):
        run.outputs["diagnostic"] = exc.diagnostic
        return run.finish(EXIT_NONEXISTENCE, "nonexistence", str(exc))
    return run.finish(EXIT_NUMERICAL, "numerical-failure", f"{type(exc).__name__}: {exc}")


def cmd_stationary(rc: RunConfig, out_root: Path) -> CommandResult:
    run = _Run("stationary", rc, out_root)
    try:
        _write_equilibrium(run)
        profile = _solve(run)
    except (NoStationarySolution,) + NUMERICAL_ERRORS as exc:
        return _failure(run, exc)
    summary = profile.summary()
    io.write_json(run.path("stationary.json"), summary)
    run.outputs.update({"residual": profile.residual, "decay": summary["decay"],
                        "verdict": summary["classification"]["verdict"]})
    return run.finish(EXIT_OK, "ok")


def perturbation_spec(rc: RunConfig) -> PerturbationSpec:
    pt = rc.raw["perturbation"]
    shape = pt["shape"]
    if shape == "algebraic":
        s = AlgebraicTail(float(pt["exponent"]))
    elif shape == "gaussian":
        s = GaussianBump(float(pt.get("center", 5.0)), float(pt.get("width", 1.0)))
    else:
        s = Compact(float(pt["cutoff"]))
    return PerturbationSpec(float(pt["amplitude"]), s, tuple(pt.get("fields", ("rho", "u", "theta"))))


def scheme_config(rc: RunConfig) -> SchemeConfig:
    ev = rc.raw["evolve"]
    return SchemeConfig(float(ev["cfl"]), float(ev["diff_safety"]), ev["integrator"],
                        ev["farfield_bc"], bool(ev["balanced"]))


def _evolve(run: _Run):
    """Shared body of ``evolve`` and ``rate-study``; returns (recorder, result, profile)."""
    rc = run.rc
    ev = rc.raw["evolve"]
    profile = _solve(run)
    grid = Grid(profile.x[-1], profile.x.size)
    if rc.params.regime is Regime.TRANSONIC and profile.delta * grid.x_max < 20.0 - 1e-9:
        run.flags.append("short-transonic-domain")
    state = build_initial(profile, perturbation_spec(rc), grid)
    cfg = scheme_config(rc)
    dt0 = stable_dt(state, grid, rc.params, cfg)
    work = float(ev["t_final"]) / dt0 * grid.n
    run.outputs["estimated_node_steps"] = work
    if work > SLOW_WORK or (rc.params.regime is Regime.TRANSONIC and float(ev["t_final"]) >= 1000):
        run.flags.append("slow")
        log.warning("slow run: about %.2g node-steps; progress is logged every 30 s", work)
    rec = SeriesRecorder(profile, rc.params, float(rc.raw["weights"]["alpha"]),
                         int(ev.get("snapshot_every", 0)))
    result = evolve(state, float(ev["t_final"]), float(ev["sample_dt"]), rc.params, rc.boundary, cfg,
                    profile=profile, sink=rec, numerics=ev["numerics"])
    io.write_csv(run.path("series.csv"), SERIES_COLUMNS, rec.rows)
    for k, (t, rho, u, th) in enumerate(rec.snapshots):
        io.write_columns(run.path(f"snapshots/snap_{k:05d}.csv"),
                         {"x": profile.x, "rho": rho, "u": u, "theta": th}, io.SNAPSHOT_COLUMNS)
    arr = rec.array()
    run.outputs.update({
        "evolution_status": result.status, "steps": result.steps, "samples": len(rec.rows),
        "t_reached": result.final.t,
        "sup_norm_initial": float(arr[0, 1]), "sup_norm_final": float(arr[-1, 1]),
        "max_mass_residual": float(np.max(arr[:, 6])),
        "momentum_residual_final": float(flux_balance([result.final], rc.params).max_momentum),
        "balanced": cfg.balanced,
    })
    return rec, result, profile


def cmd_evolve(rc: RunConfig, out_root: Path) -> CommandResult:
    run = _Run("evolve", rc, out_root)
    try:
        _write_equilibrium(run)
        rec, result, _ = _evolve(run)
    except (NoStationarySolution,) + NUMERICAL_ERRORS as exc:
        return _failure(run, exc)
    if not result.completed:
        run.flags.append("partial-series")
        return run.finish(EXIT_NUMERICAL, result.status, result.message)
    return run.finish(EXIT_OK, "ok")


def rate_target(regime: Regime, alpha: float, model: RateModel):
    if model is RateModel.EXPONENTIAL:
        return None
    if regime is Regime.SUPERSONIC:
        return -alpha / 2.0
    if regime is Regime.TRANSONIC:
        return -alpha / 4.0
    return None


def rate_verdict(fit, target, tolerance, model: RateModel) -> str:
    if fit is None or fit.flagged:
        return "inconclusive"
    if model is RateModel.EXPONENTIAL:
        return "pass" if fit.exponent_or_rate > 0 else "fail"
    if target is None:
        return "no-target"
    return "pass" if abs(fit.exponent_or_rate - target) <= tolerance * abs(target) else "fail"


def cmd_rate_study(rc: RunConfig, out_root: Path) -> CommandResult:
    from .config import check_rate_hypotheses

    check_rate_hypotheses(rc)
    run = _Run("rate-study", rc, out_root)
    rt = rc.raw["rate"]
    model = RateModel(rt.get("model", "algebraic"))
    norm = rt.get("norm", "sup_norm")
    if norm not in SERIES_COLUMNS[1:]:
        raise ConfigError(f"rate.norm must be one of {', '.join(SERIES_COLUMNS[1:])}")
    alpha = float(rc.raw["weights"]["alpha"])
    regime = rc.params.regime
    target = rate_target(regime, alpha, model)
    tol = float(rt.get("tolerance", RATE_TOLERANCE.get(regime, 0.25)))
    try:
        _write_equilibrium(run)
        rec, result, profile = _evolve(run)
    except (NoStationarySolution,) + NUMERICAL_ERRORS as exc:
        return _failure(run, exc)
    if not result.completed:
        run.flags.append("partial-series")
        return run.finish(EXIT_NUMERICAL, result.status, result.message)
    t, v = rec.column("t"), rec.column(norm)
    window = rt.get("window")
    fit, reason = None, ""
    try:
        fit = fit_rate(t, v, model, window=tuple(window) if window else None)
    except InsufficientData as exc:
        reason = str(exc)
    verdict = rate_verdict(fit, target, tol, model)
    record = {
        "model": model.value, "norm": norm, "regime": regime.value, "alpha": alpha,
        "exponent": fit.exponent_or_rate if fit else None,
        "window": list(fit.window) if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "n_samples": fit.n_samples if fit else 0,
        "target": target, "tolerance": tol, "verdict": verdict, "reason": reason,
    }
    io.write_json(run.path("rates.json"), record)
    run.outputs.update({"rate": record})
    code = {"pass": EXIT_OK, "no-target": EXIT_OK, "fail": EXIT_FAIL}.get(verdict, EXIT_INCONCLUSIVE)
    return run.finish(code, verdict, reason)


COMMANDS = {
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "stationary": cmd_stationary,
    "evolve": cmd_evolve,
    "rate-study": cmd_rate_study,
}


def run_command(name: str, cfg: dict, out_root: Path) -> CommandResult:
    """Validate ``cfg`` and dispatch; configuration problems become exit code 2."""
    try:
        rc = validate(cfg)
        return COMMANDS[name](rc, out_root)
    except ConfigError as exc:
        return CommandResult(EXIT_CONFIG, None, {}, str(exc))
    except RegimeError as exc:
        return CommandResult(EXIT_CONFIG, None, {}, str(exc))
    except DomainError as exc:
        return CommandResult(EXIT_CONFIG, None, {}, str(exc))
    except NoStationarySolution as exc:
        return CommandResult(EXIT_NONEXISTENCE, None, {}, str(exc))
    except HalfspaceError as exc:
        return CommandResult(EXIT_NUMERICAL, None, {}, f"{type(exc).__name__}: {exc}")


# --- sweeps ------------------------------------------------------------------

SWEEP_FIELDS = ("exit_code", "status", "regime", "delta", "prandtl", "lambda1", "lambda2",
                "verdict", "c2", "s2", "residual", "message", "run_dir")


def parse_axis(spec: str):
    """``key=v1,v2,...`` into ``(key, [values])``."""
    from .config import parse_value

    if "=" not in spec:
        raise ConfigError(f"axis {spec!r} must look like key=v1,v2")
    key, vals = spec.split("=", 1)
    values = [parse_value(v.strip()) for v in vals.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"axis {key} has no values")
    return key.strip(), values


def _sweep_point(args):
    command, cfg, out_root = args
    res = run_command(command, cfg, Path(out_root))
    m = res.manifest
    o = m.get("outputs", {})
    row = {
        "exit_code": res.exit_code, "status": m.get("status", "error"),
        "regime": m.get("regime"), "delta": m.get("delta"),
        "prandtl": (m.get("params") or {}).get("prandtl"),
        "lambda1": o.get("lambda1"), "lambda2": o.get("lambda2"), "verdict": o.get("verdict"),
        "c2": o.get("c2"), "s2": o.get("s2"), "residual": o.get("residual"),
        "message": res.message, "run_dir": str(res.run_dir) if res.run_dir else "",
    }
    return row


def cmd_sweep(cfg: dict, axes: list, out_root: Path, jobs: int = 1, command: str | None = None) -> CommandResult:
    """Cartesian sweep; rows are ordered by axis values, not completion order."""
    sweep_block = cfg.get("sweep", {}) or {}
    command = command or sweep_block.get("command", "analyze")
    if command not in COMMANDS:
        return CommandResult(EXIT_CONFIG, None, {}, f"sweep.command must be one of {sorted(COMMANDS)}")
    axes = list(axes) + [(k, v) for k, v in (sweep_block.get("axes") or {}).items()]
    if not axes:
        return CommandResult(EXIT_CONFIG, None, {}, "sweep needs at least one axis")
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    sweep_id = "sweep-" + config_hash({"cfg": base, "axes": axes}, command)[:12]
    sweep_dir = out_root / sweep_id
    points_dir = sweep_dir / "points"
    keys = [k for k, _ in axes]
    combos = list(itertools.product(*[v for _, v in axes]))
    tasks = []
    for combo in combos:
        pc = json.loads(canonical_json(base))
        for k, v in zip(keys, combo):
            set_dotted(pc, k, v)
        tasks.append((command, pc, str(points_dir)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    table = [list(combo) + [row[f] for f in SWEEP_FIELDS] for combo, row in zip(combos, rows)]
    io.write_csv(sweep_dir / "sweep.csv", keys + list(SWEEP_FIELDS), table)
    failures = sum(1 for r in rows if r["exit_code"] not in (EXIT_OK,))
    manifest = {"sweep_id": sweep_id, "command": command, "axes": [[k, v] for k, v in axes],
                "points": len(rows), "failures": failures, "files": ["manifest.json", "sweep.csv"]}
    io.write_json(sweep_dir / "manifest.json", manifest)
    return CommandResult(EXIT_OK, sweep_dir, manifest, f"{len(rows)} points, {failures} non-zero exits")


# --- report ------------------------------------------------------------------

REPORT_FIELDS = ("run_id", "command", "regime", "delta", "status", "exit_code", "flags",
                 "key_output")


def _key_output(m: dict) -> str:
    o = m.get("outputs", {})
    if "rate" in o:
        r = o["rate"]
        return f"exponent={r.get('exponent')} target={r.get('target')} verdict={r.get('verdict')}"
    if "sup_norm_final" in o:
        return f"sup_norm {o['sup_norm_initial']:.3e} -> {o['sup_norm_final']:.3e}"
    if "residual" in o:
        return f"residual={o['residual']:.3e}"
    if "verdict" in o:
        return f"verdict={o['verdict']}"
    return ""


def cmd_report(out_root: Path) -> CommandResult:
    manifests = sorted(out_root.glob("*/manifest.json"))
    rows = []
    for p in manifests:
        m = io.read_json(p)
        if "run_id" not in m:
            continue
        rows.append([m["run_id"], m["command"], m["regime"], m["delta"], m["status"], m["exit_code"],
                     ";".join(m.get("flags", [])), _key_output(m)])
    out_root.mkdir(parents=True, exist_ok=True)
    io.write_csv(out_root / "report.csv", REPORT_FIELDS, rows)
    lines = [" | ".join(REPORT_FIELDS)] + [" | ".join(str(c) for c in r) for r in rows]
    return CommandResult(EXIT_OK, out_root, {"runs": len(rows)}, "\n".join(lines))
