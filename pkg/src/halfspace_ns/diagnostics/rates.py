"""Log-linear decay fits: algebraic ``C (1+t)^p`` or exponential ``C e^{-k t}``."""
from __future__ import annotations

import enum
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InsufficientData

log = logging.getLogger(__name__)

MIN_SAMPLES = 10
MIN_R_SQUARED = 0.9


class RateModel(str, enum.Enum):
    ALGEBRAIC = "algebraic"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class RateFit:
    """Fitted decay.

    For the algebraic model ``exponent_or_rate`` is the slope of
    ``log|v|`` against ``log(1 + t)`` (negative for decay); for the
    exponential model it is the rate ``k`` in ``e^{-k t}`` (positive for decay).
    """

    model: RateModel
    exponent_or_rate: float
    window: tuple[float, float]
    r_squared: float
    n_samples: int
    prefactor: float
    flagged: bool = False

    def as_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        d["window"] = list(self.window)
        return d


def _linfit(X, Y):
    A = np.column_stack([X, np.ones_like(X)])
    (slope, icpt), *_ = np.linalg.lstsq(A, Y, rcond=None)
    pred = slope * X + icpt
    ss_res = float(np.sum((Y - pred) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icpt), r2


def fit_loglinear(t, v, model: RateModel | str, window=None, shift: float = 1.0) -> RateFit:
    """Least-squares fit over an explicit ``window`` with no span requirement.

    The algebraic model regresses on ``log(shift + t)``.
    """
    model = RateModel(model)
    t = np.asarray(t, dtype=float)
    v = np.abs(np.asarray(v, dtype=float))
    keep = np.isfinite(v) & (v > 0)
    if window is not None:
        keep &= (t >= window[0]) & (t <= window[1])
    t, v = t[keep], v[keep]
    if t.size < 3:
        raise InsufficientData(f"need at least 3 positive samples in window, got {t.size}")
    Y = np.log(v)
    if model is RateModel.ALGEBRAIC:
        slope, icpt, r2 = _linfit(np.log(shift + t), Y)
        value = slope
    else:
        slope, icpt, r2 = _linfit(t, Y)
        value = -slope
    return RateFit(model, value, (float(t[0]), float(t[-1])), r2, int(t.size), float(np.exp(icpt)),
                   flagged=r2 < MIN_R_SQUARED)


def fit_rate(t, v, model: RateModel | str = RateModel.ALGEBRAIC, floor: float = 0.0,
             transient: float = 0.2, window=None, min_decades: float = 1.0) -> RateFit:
    """Fit a temporal decay law to ``(t, v)`` samples.

    Unless ``window`` is given, the first ``transient`` fraction of the
    log-time span (algebraic) or of the time span (exponential) is dropped,
    as are samples below ``10 * floor``.  Algebraic fits need at least
    ``min_decades`` decades of ``1 + t`` after trimming.
    """
    model = RateModel(model)
    t = np.asarray(t, dtype=float)
    v = np.abs(np.asarray(v, dtype=float))
    keep = np.isfinite(v) & (v > 0)
    if floor > 0:
        keep &= v >= 10.0 * floor
    if window is None:
        if model is RateModel.ALGEBRAIC:
            lt = np.log10(1.0 + t)
            cut = lt.min() + transient * (lt.max() - lt.min())
            keep &= lt >= cut
        else:
            cut = t.min() + transient * (t.max() - t.min())
            keep &= t >= cut
    else:
        keep &= (t >= window[0]) & (t <= window[1])
    ts, vs = t[keep], v[keep]
    if ts.size < MIN_SAMPLES:
        raise InsufficientData(f"need {MIN_SAMPLES} samples after trimming, got {ts.size}")
    if model is RateModel.ALGEBRAIC:
        span = np.log10((1.0 + ts[-1]) / (1.0 + ts[0]))
        if span < min_decades - 1e-12:
            raise InsufficientData(f"fit window spans {span:.2f} decades of (1+t), need {min_decades}")
    fit = fit_loglinear(ts, vs, model)
    if fit.flagged:
        log.warning("rate fit has r^2 = %.3f < %.1f", fit.r_squared, MIN_R_SQUARED)
    return fit
