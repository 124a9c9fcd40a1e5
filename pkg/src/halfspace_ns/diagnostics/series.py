"""Per-sample diagnostics collected during time integration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import DimensionlessParams
from .norms import NormSpec, energy_form, perturbation, weighted_norm

SERIES_COLUMNS = ("t", "sup_norm", "l2", "l2_alpha", "h1", "energy", "mass_residual")


@dataclass
class SeriesRecorder:
    """Sink for :func:`evolve` that records one row of ``SERIES_COLUMNS`` per sample.

    ``snapshot_every`` > 0 also keeps every k-th state's fields.
    """

    profile: object
    params: DimensionlessParams
    alpha: float = 2.0
    snapshot_every: int = 0
    rows: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def __call__(self, state):
        # imported here to keep diagnostics importable without the evolution package
        from ..evolution.scheme import mass_residual

        pert = perturbation(state, self.profile)
        x = pert.x
        Phi = [pert.phi, pert.psi, pert.chi]
        _, energy = energy_form(state, self.profile, self.params)
        self.rows.append((
            state.t,
            pert.sup_norm,
            weighted_norm(Phi, NormSpec.plain(0.0), x),
            weighted_norm(Phi, NormSpec.plain(self.alpha), x),
            weighted_norm(Phi, NormSpec.plain(0.0, 1), x),
            energy,
            mass_residual(state, self.params),
        ))
        if self.snapshot_every and (len(self.rows) - 1) % self.snapshot_every == 0:
            self.snapshots.append((state.t, state.rho.copy(), state.u.copy(), state.theta.copy()))

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(SERIES_COLUMNS))

    def column(self, name: str) -> np.ndarray:
        return self.array()[:, SERIES_COLUMNS.index(name)]
