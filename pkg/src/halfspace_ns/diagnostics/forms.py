"""Quadratic forms of the energy estimates and the Poincare-type inequality."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import trapezoid

BETA_CRITICAL = 2.0 + 2.0 * math.sqrt(2.0)


def _sym(v):
    return np.asarray(v, dtype=float)


def matrix_F1(gamma):
    g = gamma
    return _sym([[g - 1, 1 - g, 0], [1 - g, 2 * g, 1], [0, 1, 1]])


def matrix_F2(gamma, mach):
    g = gamma
    return _sym([[g - 1, 1 - g, 0], [1 - g, mach**2 * g * (g - 1), 1 - g], [0, 1 - g, 1]])


def matrix_F4(gamma):
    g = gamma
    return _sym([[3 - g, g - 1, 0], [g - 1, 0, 1], [0, 1, 1]])


def F1(phi, psi, chi, gamma):
    g = gamma
    return (g - 1) * phi**2 + 2 * g * psi**2 + chi**2 - 2 * (g - 1) * phi * psi + 2 * psi * chi


def F1_squares(phi, psi, chi, gamma):
    g = gamma
    return (g - 1) * (phi - psi) ** 2 + (psi + chi) ** 2 + g * psi**2


def F2(phi, psi, chi, gamma, mach):
    g = gamma
    return ((g - 1) * phi**2 + mach**2 * g * (g - 1) * psi**2 + chi**2
            - 2 * (g - 1) * (phi + chi) * psi)


def F2_squares(phi, psi, chi, gamma, mach):
    g = gamma
    return ((g - 1) * (phi - psi) ** 2 + ((g - 1) * psi - chi) ** 2
            + g * (g - 1) * (mach**2 - 1) * psi**2)


def F4(phi, psi, chi, gamma):
    g = gamma
    return (3 - g) * phi**2 + chi**2 + 2 * (g - 1) * phi * psi + 2 * psi * chi


def nu_closed_form(gamma):
    g = gamma
    root = math.sqrt(g**4 - 4 * g**3 + 12 * g**2 - 20 * g + 12)
    return 0.5 * (g * g - root), 0.5 * (g * g + root)


def a_hat_11_closed_form(gamma, beta):
    qbar2 = 1.0 / (gamma**2 - 2 * gamma + 3)
    return (gamma + 1) / 4.0 * qbar2 * (4 + 4 * beta - beta**2)


@dataclass(frozen=True)
class QuadraticFormReport:
    gamma: float
    mach: float
    beta: float
    mu_hat: float
    kappa_hat: float
    h: float
    A1: np.ndarray
    A2: np.ndarray
    A2_mach: np.ndarray
    A3: np.ndarray
    A4: np.ndarray
    nu_minus: float
    nu_plus: float
    nu_numeric: np.ndarray
    q1: np.ndarray
    Q: np.ndarray
    a_hat_11: float
    a_hat_11_closed: float
    min_eig_F1: float
    min_eig_F2: float
    notes: dict = field(default_factory=dict)

    def F1(self, phi, psi, chi):
        return F1(phi, psi, chi, self.gamma)

    def F2(self, phi, psi, chi):
        return F2(phi, psi, chi, self.gamma, self.mach)

    def F3(self, phi, psi, chi):
        g, b = self.gamma, self.beta
        return (F1(phi, psi, chi, g) / g + b / g * F4(phi, psi, chi, g)
                - b * b / self.h**2 * (self.mu_hat * psi**2 + self.kappa_hat * chi**2))

    def F4(self, phi, psi, chi):
        return F4(phi, psi, chi, self.gamma)

    @staticmethod
    def a_hat_11_of(gamma, beta):
        return a_hat_11_closed_form(gamma, beta)

    def as_dict(self, betas=None) -> dict:
        betas = np.linspace(0.0, 6.0, 13) if betas is None else betas
        return {
            "gamma": self.gamma, "mach": self.mach, "beta": self.beta, "h": self.h,
            "nu_minus": self.nu_minus, "nu_plus": self.nu_plus,
            "nu_numeric": self.nu_numeric.tolist(), "q1": self.q1.tolist(),
            "a_hat_11": self.a_hat_11,
            "a_hat_11_samples": [{"beta": float(b), "value": a_hat_11_closed_form(self.gamma, b)}
                                 for b in betas],
            "beta_critical": BETA_CRITICAL,
            "F1_positive_definite": self.min_eig_F1 > 0,
            "F2_positive_definite": self.min_eig_F2 > 0,
            "F2_min_eigenvalue": self.min_eig_F2,
            "supersonic": self.mach > 1,
        }


def quadratic_forms(gamma: float, mach: float = 1.0, beta: float = 0.0,
                    mu_hat: float = 1.0, kappa_hat: float = 1.0) -> QuadraticFormReport:
    """Matrices and spectra of F1..F4.

    ``A2`` is the M = 1 matrix of F2; ``A2_mach`` is the matrix at the given
    Mach number.  ``h^2 = 4 d / (gamma + 1)`` enters F3 only; ``a_hat_11`` is
    evaluated numerically as ``q1^T A3 q1`` next to its closed form.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    d = mu_hat + kappa_hat * (gamma - 1) ** 2
    h = math.sqrt(4.0 * d / (gamma + 1.0))
    A1 = matrix_F1(gamma)
    A2 = matrix_F2(gamma, 1.0)
    A2m = matrix_F2(gamma, mach)
    A4 = matrix_F4(gamma)
    A3 = A1 / gamma + beta / gamma * A4 - beta**2 / h**2 * np.diag([0.0, mu_hat, kappa_hat])
    w, V = np.linalg.eigh(A2)
    nu_m, nu_p = nu_closed_form(gamma)
    qbar = (gamma**2 - 2 * gamma + 3) ** -0.5
    q1 = np.array([1.0, 1.0, gamma - 1.0]) * qbar
    # align numeric eigenvectors with the closed-form kernel vector's sign
    Q = V.copy()
    if Q[:, 0] @ q1 < 0:
        Q[:, 0] *= -1
    return QuadraticFormReport(
        gamma, mach, beta, mu_hat, kappa_hat, h, A1, A2, A2m, A3, A4, nu_m, nu_p, w, q1, Q,
        float(q1 @ A3 @ q1), a_hat_11_closed_form(gamma, beta),
        float(np.linalg.eigvalsh(A1)[0]), float(np.linalg.eigvalsh(A2m)[0]))


@dataclass(frozen=True)
class PoincareResult:
    lhs: float
    rhs: float
    constant: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300


def poincare_check(w, f, x, constant: float = 2.0) -> PoincareResult:
    """Check ``int |w| f^2 <= C ||w||_{L^1_1} (f(0)^2 + ||f_x||^2)``.

    ``f`` is treated as piecewise linear between samples, so ``||f_x||^2``
    is the exact sum ``sum (df)^2 / dx``; both weighted integrals use the
    trapezoid rule on the same nodes.
    """
    x = np.asarray(x, dtype=float)
    w = np.abs(np.asarray(w, dtype=float))
    f = np.asarray(f, dtype=float)
    lhs = trapezoid(w * f * f, x)
    w_l11 = trapezoid((1.0 + x) * w, x)
    fx_sq = float(np.sum(np.diff(f) ** 2 / np.diff(x)))
    return PoincareResult(lhs, constant * w_l11 * (f[0] ** 2 + fx_sq), constant)
