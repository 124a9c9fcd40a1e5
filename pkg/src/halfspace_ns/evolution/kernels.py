"""Finite-difference kernels for the dimensionless primitive system.

    rho_t = -u rho_x - rho u_x
    u_t   = -u u_x - (rho theta)_x / (M^2 gamma rho) + mu u_xx / rho
    theta_t = -u theta_x + M^2 / (cv rho) (kappa theta_xx + mu u_x^2 - rho theta u_x / (gamma M^2))

Convective terms use forward (upwind for u < 0) differences, everything
else central differences.  Node 0 carries the wall condition: u, theta
are held and rho follows a one-sided continuity update.  The last node is
left at zero rate; the far-field condition is applied separately.

Each kernel exists twice: a loop version compiled with numba and a
vectorized numpy version.  ``advance`` runs many time steps in one call.
Status codes: 0 ok, 1 positivity/sign breach or non-finite value.
"""
import numpy as np

from .._accel import USE_NUMBA, njit

FAR_DIRICHLET = 0
FAR_EXTRAPOLATE = 1


def _rhs_loop(rho, u, th, dx, gamma, mu, kappa, m2, cv, drho, du, dth):
    n = rho.size
    inv = 1.0 / dx
    inv2 = inv * inv
    drho[0] = -u[0] * (rho[1] - rho[0]) * inv - rho[0] * (u[1] - u[0]) * inv
    du[0] = 0.0
    dth[0] = 0.0
    for i in range(1, n - 1):
        r = rho[i]
        rx = (rho[i + 1] - r) * inv
        ux_up = (u[i + 1] - u[i]) * inv
        tx_up = (th[i + 1] - th[i]) * inv
        ux = 0.5 * (u[i + 1] - u[i - 1]) * inv
        px = 0.5 * (rho[i + 1] * th[i + 1] - rho[i - 1] * th[i - 1]) * inv
        uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv2
        txx = (th[i + 1] - 2.0 * th[i] + th[i - 1]) * inv2
        drho[i] = -u[i] * rx - r * ux
        du[i] = -u[i] * ux_up - px / (m2 * gamma * r) + mu * uxx / r
        dth[i] = -u[i] * tx_up + m2 / (cv * r) * (
            kappa * txx + mu * ux * ux - r * th[i] * ux / (gamma * m2))
    drho[n - 1] = 0.0
    du[n - 1] = 0.0
    dth[n - 1] = 0.0


def rhs_numpy(rho, u, th, dx, gamma, mu, kappa, m2, cv, drho, du, dth):
    inv = 1.0 / dx
    r = rho[1:-1]
    ux = 0.5 * (u[2:] - u[:-2]) * inv
    px = 0.5 * (rho[2:] * th[2:] - rho[:-2] * th[:-2]) * inv
    uxx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) * inv * inv
    txx = (th[2:] - 2.0 * th[1:-1] + th[:-2]) * inv * inv
    uc = u[1:-1]
    drho[1:-1] = -uc * (rho[2:] - r) * inv - r * ux
    du[1:-1] = -uc * (u[2:] - uc) * inv - px / (m2 * gamma * r) + mu * uxx / r
    dth[1:-1] = -uc * (th[2:] - th[1:-1]) * inv + m2 / (cv * r) * (
        kappa * txx + mu * ux * ux - r * th[1:-1] * ux / (gamma * m2))
    drho[0] = -u[0] * (rho[1] - rho[0]) * inv - rho[0] * (u[1] - u[0]) * inv
    du[0] = dth[0] = 0.0
    drho[-1] = du[-1] = dth[-1] = 0.0


def _bad(rho, u, th):
    for i in range(rho.size):
        if not (rho[i] > 0.0 and th[i] > 0.0 and u[i] < 0.0):
            return True
    return False


def _far_bc(rho, u, th, far_mode):
    if far_mode == 1:
        n = rho.size
        rho[n - 1] = rho[n - 2]
        u[n - 1] = u[n - 2]
        th[n - 1] = th[n - 2]


def _stage_loop(ys, y0, h, k, ref):
    # k <- k - ref ; ys <- y0 + h k
    for c in range(3):
        for i in range(y0.shape[1]):
            k[c, i] -= ref[c, i]
            ys[c, i] = y0[c, i] + h * k[c, i]


def _stage_numpy(ys, y0, h, k, ref):
    k -= ref
    np.multiply(k, h, out=ys)
    ys += y0


def _make_advance(rhs, bad, far_bc, stage):
    def advance(rho, u, th, ref, dt, nsteps, order, far_mode, dx, gamma, mu, kappa, m2, cv):
        """Advance in place by ``nsteps`` steps of RK2 (Heun) or RK4.

        ``ref`` is a (3, n) array subtracted from every rate evaluation
        (zeros for the plain scheme).  Returns ``(status, steps_done)``.
        """
        n = rho.size
        k = np.zeros((4, 3, n))
        y0 = np.empty((3, n))
        ys = np.empty((3, n))
        acc = np.empty((3, n))
        zero = np.zeros((3, n))
        y0[0] = rho
        y0[1] = u
        y0[2] = th
        for s in range(nsteps):
            rhs(y0[0], y0[1], y0[2], dx, gamma, mu, kappa, m2, cv, k[0, 0], k[0, 1], k[0, 2])
            if order == 2:
                stage(ys, y0, dt, k[0], ref)
                far_bc(ys[0], ys[1], ys[2], far_mode)
                rhs(ys[0], ys[1], ys[2], dx, gamma, mu, kappa, m2, cv, k[1, 0], k[1, 1], k[1, 2])
                stage(acc, y0, 0.5 * dt, k[0], zero)
                stage(y0, acc, 0.5 * dt, k[1], ref)
            else:
                for j in range(1, 4):
                    h = 0.5 * dt if j < 3 else dt
                    stage(ys, y0, h, k[j - 1], ref)
                    far_bc(ys[0], ys[1], ys[2], far_mode)
                    rhs(ys[0], ys[1], ys[2], dx, gamma, mu, kappa, m2, cv, k[j, 0], k[j, 1], k[j, 2])
                stage(acc, y0, dt / 6.0, k[0], zero)
                stage(ys, acc, dt / 3.0, k[1], zero)
                stage(acc, ys, dt / 3.0, k[2], zero)
                stage(y0, acc, dt / 6.0, k[3], ref)
            far_bc(y0[0], y0[1], y0[2], far_mode)
            if bad(y0[0], y0[1], y0[2]):
                rho[:] = y0[0]
                u[:] = y0[1]
                th[:] = y0[2]
                return 1, s + 1
        rho[:] = y0[0]
        u[:] = y0[1]
        th[:] = y0[2]
        return 0, nsteps
    return advance


def _bad_numpy(rho, u, th):
    return not (np.all(rho > 0.0) and np.all(th > 0.0) and np.all(u < 0.0))


advance_numpy = _make_advance(rhs_numpy, _bad_numpy, _far_bc, _stage_numpy)

if USE_NUMBA:
    rhs_numba = njit(cache=True)(_rhs_loop)
    _bad_nb = njit(cache=True)(_bad)
    _far_nb = njit(cache=True)(_far_bc)
    _stage_nb = njit(cache=True)(_stage_loop)
    advance_numba = njit(cache=True)(_make_advance(rhs_numba, _bad_nb, _far_nb, _stage_nb))
    rhs = rhs_numba
    advance = advance_numba
else:
    rhs_numba = advance_numba = None
    rhs = rhs_numpy
    advance = advance_numpy

rhs_loop_python = _rhs_loop
