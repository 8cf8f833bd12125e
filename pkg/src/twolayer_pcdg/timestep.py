"""CFL control and SSP-RK3 time stepping for both schemes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import Mesh1D
from .errors import ConfigError, SolverError
from .limiter import LimiterConfig, limit_moving, limit_still, limit_still_2d, positivity_scale
from .model import dh_dv, solve_depths
from .moving import (MovingState, _eval_points, cons_coefficients, depths_at, make_state,
                     rhs_moving)
from .still import rhs_still_1d, rhs_still_2d

# Shu-Osher form: u_new = a * u_n + b * (u_s + dt L(u_s)), stage times as fractions of dt
SSP_STAGES = ((0.0, 1.0, 0.0), (0.75, 0.25, 1.0), (1.0 / 3.0, 2.0 / 3.0, 0.5))

STAGE_TOL = 1e-13
STAGE_MAXITER = 100


@dataclass
class StepReport:
    dt: float
    alpha: float
    newton_max: int = 0
    newton_mean: float = 0.0
    troubled: int = 0
    fallback: int = 0
    hyperbolic: bool = True
    stage_iterations: list = field(default_factory=list)


def cfl_dt(mesh, alpha, cfl):
    """``cfl * h / alpha`` with ``h`` the smallest cell size."""
    if not alpha > 0:
        raise ConfigError("wave-speed bound must be positive to set a time step")
    h = mesh.dx if isinstance(mesh, Mesh1D) else min(mesh.dx, mesh.dy)
    return cfl * h / alpha


# -- still scheme ------------------------------------------------------------------

def ssprk3_step_still(coef, ctx, dt, t=0.0, limiter=None):
    """One SSP-RK3 step of the still scheme; ``ctx.alpha`` must be set."""
    limiter = limiter or LimiterConfig(enabled=False)
    periodic = ctx.bc.is_periodic
    if ctx.dim == 1:
        rhs = rhs_still_1d

        def limit(c):
            return limit_still(c, limiter, ctx.mesh.dx, periodic, ctx.params, ctx.bottom[:, 0])
    else:
        rhs = rhs_still_2d

        def limit(c):
            return limit_still_2d(c, limiter, ctx.mesh.dx, ctx.mesh.dy, periodic, ctx.params,
                                  ctx.bottom[..., 0, 0])

    troubled = 0
    u_n = coef
    u_s = coef
    for a, b, c in SSP_STAGES:
        stage = u_s + dt * rhs(u_s, ctx, t + c * dt)
        u_s = stage if a == 0.0 else stage + a * (u_n - stage)
        u_s, bad = limit(u_s)
        if limiter.enabled and limiter.positivity:
            u_s = positivity_scale(u_s, ctx.bottom, ctx.basis)[0]
        troubled = max(troubled, int(np.count_nonzero(bad.any(axis=-1))))
    return u_s, StepReport(dt, ctx.alpha, troubled=troubled, hyperbolic=ctx.hyperbolic)


# -- moving scheme -----------------------------------------------------------------

def _depth_modes(hq, basis):
    """Normalised modal coefficients of node depths, ``(nx, 2, K)``."""
    return np.einsum("kjq,q,qm->jkm", hq, basis.weights, basis.V) * basis.inv_mass


def newton_stage_solve(target, E0, m, b, hq_seed, ctx, tol=STAGE_TOL, maxiter=STAGE_MAXITER):
    """Solve for the ``E1, E2`` modal coefficients of one stage, all cells at once.

    ``target (nx, 2, K)`` holds the normalised modal coefficients that the depths
    ``(h1, h2)`` must reproduce; ``E0 (nx, 2, K)`` is the starting guess, ``m
    (nx, 2, K)`` and ``b (nx, K)`` are already known.  Returns ``(E, hq,
    iterations per cell)``.  The residual is measured in normalised modal units.
    """
    basis, params = ctx.basis, ctx.params
    V, w, N = basis.V, basis.weights, basis.inv_mass
    nx, _, K = E0.shape
    mq = np.einsum("jkm,qm->kjq", m, V)
    bq = b @ V.T

    def depths(E, seed):
        Eq = np.einsum("jkm,qm->kjq", E, V)
        h1, h2, ok, its = solve_depths(Eq[0], mq[0], Eq[1], mq[1], bq, seed[0], seed[1], params)
        ctx.stats.record(its)
        return np.array([h1, h2]), ok.all(axis=-1), Eq

    # the previous depths are already converged for E0, so a steady cell stays bitwise
    # steady; the projected target depths serve as a fallback seed
    E = E0.copy()
    hq, ok, Eq = depths(E, hq_seed)
    if not ok.all():
        alt = np.einsum("jkm,qm->kjq", target, V)
        alt = np.where(alt > 0, alt, hq_seed)
        hq2, ok2, _ = depths(E, alt)
        hq = np.where(ok[None, :, None], hq, hq2)
        ok = ok2 | ok
        if not ok.all():
            raise SolverError(f"stage depth solve failed in cells {np.nonzero(~ok)[0][:10].tolist()}",
                              where=np.nonzero(~ok)[0])
    res = _depth_modes(hq, basis) - target
    rnorm = np.abs(res).max(axis=(1, 2))
    iters = np.zeros(nx, dtype=int)
    active = rnorm > tol
    best = rnorm.copy()
    stall = np.zeros(nx, dtype=int)
    for _ in range(maxiter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        vq = np.array([Eq[0][idx], mq[0][idx], Eq[1][idx], mq[1][idx], bq[idx]])
        J = dh_dv(hq[0][idx], hq[1][idx], vq, params)  # (2, 5, n, nq)
        Jh = J[:, [0, 2]]  # d h_k / d E_l
        # d res[k, i] / d E[l, m] = sum_q w_q Jh[k, l, q] P_i(q) P_m(q) N_i
        A = np.einsum("klnq,q,qi,qm,i->nkilm", Jh, w, V, V, N).reshape(len(idx), 2 * K, 2 * K)
        step = np.linalg.solve(A, -res[idx].reshape(len(idx), 2 * K, 1))[..., 0]
        step = step.reshape(len(idx), 2, K)
        lam = np.ones(len(idx))
        Enew = E[idx] + step
        sub_seed = hq[:, idx]
        for _ in range(30):
            Eq_try = np.einsum("jkm,qm->kjq", Enew, V)
            h1, h2, okp, its = solve_depths(Eq_try[0], mq[0][idx], Eq_try[1], mq[1][idx], bq[idx],
                                            sub_seed[0], sub_seed[1], params)
            ctx.stats.record(its)
            okc = okp.all(axis=-1)
            if okc.all():
                break
            lam = np.where(okc, lam, 0.5 * lam)
            Enew = E[idx] + lam[:, None, None] * step
        else:
            raise SolverError("stage Newton could not keep depths admissible",
                              where=idx[~okc])
        E[idx] = Enew
        hq[:, idx] = np.array([h1, h2])
        Eq = np.einsum("jkm,qm->kjq", E, V)
        res[idx] = _depth_modes(hq[:, idx], basis) - target[idx]
        rnew = np.abs(res[idx]).max(axis=(1, 2))
        iters[idx] += 1
        # round-off floor: stop once the residual no longer improves at tiny size
        stall[idx] = np.where(rnew < 0.5 * best[idx], 0, stall[idx] + 1)
        best[idx] = np.minimum(best[idx], rnew)
        done = (rnew <= tol) | ((stall[idx] >= 2) & (rnew <= 1e3 * tol))
        active[idx] = ~done
    if active.any():
        bad = np.nonzero(active)[0]
        raise SolverError(f"stage Newton did not converge in cells {bad[:10].tolist()} "
                          f"(residual {np.abs(res[bad]).max():.3e})", residual=res[bad], where=bad)
    return E, hq, iters


def _moving_stage(U_n, state_s, ctx, dt, a, b, t):
    basis = ctx.basis
    R = rhs_moving(state_s, ctx, t) * ((2 * np.arange(basis.nmodes) + 1) / ctx.mesh.dx)
    U_s = cons_coefficients(state_s, basis)
    # written as U_s + a (U_n - U_s) + b dt R so steady states stay bitwise steady
    T = U_s + b * dt * R if a == 0.0 else U_s + a * (U_n - U_s) + b * dt * R
    coef = np.empty_like(state_s.coef)
    coef[:, 1] = T[:, 1]
    coef[:, 3] = T[:, 3]
    coef[:, 4] = state_s.coef[:, 4]
    E, hq, iters = newton_stage_solve(T[:, [0, 2]], state_s.coef[:, [0, 2]],
                                      coef[:, [1, 3]], coef[:, 4], state_s.hq, ctx)
    coef[:, 0] = E[:, 0]
    coef[:, 2] = E[:, 1]
    _, vt = _eval_points(coef, basis)
    ht = depths_at(vt, state_s.ht, ctx, "cell traces")
    return MovingState(coef, hq, ht), T, iters


def ssprk3_step_moving(state, ctx, dt, t=0.0, limiter=None):
    """One SSP-RK3 step of the moving scheme with per-cell Newton stage solves."""
    limiter = limiter or LimiterConfig(enabled=False)
    U_n = cons_coefficients(state, ctx.basis)
    s = state
    report = StepReport(dt, ctx.alpha, hyperbolic=ctx.hyperbolic)
    all_iters = []
    for a, b, c in SSP_STAGES:
        s, T, iters = _moving_stage(U_n, s, ctx, dt, a, b, t + c * dt)
        all_iters.append(iters)
        report.stage_iterations.append(int(iters.max()))
        if limiter.enabled:
            u_avg = T[:, :4, 0].T
            lim, bad, fb = limit_moving(s.coef, limiter, ctx.mesh.dx, ctx.params, u_avg,
                                        ctx.bc.is_periodic)
            if bad.any():
                s = make_state(lim, s.hq, s.ht, ctx)
            report.troubled = max(report.troubled, int(bad.sum()))
            report.fallback = max(report.fallback, int(fb.sum()))
    it = np.concatenate(all_iters)
    report.newton_max = int(it.max())
    report.newton_mean = float(it.mean())
    return s, report
