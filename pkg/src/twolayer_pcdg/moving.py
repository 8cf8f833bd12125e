"""Right-hand side of the moving-water preserving path-conservative DG scheme (1D).

Unknowns are modal coefficients of ``v = (E1, m1, E2, m2, b)``.  Layer depths
are nonlinear functions of ``v``; they are recovered by Newton iteration at
quadrature points, cell traces and path nodes.  :class:`MovingState` caches the
depths so each solve can be seeded from the previous one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import Mesh1D, ModalBasis
from .boundary import BoundaryCondition, apply_boundary
from .errors import DomainError, SolverError
from .model import PhysParams, dh_dv, flux_conservative, max_wave_speed, solve_depths


@dataclass
class NewtonStats:
    calls: int = 0
    iterations: int = 0
    max_iterations: int = 0

    def record(self, iters):
        iters = np.asarray(iters)
        if iters.size:
            self.calls += iters.size
            self.iterations += int(iters.sum())
            self.max_iterations = max(self.max_iterations, int(iters.max()))

    def as_dict(self):
        mean = self.iterations / self.calls if self.calls else 0.0
        return {"point_solves": self.calls, "mean_iterations": mean,
                "max_iterations": self.max_iterations}


@dataclass
class MovingContext:
    params: PhysParams
    mesh: Mesh1D
    basis: ModalBasis
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.free)
    alpha: float = 0.0
    hyperbolic: bool = True
    stats: NewtonStats = field(default_factory=NewtonStats)


@dataclass
class MovingState:
    """Coefficients ``coef (nx, 5, K)`` plus depth caches.

    ``hq (2, nx, nq)`` holds ``(h1, h2)`` at the quadrature nodes and
    ``ht (2, nx, 2)`` at the left/right cell traces.
    """

    coef: np.ndarray
    hq: np.ndarray
    ht: np.ndarray

    def copy(self):
        return MovingState(self.coef.copy(), self.hq.copy(), self.ht.copy())


def _eval_points(coef, basis):
    """``v`` at quadrature nodes ``(5, nx, nq)`` and traces ``(5, nx, 2)``."""
    vq = np.einsum("jcm,qm->cjq", coef, basis.V)
    E = np.stack([basis.left, basis.right])  # (2, K)
    vt = np.einsum("jcm,sm->cjs", coef, E)
    return vq, vt


def depths_at(v, guess, ctx, where="points"):
    """Solve for ``(h1, h2)`` at states ``v (5, ...)`` seeded by ``guess (2, ...)``."""
    h1, h2, ok, iters = solve_depths(v[0], v[1], v[2], v[3], v[4], guess[0], guess[1],
                                     ctx.params)
    ctx.stats.record(iters)
    if not np.all(ok):
        bad = np.argwhere(~ok)
        raise SolverError(f"depth Newton failed at {len(bad)} {where} (first index "
                          f"{tuple(bad[0])})", last_iterate=(h1, h2), where=bad)
    return np.array([h1, h2])


def make_state(coef, guess_q, guess_t, ctx):
    """Build a :class:`MovingState` by solving depths at nodes and traces."""
    vq, vt = _eval_points(coef, ctx.basis)
    hq = depths_at(vq, guess_q, ctx, "quadrature nodes")
    ht = depths_at(vt, guess_t, ctx, "cell traces")
    return MovingState(coef, hq, ht)


def _cons(v, h):
    """Conservative 5-vector from equilibrium ``v`` and depths ``h``."""
    return np.array([h[0], v[1], h[1], v[3], v[4]])


def lf_alpha_moving(state, ctx):
    """Wave-speed bound over all cell traces; sets ``ctx.hyperbolic``."""
    _, vt = _eval_points(state.coef, ctx.basis)
    u = _cons(vt, state.ht)[:4].reshape(4, -1)
    alpha, real = max_wave_speed(u, ctx.params)
    ctx.hyperbolic = real
    return alpha


# -- interface pieces ------------------------------------------------------------

def starred_interface_states(vL, vR, hL, hR, ctx):
    """Depths at the common bottom ``b* = min(bL, bR)`` for both sides.

    Returns ``(uL_star, uR_star)`` as conservative 5-vectors.  The side that
    already sits at ``b*`` keeps its depths; the other side is re-solved seeded
    by its own depths, or copies the first side when the equilibrium variables
    agree (so equilibrium interfaces give bitwise equal starred states).
    """
    single = np.ndim(vL) == 1
    vL, vR, hL, hR = (np.array(a, dtype=float, ndmin=2).reshape(len(a), -1)
                      for a in (vL, vR, hL, hR))
    bstar = np.minimum(vL[4], vR[4])
    same = np.all(vL[:4] == vR[:4], axis=0)
    hLs, hRs = hL.copy(), hR.copy()
    for v, h_own, h_other, out in ((vL, hL, hR, hLs), (vR, hR, hL, hRs)):
        lifted = v[4] != bstar
        copy = lifted & same
        out[:, copy] = h_other[:, copy]
        solve = lifted & ~same
        if np.any(solve):
            sub = np.array([v[0], v[1], v[2], v[3], bstar])[:, solve]
            out[:, solve] = depths_at(sub, h_own[:, solve], ctx, "starred interface states")
    uL = np.array([hLs[0], vL[1], hLs[1], vL[3], bstar])
    uR = np.array([hRs[0], vR[1], hRs[1], vR[3], bstar])
    if single:
        return uL[:, 0], uR[:, 0]
    return uL, uR


def lf_flux_modified(uL, uR, uLs, uRs, alpha, params):
    """Lax-Friedrichs flux whose diffusion acts on the starred states."""
    return 0.5 * (flux_conservative(uL, params) + flux_conservative(uR, params)) \
        - 0.5 * alpha * (np.asarray(uRs) - np.asarray(uLs))


def _L_times(u, dv):
    """``L(u) @ dv`` with ``dv = (dE1, dm1, dE2, dm2, 0)``."""
    h1, m1, h2, m2 = u[0], u[1], u[2], u[3]
    z = np.zeros_like(dv[0])
    return np.array([dv[1], h1 * dv[0] + m1 / h1 * dv[1], dv[3],
                     h2 * dv[2] + m2 / h2 * dv[3], z])


def path_integrand(tau, vL, vR, hL, hR, ctx):
    """``L(u(phi(tau))) (vtilde_R - vtilde_L)`` along the segment path in ``v``."""
    vL = np.asarray(vL, dtype=float)
    vR = np.asarray(vR, dtype=float)
    vt = vL + tau * (vR - vL)
    guess = (1 - tau) * np.asarray(hL) + tau * np.asarray(hR)
    h = depths_at(vt, guess, ctx, "path nodes")
    dv = (vR - vL)[:4]
    return _L_times(_cons(vt, h), dv)


def path_integral(vL, vR, hL, hR, ctx):
    """Simpson approximation of the path integral of ``L(u) dv`` along the segment."""
    vL = np.asarray(vL, dtype=float)
    vR = np.asarray(vR, dtype=float)
    hL = np.asarray(hL, dtype=float)
    hR = np.asarray(hR, dtype=float)
    dv = (vR - vL)[:4]
    I0 = _L_times(_cons(vL, hL), dv)
    I1 = _L_times(_cons(vR, hR), dv)
    Im = np.zeros_like(I0)
    moving = np.any(dv != 0, axis=0)
    if np.any(moving):
        if np.ndim(moving):
            Im[:, moving] = path_integrand(0.5, vL[:, moving], vR[:, moving],
                                           hL[:, moving], hR[:, moving], ctx)
        else:
            Im = path_integrand(0.5, vL, vR, hL, hR, ctx)
    return (I0 + 4 * Im + I1) / 6.0


def fluctuation_moving(vL, vR, hL, hR, ctx):
    """Simpson approximation of the path integral minus the flux jump."""
    uL, uR = _cons(np.asarray(vL, float), hL), _cons(np.asarray(vR, float), hR)
    return path_integral(vL, vR, hL, hR, ctx) - flux_conservative(uR, ctx.params) \
        + flux_conservative(uL, ctx.params)


def coupling_volume_moving(coef, hq, ctx):
    """``int G(u) u_x P_m dx`` per cell on the reference element, ``(nx, 5, K)``.

    The depth gradients come from the chain rule with ``dh_dv`` at each node.
    """
    basis, params = ctx.basis, ctx.params
    vq = np.einsum("jcm,qm->cjq", coef, basis.V)
    vxi = np.einsum("jcm,qm->cjq", coef, basis.D)
    J = dh_dv(hq[0], hq[1], vq, params)  # (2, 5, nx, nq)
    hxi = np.einsum("kcjq,cjq->kjq", J, vxi)
    g, r = params.g, params.r
    Gu = np.zeros_like(vq)
    Gu[1] = g * hq[0] * (hxi[1] + vxi[4])
    Gu[3] = g * hq[1] * (r * hxi[0] + vxi[4])
    return np.einsum("cjq,q,qm->jcm", Gu, basis.weights, basis.V)


def _ghosts(vt, ht, ctx, t):
    """Interface arrays of ``v`` and depths, shapes ``(5, nx+1)`` and ``(2, nx+1)``."""
    bc = ctx.bc
    left_v, right_v = vt[..., 0], vt[..., 1]
    left_h, right_h = ht[..., 0], ht[..., 1]
    gl, gr = apply_boundary(left_v[:, 0], right_v[:, -1], bc, t, "moving", ctx.params)
    if bc.is_periodic:
        hgl, hgr = right_h[:, -1], left_h[:, 0]
    else:
        hgl, hgr = left_h[:, 0], right_h[:, -1]
        if bc.left == "inflow":
            data = bc.inflow(t)
            hgl = np.array([data["h1"], data["h2"]])
    vm = np.concatenate([gl[:, None], right_v], axis=1)
    vp = np.concatenate([left_v, gr[:, None]], axis=1)
    hm = np.concatenate([np.asarray(hgl)[:, None], right_h], axis=1)
    hp = np.concatenate([left_h, np.asarray(hgr)[:, None]], axis=1)
    return vm, vp, hm, hp


def _volume_flux(f, basis):
    f0 = f[..., :1]
    weak = np.einsum("cjq,q,qm->jcm", f - f0, basis.weights, basis.D)
    jump = basis.right - basis.left
    return weak + f0[..., 0].T[:, :, None] * jump[None, None, :]


def rhs_moving(state, ctx, t=0.0):
    """Weak right-hand side on the reference cell, shape ``(nx, 5, K)``.

    This is not mass-inverted: the stage update multiplies by ``(2m+1)/dx``
    when forming the target modal coefficients of ``u``.
    """
    basis, params = ctx.basis, ctx.params
    coef = state.coef
    vq, vt = _eval_points(coef, basis)
    uq = _cons(vq, state.hq)
    if np.any(state.hq <= 0):
        raise DomainError("nonpositive layer thickness at a quadrature node")
    weak = _volume_flux(flux_conservative(uq, params), basis)
    weak -= coupling_volume_moving(coef, state.hq, ctx)

    vm, vp, hm, hp = _ghosts(vt, state.ht, ctx, t)
    um, up = _cons(vm, hm), _cons(vp, hp)
    ums, ups = starred_interface_states(vm, vp, hm, hp, ctx)
    # F + D/2 and F - D/2 with F the modified LF flux and D the fluctuation,
    # rearranged so each side sees its own trace flux plus a term that vanishes
    # exactly at equilibrium interfaces
    I = path_integral(vm, vp, hm, hp, ctx)
    diff = ctx.alpha * (ups - ums)
    F_minus = flux_conservative(um, params) + 0.5 * (I - diff)
    F_plus = flux_conservative(up, params) - 0.5 * (I + diff)
    F_minus[4] = 0.0
    F_plus[4] = 0.0
    right_term = F_minus[:, 1:].T
    left_term = F_plus[:, :-1].T
    weak -= right_term[:, :, None] * basis.right[None, None, :]
    weak += left_term[:, :, None] * basis.left[None, None, :]
    weak[:, 4, :] = 0.0
    return weak


def cons_coefficients(state, basis):
    """Normalised modal coefficients of ``u(v)``: ``(nx, 5, K)``.

    Depth modes come from quadrature of the cached node depths; ``m`` and ``b``
    are polynomial and copied.
    """
    out = state.coef.copy()
    proj = np.einsum("kjq,q,qm->jkm", state.hq, basis.weights, basis.V) * basis.inv_mass
    out[:, 0, :] = proj[:, 0]
    out[:, 2, :] = proj[:, 1]
    return out
