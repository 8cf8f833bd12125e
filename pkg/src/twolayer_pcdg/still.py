"""Right-hand side of the still-water preserving path-conservative DG scheme.

Unknowns are modal coefficients of ``v = (h1, m1, w, m2)`` (1D) or
``(h1, m1, n1, w, m2, n2)`` (2D) with ``w = h2 + b``.  The bottom is a fixed
scalar DG field.  All weak-form integrals are computed on the reference cell,
so ``d coef / dt = weak * (2m + 1) / dx`` in 1D.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import ModalBasis, Mesh1D, Mesh2D
from .boundary import BoundaryCondition, interface_values, interface_values_2d
from .errors import DomainError
from .model import (PhysParams, apply_coupling_still_1d, flux_coupling_still_2d,
                    flux_still_1d, max_wave_speed)


@dataclass
class StillContext:
    params: PhysParams
    mesh: Mesh1D | Mesh2D
    basis: ModalBasis
    bottom: np.ndarray  # (nx, K) or (nx, ny, K, K)
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.free)
    alpha: float = 0.0
    include_coupling: bool = True
    hyperbolic: bool = True

    @property
    def dim(self):
        return 1 if isinstance(self.mesh, Mesh1D) else 2


# -- interface pieces ------------------------------------------------------------

def lf_flux(vL, vR, bL, bR, alpha, params):
    """Lax-Friedrichs flux with one-sided bottoms."""
    vL = np.asarray(vL, dtype=float)
    vR = np.asarray(vR, dtype=float)
    return 0.5 * (flux_still_1d(vL, bL, params) + flux_still_1d(vR, bR, params)) \
        - 0.5 * alpha * (vR - vL)


def fluctuation_still_1d(vL, vR, bL, bR, params):
    """Exact segment-path integral of the coupling term between two traces."""
    h1m, _, wm, _ = np.asarray(vL, dtype=float)
    h1p, _, wp, _ = np.asarray(vR, dtype=float)
    g, r = params.g, params.r
    dw = wp - wm
    z = np.zeros(np.broadcast(dw, bL, bR).shape)
    c2 = 0.5 * g * (h1m + h1p) * dw
    c4 = -0.5 * g * (bL + bR) * dw + 0.5 * g * r * ((wm - bL) + (wp - bR)) * (h1p - h1m)
    return np.array([z, c2 + z, z, c4 + z])


def _fluctuation_2d(vL, vR, bL, bR, direction, params):
    h1m, wm = vL[0], vL[3]
    h1p, wp = vR[0], vR[3]
    g, r = params.g, params.r
    dw = wp - wm
    out = np.zeros_like(vL)
    mom1, mom2 = (1, 4) if direction == 0 else (2, 5)
    out[mom1] = 0.5 * g * (h1m + h1p) * dw
    out[mom2] = -0.5 * g * (bL + bR) * dw + 0.5 * g * r * ((wm - bL) + (wp - bR)) * (h1p - h1m)
    return out


def _apply_coupling_2d(v, b, dv, direction, params):
    h1, w = v[0], v[3]
    g, r = params.g, params.r
    out = np.zeros_like(dv)
    mom1, mom2 = (1, 4) if direction == 0 else (2, 5)
    out[mom1] = g * h1 * dv[3]
    out[mom2] = g * r * (w - b) * dv[0] - g * b * dv[3]
    return out


# -- wave speed bound ------------------------------------------------------------

def _still_to_cons(v, b):
    return np.array([v[0], v[1], v[2] - b, v[3]])


def lf_alpha_global(coef, ctx):
    """Global wave-speed bound over all interface traces; sets ``ctx.hyperbolic``."""
    basis = ctx.basis
    if ctx.dim == 1:
        left = (coef @ basis.left).T
        right = coef.sum(axis=-1).T
        bl = ctx.bottom @ basis.left
        br = ctx.bottom.sum(axis=-1)
        states = np.concatenate([_still_to_cons(left, bl), _still_to_cons(right, br)], axis=1)
    else:
        states = []
        for tr_v, tr_b in _edge_traces_2d(coef, ctx):
            for s in (0, 1):
                v = tr_v[s]
                b = tr_b[s]
                states.append(np.array([v[0], v[1], v[3] - b, v[4]]).reshape(4, -1))
                states.append(np.array([v[0], v[2], v[3] - b, v[5]]).reshape(4, -1))
        states = np.concatenate(states, axis=1)
    if np.any(states[0] <= 0) or np.any(states[2] <= 0):
        raise DomainError("nonpositive layer thickness at an interface trace")
    alpha, real = max_wave_speed(states, ctx.params)
    ctx.hyperbolic = real
    return alpha


# -- 1D ----------------------------------------------------------------------------

def _volume_flux_1d(f, basis):
    """``int f P_m'`` on the reference cell for ``f`` of shape ``(c, nx, nq)``.

    A per-cell constant is split off and integrated exactly, so cellwise constant
    fluxes contribute no round-off (needed for bitwise-level well-balance).
    """
    f0 = f[..., :1]
    weak = np.moveaxis((f - f0) * basis.weights, 0, 1) @ basis.D
    jump = basis.right - basis.left
    return weak + f0[..., 0].T[:, :, None] * jump[None, None, :]


def rhs_still_1d(coef, ctx, t=0.0):
    """Time derivative of the modal coefficients ``coef`` (shape ``(nx, 4, K)``)."""
    basis, params = ctx.basis, ctx.params
    V, D, wq = basis.V, basis.D, basis.weights
    vq = np.moveaxis(coef @ V.T, 1, 0)
    bq = ctx.bottom @ V.T
    try:
        f = flux_still_1d(vq, bq, params)
    except DomainError as exc:
        bad = np.nonzero(np.any((vq[0] <= 0) | (vq[2] - bq <= 0), axis=1))[0]
        raise DomainError(f"{exc} in cell(s) {bad[:10].tolist()}") from exc
    weak = _volume_flux_1d(f, basis)
    if ctx.include_coupling:
        vxi = np.moveaxis(coef @ D.T, 1, 0)
        Gv = apply_coupling_still_1d(vq, bq, vxi, params)
        weak -= np.moveaxis(Gv * wq, 0, 1) @ V

    left = (coef @ basis.left).T
    right = coef.sum(axis=-1).T
    bl = ctx.bottom @ basis.left
    br = ctx.bottom.sum(axis=-1)
    minus, plus = interface_values(np.vstack([left, bl]), np.vstack([right, br]),
                                   ctx.bc, t, "still", params)
    vm, bm = minus[:4], minus[4]
    vp, bp = plus[:4], plus[4]
    F = lf_flux(vm, vp, bm, bp, ctx.alpha, params)
    if ctx.include_coupling:
        Dg = fluctuation_still_1d(vm, vp, bm, bp, params)
    else:
        Dg = np.zeros_like(F)
    # right interface of cell j is j+1, left is j
    right_term = (F[:, 1:] + 0.5 * Dg[:, 1:]).T  # (nx, 4)
    left_term = (F[:, :-1] - 0.5 * Dg[:, :-1]).T
    weak -= right_term[:, :, None] * basis.right[None, None, :]
    weak += left_term[:, :, None] * basis.left[None, None, :]
    return weak * ((2 * np.arange(basis.nmodes) + 1) / ctx.mesh.dx)


# -- 2D ----------------------------------------------------------------------------

def _edge_traces_2d(coef, ctx):
    """Edge traces at the Gauss nodes of the transverse direction.

    Returns ``[(vx, bx), (vy, by)]`` where ``vx[0]`` is the trace on the left
    edge (xi = -1) of every cell, ``vx[1]`` on the right edge, each of shape
    ``(6, nx, ny, nq)``; likewise for y.
    """
    basis = ctx.basis
    V = basis.V
    lf, rt = basis.left, basis.right
    out = []
    for side_axis in (0, 1):
        traces_v, traces_b = [], []
        for e in (lf, rt):
            if side_axis == 0:
                tv = np.einsum("ijcab,a,qb->cijq", coef, e, V, optimize=True)
                tb = np.einsum("ijab,a,qb->ijq", ctx.bottom, e, V, optimize=True)
            else:
                tv = np.einsum("ijcab,b,qa->cijq", coef, e, V, optimize=True)
                tb = np.einsum("ijab,b,qa->ijq", ctx.bottom, e, V, optimize=True)
            traces_v.append(tv)
            traces_b.append(tb)
        out.append((traces_v, traces_b))
    return out


def rhs_still_2d(coef, ctx, t=0.0):
    """Time derivative of 2D coefficients ``coef`` (shape ``(nx, ny, 6, K, K)``)."""
    basis, params, mesh = ctx.basis, ctx.params, ctx.mesh
    V, D, wq = basis.V, basis.D, basis.weights
    K = basis.nmodes
    vq = np.einsum("ijcab,pa,qb->cijpq", coef, V, V, optimize=True)
    bq = np.einsum("ijab,pa,qb->ijpq", ctx.bottom, V, V, optimize=True)
    W2 = wq[:, None] * wq[None, :]
    jump = basis.right - basis.left

    terms = []
    for direction in (0, 1):
        f, _ = flux_coupling_still_2d(vq, bq, direction, params)
        f0 = f[..., :1, :1]
        const = np.moveaxis(f0[..., 0, 0], 0, -1)[..., None] * 2.0 * jump  # (nx, ny, c, K)
        if direction == 0:
            X = np.einsum("cijpq,pq,pa,qb->ijcab", f - f0, W2, D, V, optimize=True)
            X[..., :, 0] += const
        else:
            X = np.einsum("cijpq,pq,pa,qb->ijcab", f - f0, W2, V, D, optimize=True)
            X[..., 0, :] += const
        if ctx.include_coupling:
            if direction == 0:
                dv = np.einsum("ijcab,pa,qb->cijpq", coef, D, V, optimize=True)
            else:
                dv = np.einsum("ijcab,pa,qb->cijpq", coef, V, D, optimize=True)
            Gv = _apply_coupling_2d(vq, bq, dv, direction, params)
            X -= np.einsum("cijpq,pq,pa,qb->ijcab", Gv, W2, V, V, optimize=True)
        terms.append(X)

    (vx, bx), (vy, by) = _edge_traces_2d(coef, ctx)
    for direction, (tv, tb) in enumerate(((vx, bx), (vy, by))):
        # move the normal index to axis 1 so interfaces line up along it
        if direction == 0:
            left_v, right_v = tv[0], tv[1]
            left_b, right_b = tb[0][None], tb[1][None]
        else:
            left_v = np.swapaxes(tv[0], 1, 2)
            right_v = np.swapaxes(tv[1], 1, 2)
            left_b = np.swapaxes(tb[0], 0, 1)[None]
            right_b = np.swapaxes(tb[1], 0, 1)[None]
        L = np.concatenate([left_v, left_b])
        R = np.concatenate([right_v, right_b])
        minus, plus = interface_values_2d(L, R, ctx.bc.is_periodic)
        vm, bm = minus[:6], minus[6]
        vp, bp = plus[:6], plus[6]
        fm, _ = flux_coupling_still_2d(vm, bm, direction, params)
        fp, _ = flux_coupling_still_2d(vp, bp, direction, params)
        F = 0.5 * (fm + fp) - 0.5 * ctx.alpha * (vp - vm)
        if ctx.include_coupling:
            Dg = _fluctuation_2d(vm, vp, bm, bp, direction, params)
        else:
            Dg = np.zeros_like(F)
        right_term = F[:, 1:] + 0.5 * Dg[:, 1:]  # (6, n_normal, n_trans, nq)
        left_term = F[:, :-1] - 0.5 * Dg[:, :-1]
        # integrate against P_b along the edge
        Rt = np.einsum("cnsq,q,qb->ncsb", right_term, wq, V, optimize=True)
        Lt = np.einsum("cnsq,q,qb->ncsb", left_term, wq, V, optimize=True)
        if direction == 0:
            # Rt[i, c, j, b] -> coefficient (i, j, c, a, b)
            edge = (-np.einsum("icjb,a->ijcab", Rt, basis.right, optimize=True)
                    + np.einsum("icjb,a->ijcab", Lt, basis.left, optimize=True))
        else:
            # normal index is j, transverse i; mode along edge is a
            edge = (-np.einsum("jcia,b->ijcab", Rt, basis.right, optimize=True)
                    + np.einsum("jcia,b->ijcab", Lt, basis.left, optimize=True))
        terms[direction] = terms[direction] + edge

    modes = 2 * np.arange(K) + 1
    X, Y = terms
    scale = np.outer(modes, modes) / (mesh.dx * mesh.dy)
    return (X * (0.5 * mesh.dy) + Y * (0.5 * mesh.dx)) * scale
