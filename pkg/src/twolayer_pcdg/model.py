"""Two-layer shallow water physics.

Array conventions: the component axis is always the *first* axis, so a state
``v`` of shape ``(4, ...)`` carries ``v[0] = h1`` and so on, with arbitrary
trailing shape.  Functions accept plain sequences for single states.

Variable sets:

* conservative ``u = (h1, m1, h2, m2)`` (``+ b`` for the moving-water scheme)
* still equilibrium ``v = (h1, m1, w, m2)`` with ``w = h2 + b``; in 2D
  ``(h1, m1, n1, w, m2, n2)``
* moving equilibrium ``v = (E1, m1, E2, m2, b)``
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SolverError

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 100
MAX_HALVINGS = 40


@dataclass(frozen=True)
class PhysParams:
    g: float = 9.81
    r: float = 0.98

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("gravity must be positive")
        if not 0 < self.r < 1:
            raise ValueError("density ratio must lie in (0, 1)")


def _arr(x):
    return np.asarray(x, dtype=float)


def _check_positive(name, *arrays):
    for a in arrays:
        bad = ~(a > 0)
        if np.any(bad):
            raise DomainError(f"nonpositive {name}: min {np.min(a):.6g}")


# -- still-water variables ---------------------------------------------------

def flux_still_1d(v, b, params):
    """Flux ``f(v)`` of the still-water formulation ``v = (h1, m1, w, m2)``."""
    h1, m1, w, m2 = _arr(v)
    b = _arr(b)
    h2 = w - b
    _check_positive("layer thickness", h1, h2)
    g = params.g
    return np.array([m1, m1 * m1 / h1 + 0.5 * g * h1 * h1, m2 * np.ones_like(h2),
                     m2 * m2 / h2 + 0.5 * g * w * w])


def coupling_still_1d(v, b, params):
    """Coupling matrix ``G(v)`` (4x4 leading axes)."""
    h1, _, w, _ = _arr(v)
    b = _arr(b)
    _check_positive("layer thickness", h1, w - b)
    g, r = params.g, params.r
    shape = np.broadcast(h1, b).shape
    G = np.zeros((4, 4) + shape)
    G[1, 2] = g * h1
    G[3, 0] = g * r * (w - b)
    G[3, 2] = -g * b
    return G


def apply_coupling_still_1d(v, b, dv, params):
    """``G(v) @ dv`` without forming the matrix."""
    h1, _, w, _ = v
    g, r = params.g, params.r
    z = np.zeros(np.broadcast(h1, dv[0]).shape)
    return np.array([z, g * h1 * dv[2], z, g * r * (w - b) * dv[0] - g * b * dv[2]])


def flux_coupling_still_2d(v, b, direction, params):
    """Directional flux and coupling matrix for ``v = (h1, m1, n1, w, m2, n2)``.

    ``direction`` is 0 (x) or 1 (y).  The coupling matrices put the interlayer
    and bottom terms on the left-hand side with the same signs as the 1D case.
    """
    h1, m1, n1, w, m2, n2 = _arr(v)
    b = _arr(b)
    h2 = w - b
    _check_positive("layer thickness", h1, h2)
    g, r = params.g, params.r
    p1 = 0.5 * g * h1 * h1
    p2 = 0.5 * g * w * w
    if direction == 0:
        f = np.array([m1, m1 * m1 / h1 + p1, m1 * n1 / h1, m2 * np.ones_like(h2),
                      m2 * m2 / h2 + p2, m2 * n2 / h2])
        mom1, mom2 = 1, 4
    elif direction == 1:
        f = np.array([n1, m1 * n1 / h1, n1 * n1 / h1 + p1, n2 * np.ones_like(h2),
                      m2 * n2 / h2, n2 * n2 / h2 + p2])
        mom1, mom2 = 2, 5
    else:
        raise ValueError("direction must be 0 or 1")
    G = np.zeros((6, 6) + np.broadcast(h1, b).shape)
    G[mom1, 3] = g * h1
    G[mom2, 0] = g * r * h2
    G[mom2, 3] = -g * b
    return f, G


# -- conservative variables (moving-water scheme) ------------------------------

def flux_conservative(u, params):
    """Flux of the augmented system ``u = (h1, m1, h2, m2, b)``; last entry is 0."""
    u = _arr(u)
    h1, m1, h2, m2 = u[:4]
    _check_positive("layer thickness", h1, h2)
    g = params.g
    return np.array([m1, m1 * m1 / h1 + 0.5 * g * h1 * h1, m2,
                     m2 * m2 / h2 + 0.5 * g * h2 * h2, np.zeros_like(h1)])


def coupling_conservative(u, params):
    """5x5 coupling matrix of the augmented system."""
    h1, _, h2, _, _ = _arr(u)
    g, r = params.g, params.r
    G = np.zeros((5, 5) + np.shape(h1))
    G[1, 2] = g * h1
    G[1, 4] = g * h1
    G[3, 0] = g * r * h2
    G[3, 4] = g * h2
    return G


def cons_to_equil_moving(u, params):
    """``(h1, m1, h2, m2, b) -> (E1, m1, E2, m2, b)``."""
    h1, m1, h2, m2, b = _arr(u)
    _check_positive("layer thickness", h1, h2)
    g, r = params.g, params.r
    E1 = 0.5 * m1 * m1 / (h1 * h1) + g * (h1 + h2 + b)
    E2 = 0.5 * m2 * m2 / (h2 * h2) + g * (r * h1 + h2 + b)
    return np.array([E1, m1, E2, m2, b])


def _depth_residual(h1, h2, E1, m1, E2, m2, b, g, r):
    Q1 = (g * h1 + g * (h2 + b) - E1) * h1 * h1 + 0.5 * m1 * m1
    Q2 = (g * h2 + g * (r * h1 + b) - E2) * h2 * h2 + 0.5 * m2 * m2
    return Q1, Q2


def _depth_jacobian(h1, h2, E1, E2, b, g, r):
    a11 = 3 * g * h1 * h1 + 2 * (g * (h2 + b) - E1) * h1
    a12 = g * h1 * h1
    a21 = g * r * h2 * h2
    a22 = 3 * g * h2 * h2 + 2 * (g * (r * h1 + b) - E2) * h2
    return a11, a12, a21, a22


def _reduced_system(h1, h2, E1, m1, E2, m2, b, g, r):
    """Residual/Jacobian with zero-discharge cubics replaced by their linear factor.

    For ``m = 0`` the cubic is ``h^2 (g h + ...)``; dividing out ``h^2`` removes the
    spurious double root at zero.
    """
    Q1, Q2 = _depth_residual(h1, h2, E1, m1, E2, m2, b, g, r)
    a11, a12, a21, a22 = _depth_jacobian(h1, h2, E1, E2, b, g, r)
    z1 = m1 == 0
    z2 = m2 == 0
    if np.any(z1):
        Q1 = np.where(z1, g * h1 + g * (h2 + b) - E1, Q1)
        a11 = np.where(z1, g, a11)
        a12 = np.where(z1, g, a12)
    if np.any(z2):
        Q2 = np.where(z2, g * h2 + g * (r * h1 + b) - E2, Q2)
        a21 = np.where(z2, g * r, a21)
        a22 = np.where(z2, g, a22)
    return Q1, Q2, a11, a12, a21, a22


def solve_depths(E1, m1, E2, m2, b, h1, h2, params, tol=NEWTON_TOL,
                 maxiter=NEWTON_MAXITER):
    """Vectorised damped Newton for the two coupled depth cubics.

    Returns ``(h1, h2, converged, iterations)``; never raises.  A point counts as
    converged once ``Q`` has reached the round-off level of its own terms, after
    a few steps with ``max|Q| <= tol``, or when the Newton update has stalled
    below 4 ulp.  A stalled update is not applied, so
    feeding a converged result back in returns it unchanged.
    """
    g, r = params.g, params.r
    E1, m1, E2, m2, b, h1, h2 = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (E1, m1, E2, m2, b, h1, h2)))
    h1 = h1.copy()
    h2 = h2.copy()
    done = np.zeros(h1.shape, dtype=bool)
    iters = np.zeros(h1.shape, dtype=int)
    # both discharges zero: the reduced system is linear, solve it in closed form
    still = (m1 == 0) & (m2 == 0)
    if np.any(still):
        d1 = (E1 - E2) / (g * (1 - r))
        d2 = E2 / g - r * d1 - b
        pos = still & (d1 > 0) & (d2 > 0)
        h1 = np.where(pos, d1, h1)
        h2 = np.where(pos, d2, h2)
        done |= pos
    ok_guess = (h1 > 0) & (h2 > 0)
    eps = np.finfo(float).eps
    below = np.zeros(h1.shape, dtype=int)  # iterations spent with max|Q| <= tol
    for _ in range(maxiter + 1):
        Q1, Q2 = _reduced_system(h1, h2, E1, m1, E2, m2, b, g, r)[:2]
        # once under tol keep polishing to the round-off level of Q itself (a few
        # extra steps at most), so the depths do not depend on the seed
        s1 = (np.abs(g * h1) + np.abs(g * (h2 + b)) + np.abs(E1)) * h1 * h1 + 0.5 * m1 * m1
        s2 = (np.abs(g * h2) + np.abs(g * (r * h1 + b)) + np.abs(E2)) * h2 * h2 + 0.5 * m2 * m2
        under = (np.maximum(np.abs(Q1), np.abs(Q2)) <= tol) & ok_guess
        floor = (np.abs(Q1) <= 16 * eps * s1) & (np.abs(Q2) <= 16 * eps * s2)
        below = np.where(under, below + 1, 0)
        done |= (floor & ok_guess) | (below > 3)
        active = ~done & ok_guess
        if not active.any():
            break
        # the update comes from the energy form Q_i / h_i^2, whose Jacobian is exact
        # for still water; Newton on the cubics themselves can jump to the other
        # branch from a seed a few percent off when 1 - r is small
        with np.errstate(divide="ignore", invalid="ignore"):
            F1 = g * (h1 + h2 + b) - E1 + 0.5 * m1 * m1 / (h1 * h1)
            F2 = g * (r * h1 + h2 + b) - E2 + 0.5 * m2 * m2 / (h2 * h2)
            b11 = g - m1 * m1 / h1**3
            b22 = g - m2 * m2 / h2**3
            det = b11 * b22 - g * g * r
            d1 = -(b22 * F1 - g * F2) / det
            d2 = -(-g * r * F1 + b11 * F2) / det
        bad = active & ~(np.isfinite(d1) & np.isfinite(d2))
        ok_guess &= ~bad
        active &= ~bad
        step = np.where(active, 1.0, 0.0)
        for _ in range(MAX_HALVINGS):
            neg = active & ((h1 + step * d1 <= 0) | (h2 + step * d2 <= 0))
            if not neg.any():
                break
            step = np.where(neg, 0.5 * step, step)
        else:
            neg = active & ((h1 + step * d1 <= 0) | (h2 + step * d2 <= 0))
            ok_guess &= ~neg
            active &= ~neg
        stalled = active & (np.abs(step * d1) <= 4 * eps * h1) & (
            np.abs(step * d2) <= 4 * eps * h2)
        done |= stalled
        active &= ~stalled
        h1 = np.where(active, h1 + step * d1, h1)
        h2 = np.where(active, h2 + step * d2, h2)
        iters += active
    return h1, h2, done, iters


def equil_to_cons_moving(v, guess, params, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Recover ``(h1, h2)`` from ``v = (E1, m1, E2, m2, b)`` by Newton iteration."""
    E1, m1, E2, m2, b = _arr(v)
    h1g, h2g = _arr(guess)
    if np.any(h1g <= 0) or np.any(h2g <= 0):
        raise DomainError("Newton guess must have positive depths")
    h1, h2, ok, _ = solve_depths(E1, m1, E2, m2, b, h1g, h2g, params, tol, maxiter)
    if not np.all(ok):
        Q1, Q2 = _depth_residual(h1, h2, E1, m1, E2, m2, b, params.g, params.r)
        res = np.maximum(np.abs(Q1), np.abs(Q2))
        raise SolverError(
            f"depth Newton failed at {np.count_nonzero(~ok)} point(s), "
            f"max residual {np.max(np.where(ok, 0, res)):.3e}",
            last_iterate=(h1, h2), residual=res, where=np.nonzero(np.atleast_1d(~ok)))
    if np.ndim(h1) == 0:
        return float(h1), float(h2)
    return h1, h2


def dh_dv(h1, h2, v, params):
    """``d(h1, h2) / d(E1, m1, E2, m2, b)`` via the implicit function theorem.

    Returns shape ``(2, 5, ...)``.
    """
    E1, m1, E2, m2, b = _arr(v)
    h1 = _arr(h1)
    h2 = _arr(h2)
    g, r = params.g, params.r
    a11, a12, a21, a22 = _depth_jacobian(h1, h2, E1, E2, b, g, r)
    det = a11 * a22 - a12 * a21
    scale = np.abs(a11 * a22) + np.abs(a12 * a21)
    if np.any(~(np.abs(det) > 1e-14 * scale)):
        raise SolverError("singular depth Jacobian (critical state)")
    z = np.zeros_like(det)
    # dQ/dv columns for (E1, m1, E2, m2, b)
    dQ1 = np.array([-h1 * h1, m1 * np.ones_like(h1), z, z, g * h1 * h1])
    dQ2 = np.array([z, z, -h2 * h2, m2 * np.ones_like(h2), g * h2 * h2])
    inv11, inv12, inv21, inv22 = a22 / det, -a12 / det, -a21 / det, a11 / det
    out = np.empty((2, 5) + det.shape)
    out[0] = -(inv11 * dQ1 + inv12 * dQ2)
    out[1] = -(inv21 * dQ1 + inv22 * dQ2)
    return out


def matrix_L(u):
    """Matrix with ``f(u)_x + G(u) u_x = L(u) vtilde(u)_x``, ``vtilde = (E1, m1, E2, m2, 0)``."""
    h1, m1, h2, m2 = _arr(u)[:4]
    L = np.zeros((5, 5) + np.shape(h1))
    L[0, 1] = 1.0
    L[1, 0] = h1
    L[1, 1] = m1 / h1
    L[2, 3] = 1.0
    L[3, 2] = h2
    L[3, 3] = m2 / h2
    L[4, 4] = 1.0
    return L


# -- eigenvalues ---------------------------------------------------------------

def _depressed_quartic(u, params):
    """Coefficients ``mu^4 + p mu^2 + q mu + s`` of the characteristic polynomial
    after the shift ``lambda = mu + (u1 + u2) / 2``."""
    u = _arr(u)
    h1, m1, h2, m2 = u[:4]
    _check_positive("layer thickness", h1, h2)
    u1, u2 = m1 / h1, m2 / h2
    a, c = params.g * h1, params.g * h2
    d = 0.5 * (u1 - u2)
    p = -2 * d * d - a - c
    q = 2 * d * (c - a)
    s = (d * d - a) * (d * d - c) - params.r * a * c
    return 0.5 * (u1 + u2), d, a, c, p, q, s


def _cubic_roots(a2, a1, a0):
    """All roots of ``z^3 + a2 z^2 + a1 z + a0`` (complex, Cardano)."""
    P = a1 - a2 * a2 / 3
    Q = 2 * a2**3 / 27 - a2 * a1 / 3 + a0
    disc = np.sqrt((Q / 2) ** 2 + (P / 3) ** 3 + 0j)
    C1 = -Q / 2 + disc
    C2 = -Q / 2 - disc
    C = np.where(np.abs(C1) >= np.abs(C2), C1, C2) ** (1.0 / 3.0)
    omega = np.exp(2j * np.pi / 3)
    roots = []
    for kk in range(3):
        Ck = C * omega**kk
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(Ck) > 0, Ck - P / (3 * Ck), 0j)
        roots.append(t - a2 / 3)
    return np.array(roots)


def _polish(coeffs, z, steps):
    """Guarded Newton polish of roots ``z`` of the monic polynomial ``coeffs``."""
    for _ in range(steps):
        pz = np.zeros_like(z)
        dz = np.zeros_like(z)
        for cf in coeffs:
            dz = dz * z + pz
            pz = pz * z + cf
        with np.errstate(divide="ignore", invalid="ignore"):
            znew = z - pz / dz
        pn = np.zeros_like(z)
        for cf in coeffs:
            pn = pn * znew + cf
        better = np.isfinite(znew) & (np.abs(pn) < np.abs(pz))
        z = np.where(better, znew, z)
    return z


def quartic_roots(u, params, polish=1):
    """Roots of the characteristic quartic via the resolvent cubic (complex array ``(4, ...)``)."""
    shift, _, _, _, p, q, s = _depressed_quartic(u, params)
    p = p + 0j
    q = q + 0j
    s = s + 0j
    z = _cubic_roots(2 * p, p * p - 4 * s, -q * q)
    z = _polish([1.0, 2 * p, p * p - 4 * s, -q * q], z, 2)
    zbest = np.take_along_axis(z, np.argmax(z.real, axis=0)[None], axis=0)[0]
    sigma = np.sqrt(zbest)
    small = np.abs(sigma) <= 1e-150
    with np.errstate(divide="ignore", invalid="ignore"):
        qs = np.where(small, 0j, q / np.where(small, 1.0, sigma))
    A = 0.5 * (p + zbest - qs)
    B = 0.5 * (p + zbest + qs)
    dA = np.sqrt(sigma * sigma - 4 * A)
    dB = np.sqrt(sigma * sigma - 4 * B)
    mu = np.array([0.5 * (-sigma - dA), 0.5 * (-sigma + dA),
                   0.5 * (sigma - dB), 0.5 * (sigma + dB)])
    mu = _polish([1.0, 0.0, p, q, s], mu, polish)
    return mu + shift


class Eigenvalues(NamedTuple):
    speeds: np.ndarray
    real: np.ndarray


def eigenvalues_exact(u, params):
    """Four wave speeds of the two-layer system from the closed-form quartic roots.

    Real roots are returned sorted ascending.  Where the system is not hyperbolic
    (complex roots), complex entries are replaced by their moduli and ``real``
    is False.
    """
    lam = quartic_roots(u, params)
    shift, d, a, c, *_ = _depressed_quartic(u, params)
    scale = np.sqrt(a + c) + np.abs(d) + np.abs(shift)
    is_real = np.all(np.abs(lam.imag) <= 1e-7 * scale, axis=0)
    speeds = np.where(is_real, lam.real, np.abs(lam))
    speeds = np.sort(speeds, axis=0)
    return Eigenvalues(speeds, is_real)


def max_wave_speed(u, params):
    """Largest ``|lambda|`` over all states in ``u``; flags non-hyperbolic states."""
    ev = eigenvalues_exact(u, params)
    return float(np.max(np.abs(ev.speeds))), bool(np.all(ev.real))


def eigenvalues_approx(u, params):
    """First-order (in ``u1 - u2``) external/internal speeds and hyperbolicity flag.

    Returns ``((ext-, ext+), (int-, int+), hyperbolic)``.
    """
    h1, m1, h2, m2 = _arr(u)[:4]
    _check_positive("layer thickness", h1, h2)
    g = params.g
    gr = (1 - params.r) * g
    u1, u2 = m1 / h1, m2 / h2
    H = h1 + h2
    Um = (h1 * u1 + h2 * u2) / H
    Uc = (h1 * u2 + h2 * u1) / H
    ce = np.sqrt(g * H)
    hyper = (u1 - u2) ** 2 < gr * H
    rad = gr * h1 * h2 / H * (1 - (u1 - u2) ** 2 / (gr * H))
    ci = np.sqrt(np.maximum(rad, 0.0))
    return (Um - ce, Um + ce), (Uc - ci, Uc + ci), hyper


# -- limiter eigensystem -----------------------------------------------------------

class EigenSystem(NamedTuple):
    lambdas: np.ndarray
    R: np.ndarray
    L: np.ndarray
    ok: np.ndarray


def limiter_matrix(u, params):
    """Jacobian similarity transform acting on ``(E1, m1, E2, m2)``."""
    h1, m1, h2, m2 = _arr(u)[:4]
    g, r = params.g, params.r
    u1, u2 = m1 / h1, m2 / h2
    A = np.zeros((4, 4) + np.shape(h1))
    A[0, 0], A[0, 1], A[0, 3] = u1, g, g
    A[1, 0], A[1, 1] = h1, u1
    A[2, 1], A[2, 2], A[2, 3] = g * r, u2, g
    A[3, 2], A[3, 3] = h2, u2
    return A


def limiter_eigensystem(u, params):
    """Right/left eigenvectors for characteristic limiting of ``(E1, m1, E2, m2)``.

    Vectorised over trailing axes; ``R`` and ``L`` have shape ``(..., 4, 4)`` with
    eigenvectors in the columns of ``R`` and ``L = R^{-1}``.  States with complex or
    (nearly) repeated eigenvalues get ``ok = False`` and identity matrices.
    """
    u = _arr(u)
    h1, m1, h2, m2 = u[:4]
    g = params.g
    ev = eigenvalues_exact(u[:4], params)
    lam = ev.speeds  # (4, ...)
    u1, u2 = m1 / h1, m2 / h2
    c1s, c2s = g * h1, g * h2
    K = c1s - (u1 - lam) ** 2
    cols = np.array([u1 - lam, -c1s / g * np.ones_like(lam), (lam - u2) * K / c2s, K / g])
    R = np.moveaxis(cols, (0, 1), (-2, -1))  # (..., comp, k)
    gaps = np.diff(lam, axis=0)
    scale = np.max(np.abs(lam), axis=0) + np.sqrt(c1s + c2s)
    ok = ev.real & np.all(gaps > 1e-10 * scale, axis=0)
    eye = np.broadcast_to(np.eye(4), R.shape)
    R = np.where(ok[..., None, None], R, eye)
    cond_ok = np.abs(np.linalg.det(R)) > 0
    ok = ok & cond_ok
    R = np.where(ok[..., None, None], R, eye)
    L = np.linalg.inv(R)
    return EigenSystem(lam, R, L, ok)


def still_jacobian(v, b, params, direction=0):
    """Quasi-linear matrix ``df/dv + G`` of the still-variable system at frozen ``b``.

    ``v`` has 4 components in 1D and 6 in 2D (``direction`` selects x or y).
    Returns shape ``(..., n, n)``.
    """
    v = _arr(v)
    b = _arr(b)
    g, r = params.g, params.r
    if v.shape[0] == 4:
        h1, m1, w, m2 = v
        h2 = w - b
        u1, u2 = m1 / h1, m2 / h2
        A = np.zeros(np.shape(h1) + (4, 4))
        A[..., 0, 1] = 1.0
        A[..., 1, 0] = g * h1 - u1 * u1
        A[..., 1, 1] = 2 * u1
        A[..., 1, 2] = g * h1
        A[..., 2, 3] = 1.0
        A[..., 3, 0] = g * r * h2
        A[..., 3, 2] = g * h2 - u2 * u2
        A[..., 3, 3] = 2 * u2
        return A
    h1, m1, n1, w, m2, n2 = v
    h2 = w - b
    # normal/transverse discharge slots for the chosen direction
    (p1, q1, p2, q2) = (1, 2, 4, 5) if direction == 0 else (2, 1, 5, 4)
    un1, ut1 = v[p1] / h1, v[q1] / h1
    un2, ut2 = v[p2] / h2, v[q2] / h2
    A = np.zeros(np.shape(h1) + (6, 6))
    A[..., 0, p1] = 1.0
    A[..., p1, 0] = g * h1 - un1 * un1
    A[..., p1, p1] = 2 * un1
    A[..., p1, 3] = g * h1
    A[..., q1, 0] = -un1 * ut1
    A[..., q1, p1] = ut1
    A[..., q1, q1] = un1
    A[..., 3, p2] = 1.0
    A[..., p2, 0] = g * r * h2
    A[..., p2, 3] = g * h2 - un2 * un2
    A[..., p2, p2] = 2 * un2
    A[..., q2, 3] = -un2 * ut2
    A[..., q2, p2] = ut2
    A[..., q2, q2] = un2
    return A


def still_eigensystem(v, b, params, direction=0):
    """Numerical eigen-decomposition of :func:`still_jacobian` for limiting.

    States with complex or (nearly) repeated eigenvalues, or an ill-conditioned
    eigenvector matrix, get ``ok = False`` and identity matrices.
    """
    A = still_jacobian(v, b, params, direction)
    n = A.shape[-1]
    lam, R = np.linalg.eig(A)
    real = np.all(np.abs(lam.imag) <= 1e-12 * (1 + np.abs(lam.real)), axis=-1)
    R = R.real
    lam = lam.real
    eye = np.broadcast_to(np.eye(n), R.shape)
    R = np.where(real[..., None, None], R, eye)
    with np.errstate(all="ignore"):
        L = np.linalg.inv(R)
        # infinity-norm condition number, cheaper than an SVD per cell
        cond = np.abs(R).sum(axis=-1).max(axis=-1) * np.abs(L).sum(axis=-1).max(axis=-1)
    ok = real & np.isfinite(cond) & (cond < 1e10)
    R = np.where(ok[..., None, None], R, eye)
    L = np.where(ok[..., None, None], L, eye)
    return EigenSystem(np.moveaxis(lam, -1, 0), R, L, ok)
