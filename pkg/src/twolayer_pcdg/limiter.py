"""TVB minmod slope limiting on equilibrium variables.

Troubled cells are detected componentwise on the equilibrium variables and
limited in local characteristic fields: for the still scheme those of the
quasi-linear matrix in ``(h1, m1, w, m2)`` (2D: per direction), for the moving
scheme those of the transformed matrix acting on ``(E1, m1, E2, m2)``, leaving
``b`` alone.  Plain componentwise limiting of the still variables is available
with ``characteristic=False``.  Troubled cells keep their average, get the
limited slope and lose modes >= 2.  An optional scaling towards the cell
average (``positivity=True``) keeps depths away from zero in violent runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import limiter_eigensystem, still_eigensystem


@dataclass(frozen=True)
class LimiterConfig:
    M: float = 0.0
    enabled: bool = True
    characteristic: bool = True
    positivity: bool = False

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("TVB constant must be non-negative")


def minmod(*args):
    """Classical minmod of equally shaped arrays."""
    a = np.asarray(args, dtype=float)
    s = np.sign(a[0])
    same = np.all(np.sign(a) == s, axis=0)
    return np.where(same, s * np.min(np.abs(a), axis=0), 0.0)


def minmod_tvb(a1, a2, a3, M, h):
    """TVB-modified minmod: ``a1`` itself when ``|a1| <= M h^2``."""
    a1 = np.asarray(a1, dtype=float)
    out = np.where(np.abs(a1) <= M * h * h, a1, minmod(a1, a2, a3))
    return out if out.ndim else float(out)


def _neighbour_averages(avg, periodic, axis=0):
    """Averages of the left and right neighbours along ``axis`` (ghosts copy or wrap)."""
    if periodic:
        return np.roll(avg, 1, axis=axis), np.roll(avg, -1, axis=axis)
    n = avg.shape[axis]
    lo = np.take(avg, np.r_[0, 0:n - 1], axis=axis)
    hi = np.take(avg, np.r_[1:n, n - 1], axis=axis)
    return lo, hi


def _deviations(coef):
    """Right and left trace deviations from the average for ``coef[..., m]``."""
    K = coef.shape[-1]
    signs = (-1.0) ** np.arange(1, K)
    dev_r = coef[..., 1:].sum(axis=-1)
    dev_l = -(coef[..., 1:] * signs).sum(axis=-1)
    return dev_r, dev_l


ROUNDOFF = 1e-13


def _troubled(dev_r, dev_l, dplus, dminus, M, h, avg):
    """Cells where either limited deviation differs from the unlimited one.

    Differences at round-off level relative to the largest cell average
    component are ignored so that discrete equilibria carrying ~1e-16 noise
    (also in components that vanish, like a zero discharge) are not flagged.
    """
    mr = minmod_tvb(dev_r, dplus, dminus, M, h)
    ml = minmod_tvb(dev_l, dplus, dminus, M, h)
    noise = ROUNDOFF * np.maximum(np.abs(avg).max(axis=-1, keepdims=True), 1e-300)
    return (np.abs(mr - dev_r) > noise) | (np.abs(ml - dev_l) > noise)


def _characteristic_slopes(slope, dplus, dminus, es, M, h):
    """Limit ``slope (n, c)`` in the fields of ``es``; also report which rows changed.

    A slope the characteristic minmod leaves alone (up to the round-off of the
    L/R round trip) is reported unchanged, which keeps the limiter idempotent.
    """
    proj = lambda A, x: np.einsum("nij,nj->ni", A, x)
    s1 = proj(es.L, slope)
    sp = proj(es.L, dplus)
    sm = proj(es.L, dminus)
    lim = minmod_tvb(s1, sp, sm, M, h)
    scale = np.abs(s1) + np.abs(sp) + np.abs(sm)
    moved = np.any(np.abs(lim - s1) > 1e-12 * scale, axis=1)
    return proj(es.R, lim), moved


def limit_still(coef, config, dx, periodic=False, params=None, bottom_avg=None):
    """TVB limiting of a 1D still-variable field ``coef (nx, 4, K)``.

    With ``config.characteristic`` (and ``params``, ``bottom_avg (nx,)`` given)
    troubled cells are limited in characteristic fields, otherwise each
    component separately.  Returns ``(limited, troubled_mask (nx, ncomp))``.
    """
    if not config.enabled or coef.shape[-1] < 2:
        return coef, np.zeros(coef.shape[:2], dtype=bool)
    avg = coef[..., 0]
    lo, hi = _neighbour_averages(avg, periodic)
    dplus, dminus = hi - avg, avg - lo
    dev_r, dev_l = _deviations(coef)
    bad = _troubled(dev_r, dev_l, dplus, dminus, config.M, dx, avg)
    if not bad.any():
        return coef, bad
    out = coef.copy()
    if config.characteristic and params is not None and coef.shape[1] == 4:
        idx = np.nonzero(bad.any(axis=1))[0]
        es = still_eigensystem(avg[idx].T, bottom_avg[idx], params)
        slope, moved = _characteristic_slopes(coef[idx, :, 1], dplus[idx], dminus[idx], es,
                                              config.M, dx)
        if coef.shape[-1] > 2:
            moved |= np.any(coef[idx, :, 2:] != 0.0, axis=(1, 2))
        idx, slope = idx[moved], slope[moved]
        bad[:] = False
        bad[idx] = True
        out[idx, :, 1] = slope
        out[idx, :, 2:] = 0.0
        return out, bad
    slope = minmod_tvb(coef[..., 1], dplus, dminus, config.M, dx)
    out[..., 1] = np.where(bad, slope, coef[..., 1])
    out[..., 2:] = np.where(bad[..., None], 0.0, coef[..., 2:])
    return out, bad


def limit_moving(coef, config, dx, params, u_avg, periodic=False):
    """Characteristic TVB limiting of the moving-scheme field ``coef (nx, 5, K)``.

    ``u_avg`` holds conservative cell states ``(4, nx)`` used for the local
    eigenvectors.  Returns ``(limited, troubled (nx,), fallback (nx,))``.
    """
    nx = coef.shape[0]
    if not config.enabled or coef.shape[-1] < 2:
        return coef, np.zeros(nx, dtype=bool), np.zeros(nx, dtype=bool)
    ve = coef[:, :4, :]
    avg = ve[..., 0]
    lo, hi = _neighbour_averages(avg, periodic)
    dplus, dminus = hi - avg, avg - lo
    dev_r, dev_l = _deviations(ve)
    bad = _troubled(dev_r, dev_l, dplus, dminus, config.M, dx, avg).any(axis=1)
    fallback = np.zeros(nx, dtype=bool)
    if not bad.any():
        return coef, bad, fallback
    idx = np.nonzero(bad)[0]
    es = limiter_eigensystem(u_avg[:, idx], params)
    fallback[idx] = ~es.ok
    slope, moved = _characteristic_slopes(ve[idx, :, 1], dplus[idx], dminus[idx], es,
                                          config.M, dx)
    if coef.shape[-1] > 2:
        moved |= np.any(ve[idx, :, 2:] != 0.0, axis=(1, 2))
    idx, slope = idx[moved], slope[moved]
    bad[:] = False
    bad[idx] = True
    out = coef.copy()
    out[idx, :4, 1] = slope
    out[idx, :4, 2:] = 0.0
    return out, bad, fallback


def limit_still_2d(coef, config, dx, dy, periodic=False, params=None, bottom_avg=None):
    """Direction-by-direction TVB limiting of ``coef (nx, ny, ncomp, K, K)``.

    Deviations along x use the modes ``c[a, 0]``, along y ``c[0, b]``.  Troubled
    cells keep the average and the two limited first-order modes only; with
    ``config.characteristic`` each direction is limited in the fields of its
    own quasi-linear matrix.
    """
    if not config.enabled or coef.shape[-1] < 2:
        return coef, np.zeros(coef.shape[:3], dtype=bool)
    avg = coef[..., 0, 0]
    bad = np.zeros(avg.shape, dtype=bool)
    parts = []
    for axis, h, modes in ((0, dx, coef[..., :, 0]), (1, dy, coef[..., 0, :])):
        lo, hi = _neighbour_averages(avg, periodic, axis=axis)
        dplus, dminus = hi - avg, avg - lo
        dev_r, dev_l = _deviations(modes)
        bad |= _troubled(dev_r, dev_l, dplus, dminus, config.M, h, avg)
        parts.append((h, modes[..., 1], dplus, dminus))
    cells = bad.any(axis=-1)
    if not cells.any():
        return coef, bad
    slopes = []
    mask = bad
    if config.characteristic and params is not None and coef.shape[2] == 6:
        ii, jj = np.nonzero(cells)
        # cells whose higher modes are already gone only change if a slope moves
        moved = np.any(coef[ii, jj, :, 1:, 1:] != 0.0, axis=(1, 2, 3))
        if coef.shape[-1] > 2:
            moved |= np.any(coef[ii, jj, :, 2:, 0] != 0.0, axis=(1, 2))
            moved |= np.any(coef[ii, jj, :, 0, 2:] != 0.0, axis=(1, 2))
        for direction, (h, s1, dp, dm) in enumerate(parts):
            es = still_eigensystem(avg[ii, jj].T, bottom_avg[ii, jj], params, direction)
            lim, mv = _characteristic_slopes(s1[ii, jj], dp[ii, jj], dm[ii, jj], es, config.M, h)
            moved |= mv
            full = s1.copy()
            full[ii, jj] = lim
            slopes.append(full)
        cells = np.zeros_like(cells)
        cells[ii[moved], jj[moved]] = True
        mask = np.broadcast_to(cells[..., None], bad.shape)
        if not cells.any():
            return coef, np.array(mask)
    else:
        slopes = [np.where(bad, minmod_tvb(s1, dp, dm, config.M, h), s1)
                  for h, s1, dp, dm in parts]
    lim = np.zeros_like(coef)
    lim[..., 0, 0] = avg
    lim[..., 1, 0] = slopes[0]
    lim[..., 0, 1] = slopes[1]
    out = np.where(mask[..., None, None], lim, coef)
    return out, np.array(mask)


POSITIVITY_FRACTION = 0.05


def positivity_scale(coef, bottom, basis, fraction=POSITIVITY_FRACTION):
    """Scale higher modes towards the average where a depth gets too small.

    ``coef`` is a still field, 1D ``(nx, 4, K)`` or 2D ``(nx, ny, 6, K, K)``,
    with ``bottom`` of matching scalar shape.  Depths ``h1`` and ``w - b`` are
    checked at the quadrature nodes, edges and corners; a cell whose minimum
    falls below ``fraction`` of its average gets all non-constant modes multiplied
    by the largest factor that lifts the minimum back to that level.  Cells with
    comfortably positive depths, in particular any lake at rest, are untouched.
    Returns ``(coef, scaled_mask)``.
    """
    P = basis.tabulate(np.r_[-1.0, basis.rule.nodes, 1.0])[0]
    if coef.ndim == 3:
        h = np.stack([coef[:, 0], coef[:, 2] - bottom], axis=1)
        vals = h @ P.T
        avg = h[..., 0]
    else:
        h = np.stack([coef[:, :, 0], coef[:, :, 3] - bottom], axis=2)
        vals = np.einsum("ijcab,pa,qb->ijcpq", h, P, P, optimize=True)
        vals = vals.reshape(vals.shape[:3] + (-1,))
        avg = h[..., 0, 0]
    low = vals.min(axis=-1)
    floor = fraction * avg
    theta = np.where(low < floor, (avg - floor) / np.maximum(avg - low, 1e-300), 1.0)
    theta = np.clip(theta, 0.0, 1.0).min(axis=-1)
    scaled = theta < 1.0
    if not scaled.any():
        return coef, scaled
    out = coef.copy()
    idx = np.nonzero(scaled)
    cell = out[idx] * theta[idx].reshape((-1,) + (1,) * (coef.ndim - theta.ndim))
    if coef.ndim == 3:
        cell[..., 0] = out[idx][..., 0]
    else:
        cell[..., 0, 0] = out[idx][..., 0, 0]
    out[idx] = cell
    return out, scaled
