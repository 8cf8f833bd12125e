"""Uniform meshes, Legendre modal bases, Gauss quadrature and L2 projection.

Every cell is mapped to the reference interval [-1, 1] (squares in 2D) and the
solution is stored as modal Legendre coefficients.  Coefficient layouts:

* 1D: ``coef[j, c, m]`` for cell ``j``, component ``c``, mode ``m``
* 2D: ``coef[i, j, c, a, b]`` with tensor-product modes ``P_a(xi) P_b(eta)``
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre as npleg


def legendre_eval(k, xi):
    """Return ``(P_k(xi), P_k'(xi))`` using the three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    p_prev, p = np.ones_like(xi), xi.copy()
    d_prev, d = np.zeros_like(xi), np.ones_like(xi)
    if k == 0:
        return p_prev, d_prev
    for n in range(1, k):
        p_next = ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
        d_next = d_prev + (2 * n + 1) * p
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p, d


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self):
        return len(self.nodes)


def gauss_rule(n):
    """Gauss-Legendre rule with ``n`` points on [-1, 1]."""
    if n < 1:
        raise ValueError("a Gauss rule needs at least one point")
    nodes, weights = npleg.leggauss(n)
    return QuadratureRule(nodes, weights)


class ModalBasis:
    """Legendre modes ``P_0..P_k`` tabulated on a Gauss rule.

    The default rule has ``k + 2`` points (exact to degree ``2k + 3``).
    """

    def __init__(self, k, nq=None):
        if k < 0:
            raise ValueError("degree must be non-negative")
        self.k = k
        self.nmodes = k + 1
        self.rule = gauss_rule(nq if nq is not None else k + 2)
        self.V, self.D = self.tabulate(self.rule.nodes)
        modes = np.arange(self.nmodes)
        # P_m(1) = 1, P_m(-1) = (-1)^m
        self.right = np.ones(self.nmodes)
        self.left = (-1.0) ** modes
        # inverse of the reference mass matrix diag(2 / (2m + 1))
        self.inv_mass = (2 * modes + 1) / 2.0

    @property
    def nodes(self):
        return self.rule.nodes

    @property
    def weights(self):
        return self.rule.weights

    @property
    def nq(self):
        return self.rule.npoints

    def tabulate(self, xi):
        """Values and xi-derivatives of all modes, shapes ``(len(xi), k+1)``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        V = np.empty((len(xi), self.nmodes))
        D = np.empty_like(V)
        for m in range(self.nmodes):
            V[:, m], D[:, m] = legendre_eval(m, xi)
        return V, D


@dataclass(frozen=True)
class Mesh1D:
    x_lo: float
    x_hi: float
    nx: int

    def __post_init__(self):
        if self.nx < 1 or not self.x_hi > self.x_lo:
            raise ValueError(f"invalid mesh [{self.x_lo}, {self.x_hi}] with {self.nx} cells")

    @property
    def dx(self):
        return (self.x_hi - self.x_lo) / self.nx

    @cached_property
    def interfaces(self):
        return self.x_lo + self.dx * np.arange(self.nx + 1)

    @cached_property
    def centers(self):
        return self.x_lo + self.dx * (np.arange(self.nx) + 0.5)

    @property
    def length(self):
        return self.x_hi - self.x_lo

    def points(self, xi):
        """Physical coordinates of reference points ``xi`` in every cell, ``(nx, len(xi))``."""
        return self.centers[:, None] + 0.5 * self.dx * np.asarray(xi)[None, :]

    def locate(self, x):
        """Cell index and reference coordinate of physical points."""
        x = np.asarray(x, dtype=float)
        s = (x - self.x_lo) / self.dx
        j = np.clip(np.floor(s).astype(int), 0, self.nx - 1)
        xi = 2.0 * (s - j) - 1.0
        return j, np.clip(xi, -1.0, 1.0)

    def is_interface(self, x, tol=1e-9):
        s = (x - self.x_lo) / self.dx
        return abs(s - round(s)) <= tol


@dataclass(frozen=True)
class Mesh2D:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("invalid 2D mesh")

    @property
    def dx(self):
        return (self.x_hi - self.x_lo) / self.nx

    @property
    def dy(self):
        return (self.y_hi - self.y_lo) / self.ny

    @cached_property
    def xmesh(self):
        return Mesh1D(self.x_lo, self.x_hi, self.nx)

    @cached_property
    def ymesh(self):
        return Mesh1D(self.y_lo, self.y_hi, self.ny)


@dataclass
class DGField:
    """Piecewise polynomial vector field on a 1D or 2D mesh."""

    mesh: Mesh1D | Mesh2D
    coef: np.ndarray
    basis: ModalBasis = field(repr=False)

    @property
    def ncomp(self):
        return self.coef.shape[-2] if isinstance(self.mesh, Mesh1D) else self.coef.shape[2]

    @property
    def degree(self):
        return self.basis.k

    def copy(self):
        return DGField(self.mesh, self.coef.copy(), self.basis)

    def at(self, xi):
        """Values at reference points in every cell: ``(ncomp, nx, len(xi))`` (1D only)."""
        V, _ = self.basis.tabulate(xi)
        return np.einsum("jcm,qm->cjq", self.coef, V)

    def averages(self):
        if isinstance(self.mesh, Mesh1D):
            return self.coef[..., 0]
        return self.coef[..., 0, 0]


def _cell_quadrature(mesh, rule, breakpoints):
    """Quadrature points per cell, splitting cells at the given breakpoints.

    Returns physical points ``x``, reference coordinates ``xi`` and reference
    weights ``w`` (summing to 2 per cell), each of shape ``(nx, npts)``.  Cells
    without a breakpoint use the rule's reference nodes directly so that no
    round-off enters through the affine map.
    """
    bps = sorted(float(b) for b in (breakpoints or ()))
    nq = rule.npoints
    plain_xi = np.asarray(rule.nodes)
    xis, ws = [], []
    for j in range(mesh.nx):
        a = mesh.x_lo + j * mesh.dx
        b = a + mesh.dx
        inner = [p for p in bps if a + 1e-12 * mesh.dx < p < b - 1e-12 * mesh.dx]
        if not inner:
            xis.append(plain_xi)
            ws.append(np.asarray(rule.weights))
            continue
        cuts = [-1.0] + [2.0 * (p - a) / mesh.dx - 1.0 for p in inner] + [1.0]
        xj, wj = [], []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            xj.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes)
            wj.append(0.5 * (hi - lo) * rule.weights)
        xis.append(np.concatenate(xj))
        ws.append(np.concatenate(wj))
    width = max(len(x) for x in xis)
    XI = np.zeros((mesh.nx, width))
    W = np.zeros((mesh.nx, width))
    for j, (x, w) in enumerate(zip(xis, ws)):
        # pad ragged rows with zero-weight copies of the last node
        XI[j, : len(x)] = x
        XI[j, len(x):] = x[-1]
        W[j, : len(w)] = w
    X = mesh.centers[:, None] + 0.5 * mesh.dx * XI
    return X, XI, W


def project(f, mesh, k, l=None, breakpoints=None, basis=None):
    """L2 projection of ``f`` onto piecewise degree-``k`` polynomials.

    ``f`` maps an array of x to an array of shape ``(l, *x.shape)`` (or ``x.shape``
    for a scalar field).  Cells containing one of ``breakpoints`` are integrated
    piecewise so that jumps inside a cell are handled exactly.
    """
    basis = basis or ModalBasis(k)
    rule = gauss_rule(max(k + 2, 2 * k + 2))
    X, xi, W = _cell_quadrature(mesh, rule, breakpoints)
    vals = np.asarray(f(X), dtype=float)
    scalar = vals.ndim == X.ndim
    if scalar:
        vals = vals[None]
    V = np.empty(xi.shape + (k + 1,))
    for m in range(k + 1):
        V[..., m] = legendre_eval(m, xi)[0]
    # project the deviation from one sample so that constants are reproduced exactly
    base = vals[..., :1]
    coef = np.einsum("cjq,jq,jqm->jcm", vals - base, W, V) * ((2 * np.arange(k + 1) + 1) / 2.0)
    coef[:, :, 0] += base[..., 0].T
    if scalar and l is None:
        coef = coef[:, 0, :]
    return DGField(mesh, coef, basis)


def project_2d(f, mesh, k, basis=None):
    """Tensor-product L2 projection on a Cartesian mesh.

    ``f(X, Y)`` returns ``(l, *X.shape)`` or ``X.shape`` for scalars.
    """
    basis = basis or ModalBasis(k)
    rule = gauss_rule(max(k + 2, 2 * k + 2))
    V, _ = ModalBasis(k, rule.npoints).tabulate(rule.nodes)
    xq = mesh.xmesh.points(rule.nodes)  # (nx, q)
    yq = mesh.ymesh.points(rule.nodes)  # (ny, q)
    X = xq[:, None, :, None] * np.ones((1, mesh.ny, 1, rule.npoints))
    Y = yq[None, :, None, :] * np.ones((mesh.nx, 1, rule.npoints, 1))
    vals = np.asarray(f(X, Y), dtype=float)
    scalar = vals.ndim == X.ndim
    if scalar:
        vals = vals[None]
    w = rule.weights
    scale = np.outer(2 * np.arange(k + 1) + 1, 2 * np.arange(k + 1) + 1) / 4.0
    base = vals[..., :1, :1]
    coef = np.einsum("cijpq,p,q,pa,qb->ijcab", vals - base, w, w, V, V, optimize=True) * scale
    coef[..., 0, 0] += np.moveaxis(base[..., 0, 0], 0, -1)
    if scalar:
        coef = coef[:, :, 0]
    return DGField(mesh, coef, basis)


def traces(field, j):
    """Left-limit at ``x_{j-1/2}^+`` and right-limit at ``x_{j+1/2}^-`` of cell ``j``."""
    c = field.coef[j]
    return c @ field.basis.left, c @ field.basis.right


def all_traces(coef, basis):
    """Vectorised traces of a 1D coefficient array: ``(left, right)`` each ``(ncomp, nx)``."""
    left = np.einsum("jcm,m->cj", coef, basis.left)
    right = coef.sum(axis=-1).T
    return left, right
