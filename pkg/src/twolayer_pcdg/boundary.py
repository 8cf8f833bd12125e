"""Boundary conditions as ghost interface states.

Interface ``i`` (``0..nx``) sits between cells ``i-1`` and ``i``.  The schemes
work with two arrays of interface values: ``minus`` (limit from the left cell)
and ``plus`` (limit from the right cell).  Boundary conditions fill the two
values that lie outside the domain.

Trace vectors handed to this module carry the scheme variables followed by the
bottom, i.e. ``(h1, m1, w, m2, b)`` for the still scheme and
``(E1, m1, E2, m2, b)`` for the moving scheme.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .model import cons_to_equil_moving

KINDS = ("periodic", "free", "inflow")


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary kinds for the left/right (and bottom/top in 2D) ends.

    ``inflow`` maps time to a dict with ``h1`` and ``h2`` (layer thicknesses)
    imposed at the left end; discharges are extrapolated from the interior.
    """

    left: str = "free"
    right: str = "free"
    inflow: Optional[Callable[[float], dict]] = None

    def __post_init__(self):
        for kind in (self.left, self.right):
            if kind not in KINDS:
                raise ValueError(f"unknown boundary kind {kind!r}")
        if (self.left == "periodic") != (self.right == "periodic"):
            raise ValueError("periodic boundaries must be imposed on both ends")
        if self.right == "inflow":
            raise ValueError("prescribed inflow is only supported on the left end")
        if self.left == "inflow" and self.inflow is None:
            raise ValueError("inflow boundary needs an inflow function")

    @classmethod
    def periodic(cls):
        return cls("periodic", "periodic")

    @classmethod
    def free(cls):
        return cls("free", "free")

    @property
    def is_periodic(self):
        return self.left == "periodic"


def tidal_inflow(h1_left, h2_left, b_ref, amplitude=0.03, period=100.0):
    """Time-periodic inflow thicknesses used by the tidal-flow example."""
    rel = amplitude / abs(b_ref)

    def inflow(t):
        s = np.sin(2 * np.pi * t / period)
        return {"h1": h1_left * (1 + rel * s), "h2": h2_left + h1_left * rel * s}

    return inflow


def _inflow_state(interior, data, variables, params):
    ghost = np.array(interior, dtype=float)
    b = ghost[4]
    h1, h2 = data["h1"], data["h2"]
    if variables == "still":
        ghost[0] = h1
        ghost[2] = h2 + b
    else:
        u = np.array([h1, ghost[1], h2, ghost[3], b])
        ghost[:] = cons_to_equil_moving(u, params)
    return ghost


def apply_boundary(first_left, last_right, bc, t, variables="still", params=None):
    """Ghost states outside the left and right ends of a 1D domain.

    ``first_left`` is the left trace of the first cell and ``last_right`` the
    right trace of the last cell.  Returns ``(ghost_left, ghost_right)``.
    """
    first_left = np.asarray(first_left, dtype=float)
    last_right = np.asarray(last_right, dtype=float)
    if bc.is_periodic:
        return last_right.copy(), first_left.copy()
    if bc.left == "inflow":
        ghost_left = _inflow_state(first_left, bc.inflow(t), variables, params)
    else:
        ghost_left = first_left.copy()
    return ghost_left, last_right.copy()


def interface_values(left, right, bc, t, variables="still", params=None):
    """Assemble ``(minus, plus)`` interface arrays of shape ``(ncomp, nx + 1)``.

    ``left``/``right`` are the per-cell traces ``(ncomp, nx)``.
    """
    gl, gr = apply_boundary(left[:, 0], right[:, -1], bc, t, variables, params)
    minus = np.concatenate([gl[:, None], right], axis=1)
    plus = np.concatenate([left, gr[:, None]], axis=1)
    return minus, plus


def interface_values_2d(left, right, periodic):
    """Interface arrays along the first trailing axis for 2D edge traces.

    ``left``/``right`` have shape ``(ncomp, n, ...)``; free ends copy the interior.
    """
    if periodic:
        gl, gr = right[:, -1:], left[:, :1]
    else:
        gl, gr = left[:, :1], right[:, -1:]
    minus = np.concatenate([gl, right], axis=1)
    plus = np.concatenate([left, gr], axis=1)
    return minus, plus
