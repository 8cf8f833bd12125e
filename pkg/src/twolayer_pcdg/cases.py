"""Catalog of named test cases.

Each case stores its domain, physical constants, bottom, initial data and
default run settings.  Initial data are callables returning a dict of named
fields; 1D cases give ``h1, m1, m2`` plus either ``h2`` or ``w``, 2D cases add
``n1, n2`` (or velocities ``u1, v1, u2, v2`` which are converted here).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .boundary import BoundaryCondition, tidal_inflow
from .errors import ConfigError


@dataclass(frozen=True)
class Case:
    name: str
    description: str
    domain: tuple
    g: float
    r: float
    t_end: float
    bottom: Callable
    initial: Callable
    nx: int = 100
    ny: Optional[int] = None
    k: int = 2
    scheme: str = "still"
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.free)
    breakpoints: tuple = ()
    limiter: bool = True
    output_times: tuple = ()
    reference: str = "none"
    cfl: Optional[float] = None
    # rescale higher modes when a depth nearly vanishes (off unless a preset needs it)
    positivity: bool = False
    # optional x -> {E1, m1, E2, m2} used by the moving scheme instead of converting ``initial``
    equilibrium: Optional[Callable] = None

    @property
    def dim(self):
        return 1 if len(self.domain) == 2 else 2


def _step(x, x0, left, right):
    """Piecewise constant vector data: ``left`` where ``x < x0``."""
    mask = np.asarray(x) < x0
    return [np.where(mask, a, b) for a, b in zip(left, right)]


def _named(values, names):
    return dict(zip(names, values))


# -- 1D bottoms --------------------------------------------------------------------

def bottom_bump(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.4) & (x < 0.6)
    return np.where(inside, 0.25 * (np.cos(10 * np.pi * (x - 0.5)) + 1) - 2, -2.0)


def bottom_step(x):
    return np.where(np.asarray(x) > 0.5, -1.5, -2.0)


def _still_lake(x):
    z = np.zeros_like(np.asarray(x, dtype=float))
    return {"h1": z + 1.0, "m1": z, "w": z - 1.0, "m2": z}


def _still_perturbed(x):
    d = _still_lake(x)
    d["h1"] = d["h1"] + np.where((x >= 0.1) & (x <= 0.2), 1e-5, 0.0)
    return d


MOVING_LEFT = (1.22373355048230, 12.0, 0.968329515483846, 10.0)
MOVING_RIGHT = (1.44970064153589, 12.0, 1.12439026921484, 10.0)


def bottom_moving(x):
    return np.where(np.asarray(x) < 0, -2.0, -1.0)


def _moving_eq(x):
    return _named(_step(x, 0.0, MOVING_LEFT, MOVING_RIGHT), ("h1", "m1", "h2", "m2"))


def _moving_eq_energies(x):
    z = np.zeros_like(np.asarray(x, dtype=float))
    return {"E1": z + 50.0, "m1": z + 12.0, "E2": z + 55.0, "m2": z + 10.0}


def _moving_perturbed(x):
    d = _moving_eq(x)
    d["h1"] = d["h1"] + np.where((x >= -0.6) & (x <= -0.5), 0.001, 0.0)
    return d


def _accuracy(x):
    e = np.exp(np.cos(2 * np.pi * x))
    z = np.zeros_like(x)
    return {"h1": 5 + e, "m1": z, "w": -5 - e, "m2": z}


ISO_L = (0.8817, -0.1738, 1.091, 0.1613)
ISO_R = (0.3700, -0.1868, 1.593, 0.1742)
TIDAL_L = (0.69914, -0.21977, 1.26932, 0.20656)
TIDAL_R = (0.37002, -0.18684, 1.59310, 0.17416)


def _const(value):
    return lambda x, *rest: np.full(np.shape(x), float(value))


def _riemann(x0, left, right, names=("h1", "m1", "h2", "m2")):
    return lambda x: _named(_step(x, x0, left, right), names)


# -- 2D --------------------------------------------------------------------------

def _omega(x, y):
    return ((x < -0.5) & (y < 0)) | ((x + 0.5) ** 2 + (y + 0.5) ** 2 < 0.25) | ((x < 0) & (y < -0.5))


def _interface_2d_flat(x, y):
    inside = _omega(x, y)
    a = (0.50, 1.250, 1.250, -0.50, 1.250, 1.250)
    b = (0.45, 1.125, 1.125, -0.45, 1.375, 1.375)
    vals = [np.where(inside, p, q) for p, q in zip(a, b)]
    return _named(vals, ("h1", "m1", "n1", "w", "m2", "n2"))


def bottom_gauss_2d(x, y):
    return 0.05 * np.exp(-100 * (x**2 + y**2)) - 1


def _interface_2d_nonflat(x, y):
    inside = _omega(x, y)
    h1 = np.where(inside, 0.50, 0.45)
    w = np.where(inside, -0.50, -0.45)
    h2 = w - bottom_gauss_2d(x, y)
    return {"h1": h1, "m1": 2.5 * h1, "n1": 2.5 * h1, "w": w, "m2": 2.5 * h2, "n2": 2.5 * h2}


def _dam_2d(radius):
    def init(x, y):
        outside = x**2 + y**2 > radius**2
        z = np.zeros_like(x)
        return {"h1": np.where(outside, 1.8, 0.2), "m1": z, "n1": z,
                "w": np.where(outside, -1.8, -0.2), "m2": z, "n2": z}
    return init


def _still_2d(x, y):
    z = np.zeros_like(x)
    return {"h1": z + 0.5, "m1": z, "n1": z, "w": z - 0.5, "m2": z, "n2": z}


def _build_catalog():
    cases = [
        Case("accuracy", "smooth periodic data for convergence studies", (0.0, 1.0), 9.81, 0.98,
             0.1, lambda x: np.sin(np.pi * x) ** 2 - 10, _accuracy, nx=100,
             bc=BoundaryCondition.periodic(), limiter=False, reference="self:3200"),
        Case("still_wb_1d", "lake at rest over a smooth bump", (-0.2, 1.0), 10.0, 0.98, 0.1,
             bottom_bump, _still_lake, nx=100, breakpoints=(0.4, 0.6), reference="initial"),
        Case("still_wb_1d_dis", "lake at rest over a step bottom", (-0.2, 1.0), 10.0, 0.98, 0.1,
             bottom_step, _still_lake, nx=100, breakpoints=(0.5,), reference="initial"),
        Case("still_perturbation", "small pulse on a lake at rest (smooth bump)", (-0.2, 1.0),
             10.0, 0.98, 0.15, bottom_bump, _still_perturbed, nx=200,
             breakpoints=(0.1, 0.2, 0.4, 0.6)),
        Case("still_perturbation_dis", "small pulse on a lake at rest (step bottom)", (-0.2, 1.0),
             10.0, 0.98, 0.15, bottom_step, _still_perturbed, nx=200,
             breakpoints=(0.1, 0.2, 0.5)),
        Case("interface_propagation", "moving interface with an intermediate plateau",
             (-1.0, 1.0), 10.0, 0.98, 0.1, _const(-1.0),
             _riemann(0.3, (0.5, 1.25, -0.5, 1.25), (0.45, 1.125, -0.45, 1.375),
                      ("h1", "m1", "w", "m2")), nx=400, breakpoints=(0.3,)),
        Case("interface_large_jump", "large interface jump at rest", (-5.0, 5.0), 9.81, 0.98,
             1.0, _const(-2.0),
             _riemann(0.0, (1.8, 0, -1.8, 0), (0.2, 0, -0.2, 0), ("h1", "m1", "w", "m2")),
             nx=200, breakpoints=(0.0,)),
        Case("internal_dam_break", "internal dam break settling to a steady jump", (-5.0, 5.0),
             9.81, 0.998, 300.0, lambda x: 0.25 * np.exp(-x**2) - 2,
             _riemann(0.0, (1.6, 0, -1.6, 0), (0.7, 0, -0.7, 0), ("h1", "m1", "w", "m2")),
             nx=200, breakpoints=(0.0,)),
    ]
    refs = {"a": -(ISO_L[0] + ISO_L[2]), "b": -(ISO_R[0] + ISO_R[2]),
            "c": -(ISO_L[0] + ISO_L[2] + ISO_R[0] + ISO_R[2]) / 2}
    for tag, bref in refs.items():
        cases.append(Case(f"isolated_shock_{tag}", f"isolated internal shock, reference level {tag}",
                          (0.0, 1.0), 9.81, 0.98, 0.6, _const(bref), _riemann(0.5, ISO_L, ISO_R),
                          nx=200, breakpoints=(0.5,)))
    bref = -0.5 * (TIDAL_L[0] + TIDAL_L[2] + TIDAL_R[0] + TIDAL_R[2])
    tidal_bc = BoundaryCondition("inflow", "free", tidal_inflow(TIDAL_L[0], TIDAL_L[2], bref))
    cases += [
        Case("tidal", "barotropic tidal flow driven at the left end", (-10.0, 10.0), 9.81, 0.98,
             64.0, _const(bref),
             _riemann(0.0, TIDAL_L, TIDAL_R),
             nx=1000, bc=tidal_bc, breakpoints=(0.0,), output_times=(10.0, 25.0, 60.0, 64.0)),
        Case("moving_wb_1d", "moving equilibrium over a step bottom", (-1.0, 1.0), 10.0, 0.98,
             0.05, bottom_moving, _moving_eq, nx=100, scheme="moving", breakpoints=(0.0,),
             reference="initial", equilibrium=_moving_eq_energies),
        Case("moving_perturbation", "small pulse on a moving equilibrium", (-1.0, 1.0), 10.0,
             0.98, 0.08, bottom_moving, _moving_perturbed, nx=200, scheme="moving",
             breakpoints=(-0.6, -0.5, 0.0), output_times=(0.02, 0.05, 0.08)),
        Case("moving_perturbation_still_scheme", "negative control: moving pulse, still scheme",
             (-1.0, 1.0), 10.0, 0.98, 0.08, bottom_moving, _moving_perturbed, nx=200,
             scheme="still", breakpoints=(-0.6, -0.5, 0.0), output_times=(0.02, 0.05, 0.08)),
        Case("riemann_1", "Riemann problem over a step bottom, test 1", (-1.0, 1.0), 10.0, 0.98,
             0.1, lambda x: np.where(np.asarray(x) < 0, -2.0, -1.5),
             _riemann(0.0, (1.0, 1.5, 1.0, 1.0), (0.8, 1.2, 1.2, 1.8)), nx=1000,
             scheme="moving", breakpoints=(0.0,)),
        Case("riemann_2", "Riemann problem over a step bottom, test 2", (-1.0, 1.0), 10.0, 0.98,
             0.1, lambda x: np.where(np.asarray(x) < 0, -2.0, -1.5),
             _riemann(0.0, (1.5, 1.1, 1.0, 1.4), (1.2, 1.6, 0.9, 1.2)), nx=1000,
             scheme="moving", breakpoints=(0.0,)),
        Case("interface_2d_flat", "round interface moving north-east, flat bottom",
             (-0.55, 0.7, -0.55, 0.7), 10.0, 0.98, 0.1, _const(-1.0), _interface_2d_flat,
             nx=100, ny=100),
        Case("interface_2d_nonflat", "round interface over a Gaussian bump",
             (-0.55, 0.7, -0.55, 0.7), 10.0, 0.98, 0.1, bottom_gauss_2d, _interface_2d_nonflat,
             nx=100, ny=100),
        Case("dam_break_2d_flat", "internal circular dam break, flat bottom",
             (-5.0, 5.0, -5.0, 5.0), 9.81, 0.998, 20.0, _const(-2.0), _dam_2d(2.0),
             nx=100, ny=100, output_times=(4.0, 6.0, 10.0, 14.0, 16.0, 20.0), positivity=True),
        Case("dam_break_2d_nonflat", "internal circular dam break over a Gaussian bump",
             (-2.0, 2.0, -2.0, 2.0), 9.81, 0.98, 2.0,
             lambda x, y: 0.5 * np.exp(-5 * (x**2 + y**2)) - 2, _dam_2d(1.0),
             nx=100, ny=100, output_times=(1.0, 2.0), positivity=True),
        Case("still_wb_2d", "2D lake at rest over a Gaussian bump", (-0.55, 0.7, -0.55, 0.7),
             10.0, 0.98, 0.1, bottom_gauss_2d, _still_2d, nx=50, ny=50, reference="initial"),
    ]
    return {c.name: c for c in cases}


CATALOG = _build_catalog()


def get_case(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown case {name!r}; see list-cases") from None


def list_cases():
    return [(c.name, c.description) for c in CATALOG.values()]
