"""Run configuration, time loop, error norms, convergence tables and output files."""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .basis import Mesh1D, Mesh2D, ModalBasis, gauss_rule, project, project_2d
from .cases import Case, get_case
from .errors import ConfigError, DomainError, SolverError
from .limiter import LimiterConfig, limit_still, limit_still_2d, positivity_scale
from .model import PhysParams, cons_to_equil_moving, solve_depths
from .moving import MovingContext, MovingState, lf_alpha_moving, make_state
from .still import StillContext, lf_alpha_global
from .timestep import StepReport, cfl_dt, ssprk3_step_moving, ssprk3_step_still

VARIABLES_1D = ("h1", "m1", "h2", "m2", "b", "w", "E1", "E2")
VARIABLES_2D = ("h1", "m1", "n1", "h2", "m2", "n2", "b", "w")


@dataclass
class RunConfig:
    case: str
    scheme: Optional[str] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    k: Optional[int] = None
    cfl: Optional[float] = None
    t_end: Optional[float] = None
    g: Optional[float] = None
    r: Optional[float] = None
    limiter_M: float = 0.0
    limiter: Optional[bool] = None
    positivity: Optional[bool] = None
    out: Optional[str] = None
    ref: Optional[str] = None
    output_times: Optional[tuple] = None

    def resolved(self):
        """Fill unset fields from the case preset and validate."""
        case = get_case(self.case)
        cfg = replace(self)
        cfg.scheme = cfg.scheme or case.scheme
        cfg.nx = cfg.nx or case.nx
        cfg.ny = cfg.ny or case.ny
        cfg.k = cfg.k if cfg.k is not None else case.k
        cfg.cfl = cfg.cfl or case.cfl or (0.18 if case.dim == 1 else 0.1)
        cfg.t_end = cfg.t_end if cfg.t_end is not None else case.t_end
        cfg.g = cfg.g or case.g
        cfg.r = cfg.r or case.r
        cfg.limiter = case.limiter if cfg.limiter is None else cfg.limiter
        cfg.positivity = case.positivity if cfg.positivity is None else cfg.positivity
        cfg.ref = cfg.ref or case.reference
        if cfg.output_times is None:
            cfg.output_times = tuple(t for t in case.output_times if t <= cfg.t_end)
        if cfg.scheme not in ("still", "moving"):
            raise ConfigError(f"unknown scheme {cfg.scheme!r}")
        if cfg.k not in (1, 2):
            raise ConfigError("only degrees k = 1 and k = 2 are supported")
        if case.dim == 2 and cfg.scheme == "moving":
            raise ConfigError("the moving-water scheme is one-dimensional")
        if cfg.nx < 2 or (case.dim == 2 and (cfg.ny or 0) < 2):
            raise ConfigError("need at least two cells per direction")
        if not cfg.cfl > 0 or not cfg.t_end >= 0:
            raise ConfigError("cfl must be positive and t_end non-negative")
        if cfg.limiter_M < 0:
            raise ConfigError("limiter constant must be non-negative")
        if not (cfg.ref in ("none", "initial") or cfg.ref.startswith(("self:", "file:"))):
            raise ConfigError(f"bad reference spec {cfg.ref!r}")
        return cfg


# -- solutions -----------------------------------------------------------------------

@dataclass
class Solution:
    """A DG solution with pointwise access to all derived variables."""

    scheme: str
    mesh: Mesh1D | Mesh2D
    basis: ModalBasis
    params: PhysParams
    coef: np.ndarray
    bottom: np.ndarray  # scalar bottom coefficients
    t: float = 0.0
    hq: Optional[np.ndarray] = None  # moving scheme depth cache at quadrature nodes

    @property
    def dim(self):
        return 1 if isinstance(self.mesh, Mesh1D) else 2

    def _moving_vars(self, v, seed):
        h1, h2, ok, _ = solve_depths(v[0], v[1], v[2], v[3], v[4], seed[0], seed[1], self.params)
        if not np.all(ok):
            raise SolverError("depth recovery failed while sampling the solution")
        return {"h1": h1, "m1": v[1], "h2": h2, "m2": v[3], "b": v[4], "w": h2 + v[4],
                "E1": v[0], "E2": v[2]}

    def _still_vars(self, v, b):
        h1, m1, w, m2 = v
        h2 = w - b
        g, r = self.params.g, self.params.r
        with np.errstate(divide="ignore", invalid="ignore"):
            E1 = 0.5 * m1 * m1 / (h1 * h1) + g * (h1 + w)
            E2 = 0.5 * m2 * m2 / (h2 * h2) + g * (r * h1 + w)
        return {"h1": h1, "m1": m1, "h2": h2, "m2": m2, "b": b, "w": w, "E1": E1, "E2": E2}

    def _seed(self, shape_tail):
        avg = self.hq.mean(axis=-1)  # (2, nx)
        return avg.reshape(avg.shape + (1,) * len(shape_tail)) * np.ones((1, 1) + shape_tail)

    def evaluate(self, xi):
        """All variables at reference points ``xi`` in every cell: dict of ``(nx, len(xi))``.

        In 2D the points form a tensor grid and arrays are ``(nx, ny, n, n)``.
        """
        V, _ = self.basis.tabulate(xi)
        if self.dim == 2:
            v = np.einsum("ijcab,pa,qb->cijpq", self.coef, V, V)
            b = np.einsum("ijab,pa,qb->ijpq", self.bottom, V, V)
            h1, m1, n1, w, m2, n2 = v
            return {"h1": h1, "m1": m1, "n1": n1, "h2": w - b, "m2": m2, "n2": n2, "b": b, "w": w}
        v = np.einsum("jcm,qm->cjq", self.coef, V)
        if self.scheme == "moving":
            return self._moving_vars(v, self._seed((len(np.atleast_1d(xi)),)))
        return self._still_vars(v, self.bottom @ V.T)

    def evaluate_at(self, x):
        """All variables at physical points ``x`` (1D only)."""
        x = np.asarray(x, dtype=float)
        j, xi = self.mesh.locate(x)
        V, _ = self.basis.tabulate(xi.ravel())
        c = self.coef[j.ravel()]  # (n, ncomp, K)
        v = np.einsum("ncm,nm->cn", c, V).reshape((-1,) + x.shape)
        if self.scheme == "moving":
            seed = self.hq.mean(axis=-1)[:, j.ravel()].reshape((2,) + x.shape)
            return self._moving_vars(v, seed)
        b = np.einsum("nm,nm->n", self.bottom[j.ravel()], V).reshape(x.shape)
        return self._still_vars(v, b)

    def cell_averages(self):
        """Cell averages of every variable (quadrature on the basis rule)."""
        rule = self.basis.rule
        vals = self.evaluate(rule.nodes)
        if self.dim == 2:
            W = np.outer(rule.weights, rule.weights) / 4.0
            return {k: np.einsum("ijpq,pq->ij", a, W) for k, a in vals.items()}
        return {k: a @ rule.weights / 2.0 for k, a in vals.items()}

    def sample_points(self):
        """Physical coordinates of the cell averages (cell centres)."""
        if self.dim == 2:
            return self.mesh.xmesh.centers, self.mesh.ymesh.centers
        return self.mesh.centers


# -- initialisation --------------------------------------------------------------------

def _still_fields_1d(case, params, x):
    d = case.initial(x)
    b = case.bottom(x)
    w = d["w"] if "w" in d else d["h2"] + b
    return np.array([d["h1"], d["m1"], w, d["m2"]])


def _moving_fields_1d(case, params, x):
    b = case.bottom(x)
    if case.equilibrium is not None:
        e = case.equilibrium(x)
        return np.array([e["E1"], e["m1"], e["E2"], e["m2"], b])
    d = case.initial(x)
    if "w" in d:
        # energies straight from w so a lake at rest gives exactly constant E
        h1, m1, w, m2 = d["h1"], d["m1"], d["w"], d["m2"]
        h2 = w - b
        g, r = params.g, params.r
        E1 = 0.5 * (m1 / h1) ** 2 + g * (h1 + w)
        E2 = 0.5 * (m2 / h2) ** 2 + g * (r * h1 + w)
        return np.array([E1, m1 + 0 * b, E2, m2 + 0 * b, b])
    return cons_to_equil_moving(np.array([d["h1"], d["m1"], d["h2"], d["m2"], b]), params)


def _check_alignment(case, mesh):
    for p in case.breakpoints:
        if mesh.x_lo < p < mesh.x_hi and not mesh.is_interface(p):
            warnings.warn(f"case {case.name}: data jump at x={p} is not on a cell interface "
                          f"for nx={mesh.nx}; it is integrated exactly inside the cell",
                          stacklevel=3)


def initial_solution(case: Case, cfg: RunConfig):
    params = PhysParams(cfg.g, cfg.r)
    basis = ModalBasis(cfg.k)
    if case.dim == 2:
        mesh = Mesh2D(*case.domain, cfg.nx, cfg.ny)
        bottom = project_2d(case.bottom, mesh, cfg.k).coef

        def fields(X, Y):
            d = case.initial(X, Y)
            b = case.bottom(X, Y)
            w = d["w"] if "w" in d else d["h2"] + b
            return np.array([d["h1"], d["m1"], d["n1"], w, d["m2"], d["n2"]])

        coef = project_2d(fields, mesh, cfg.k).coef
        return Solution("still", mesh, basis, params, coef, bottom)
    mesh = Mesh1D(*case.domain, cfg.nx)
    _check_alignment(case, mesh)
    bps = case.breakpoints
    bottom = project(case.bottom, mesh, cfg.k, breakpoints=bps).coef
    if cfg.scheme == "still":
        coef = project(lambda x: _still_fields_1d(case, params, x), mesh, cfg.k,
                       breakpoints=bps).coef
        return Solution("still", mesh, basis, params, coef, bottom)
    coef = project(lambda x: _moving_fields_1d(case, params, x), mesh, cfg.k,
                   breakpoints=bps).coef
    # the bottom is carried as the fifth unknown; keep one projection for both
    coef[:, 4, :] = bottom
    ctx = MovingContext(params, mesh, basis, case.bc)
    seed_q, seed_t = _depth_seeds(case, mesh, basis)
    state = make_state(coef, seed_q, seed_t, ctx)
    return Solution("moving", mesh, basis, params, coef, bottom, hq=state.hq)


def _depth_seeds(case, mesh, basis):
    """Pointwise initial depths at quadrature nodes and traces as Newton seeds."""
    xq = mesh.points(basis.nodes)
    xt = mesh.points(np.array([-1.0, 1.0]))
    # nudge trace points inside their cell so one-sided data is sampled
    xt = xt + np.array([1.0, -1.0]) * 1e-9 * mesh.dx
    out = []
    for X in (xq, xt):
        d = case.initial(X)
        h2 = d["h2"] if "h2" in d else d["w"] - case.bottom(X)
        out.append(np.array([d["h1"], h2]))
    return out


# -- time loop -------------------------------------------------------------------------

@dataclass
class RunResult:
    config: RunConfig
    solution: Solution
    initial: Solution
    snapshots: dict
    reports: list
    errors: Optional["ErrorReport"] = None
    files: list = field(default_factory=list)
    newton: Optional[dict] = None
    wall_time: float = 0.0

    @property
    def alpha_history(self):
        return [r.alpha for r in self.reports]


def _limiter_cfg(cfg):
    return LimiterConfig(M=cfg.limiter_M, enabled=bool(cfg.limiter),
                         positivity=bool(cfg.positivity))


def _limit_initial_still(coef, ctx, limiter):
    """Limit projected still data once (and rescale thin cells if asked to)."""
    if ctx.dim == 1:
        coef = limit_still(coef, limiter, ctx.mesh.dx, ctx.bc.is_periodic, ctx.params,
                           ctx.bottom[:, 0])[0]
    else:
        coef = limit_still_2d(coef, limiter, ctx.mesh.dx, ctx.mesh.dy, ctx.bc.is_periodic,
                              ctx.params, ctx.bottom[..., 0, 0])[0]
    if limiter.positivity:
        coef = positivity_scale(coef, ctx.bottom, ctx.basis)[0]
    return coef


def run_case(config: RunConfig, monitor: Optional[Callable] = None, write=True) -> RunResult:
    """Integrate a case to ``t_end``; optionally call ``monitor(t, solution)`` after each step."""
    cfg = config.resolved()
    case = get_case(cfg.case)
    start = time.perf_counter()
    sol0 = initial_solution(case, cfg)
    limiter = _limiter_cfg(cfg)
    mesh, basis, params = sol0.mesh, sol0.basis, sol0.params
    times = sorted(set(t for t in cfg.output_times if 0 < t < cfg.t_end)) + [cfg.t_end]
    snapshots = {}
    reports = []
    t = 0.0
    tol = 1e-12 * max(cfg.t_end, 1.0)

    if sol0.scheme == "moving":
        ctx = MovingContext(params, mesh, basis, case.bc)
        seed_q, seed_t = _depth_seeds(case, mesh, basis)
        state = make_state(sol0.coef.copy(), seed_q, seed_t, ctx)

        def snapshot(t):
            return Solution("moving", mesh, basis, params, state.coef.copy(), sol0.bottom, t,
                            hq=state.hq.copy())
    else:
        ctx = StillContext(params, mesh, basis, sol0.bottom, case.bc)
        coef = sol0.coef.copy()
        if limiter.enabled:
            # projected jumps overshoot; limit once so the first traces stay admissible
            coef = _limit_initial_still(coef, ctx, limiter)

        def snapshot(t):
            return Solution("still", mesh, basis, params, coef.copy(), sol0.bottom, t)

    nstep = 0
    for t_out in times:
        while t < t_out - tol:
            try:
                if sol0.scheme == "moving":
                    ctx.alpha = lf_alpha_moving(state, ctx)
                else:
                    ctx.alpha = lf_alpha_global(coef, ctx)
                dt = cfl_dt(mesh, ctx.alpha, cfg.cfl)
                if t + dt > t_out - tol:
                    dt = t_out - t
                if sol0.scheme == "moving":
                    state, rep = ssprk3_step_moving(state, ctx, dt, t, limiter)
                else:
                    coef, rep = ssprk3_step_still(coef, ctx, dt, t, limiter)
            except SolverError as exc:
                raise SolverError(f"{exc} (t={t:.6g}, step {nstep})", exc.last_iterate,
                                  exc.residual, exc.where) from exc
            except DomainError as exc:
                raise DomainError(f"{exc} (t={t:.6g}, step {nstep})") from exc
            t += dt
            nstep += 1
            reports.append(rep)
            if monitor is not None:
                monitor(t, snapshot(t))
        t = t_out
        snapshots[t_out] = snapshot(t_out)

    final = snapshots[cfg.t_end] if cfg.t_end in snapshots else snapshot(t)
    result = RunResult(cfg, final, sol0, snapshots, reports)
    if sol0.scheme == "moving":
        result.newton = ctx.stats.as_dict()
    result.errors = _reference_errors(cfg, case, result)
    result.wall_time = time.perf_counter() - start
    if write and cfg.out:
        result.files = write_outputs(result, cfg.out)
    return result


# -- errors ----------------------------------------------------------------------------

@dataclass
class ErrorReport:
    nx: int
    l1: dict
    linf: dict

    def as_dict(self):
        return {"nx": self.nx, "l1": self.l1, "linf": self.linf}


_REF_CACHE: dict = {}


def reference_solution(cfg: RunConfig, spec: str):
    """Resolve ``self:<nx>`` (fine still-scheme P2 run) or ``file:<path>``."""
    if spec.startswith("self:"):
        try:
            nref = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad reference spec {spec!r}") from None
        key = (cfg.case, nref, cfg.t_end, cfg.g, cfg.r, cfg.limiter, cfg.limiter_M)
        if key not in _REF_CACHE:
            ref_cfg = RunConfig(cfg.case, scheme="still", nx=nref, ny=nref if cfg.ny else None,
                                k=2, t_end=cfg.t_end, g=cfg.g, r=cfg.r, limiter=cfg.limiter,
                                limiter_M=cfg.limiter_M, ref="none", output_times=())
            _REF_CACHE[key] = run_case(ref_cfg, write=False).solution
        return _REF_CACHE[key]
    if spec.startswith("file:"):
        return load_solution(spec.split(":", 1)[1])
    raise ConfigError(f"bad reference spec {spec!r}")


def _reference_errors(cfg, case, result):
    if cfg.ref == "none":
        return None
    if cfg.ref == "initial":
        return error_norms(result.solution, result.initial)
    return error_norms(result.solution, reference_solution(cfg, cfg.ref))


def error_norms(sol: Solution, reference, variables=None, nsub=None) -> ErrorReport:
    """L1 and L-infinity errors of ``sol`` against another solution or a callable.

    ``reference`` may be a :class:`Solution` (same or different mesh) or a
    function ``x -> dict`` of exact values.  L1 uses a composite Gauss rule
    with ``nsub`` subintervals per cell (by default aligned with a finer
    reference mesh), L-infinity the quadrature nodes and both traces.
    """
    if sol.dim == 2:
        return _error_norms_2d(sol, reference, variables)
    mesh = sol.mesh
    names = variables or [v for v in ("h1", "m1", "h2", "m2", "w", "E1", "E2")]
    if nsub is None:
        nsub = 4
        if isinstance(reference, Solution):
            ratio = reference.mesh.nx / mesh.nx
            if ratio > 1 and abs(ratio - round(ratio)) < 1e-12:
                nsub = max(int(round(ratio)), 2)
    rule = gauss_rule(sol.basis.k + 3)
    sub_nodes = (np.arange(nsub)[:, None] + 0.5 * (rule.nodes[None, :] + 1)) * (2.0 / nsub) - 1
    xi_l1 = sub_nodes.ravel()
    w_l1 = np.tile(rule.weights / nsub, nsub)
    xi_inf = np.concatenate([sol.basis.nodes, [-1.0, 1.0]])

    def ref_vals(xi):
        if isinstance(reference, Solution) and reference.mesh == mesh:
            return reference.evaluate(xi)
        X = mesh.points(xi)
        if isinstance(reference, Solution):
            # nudge off the interfaces so one-sided values of the right cell are used
            Xn = mesh.points(np.clip(xi, -1 + 1e-9, 1 - 1e-9))
            return reference.evaluate_at(Xn)
        return reference(X)

    mine_1, ref_1 = sol.evaluate(xi_l1), ref_vals(xi_l1)
    mine_i, ref_i = sol.evaluate(xi_inf), ref_vals(xi_inf)
    l1, linf = {}, {}
    for name in names:
        if name not in ref_1:
            continue
        e = np.abs(mine_1[name] - ref_1[name])
        l1[name] = float(np.sum(e @ w_l1) * mesh.dx / 2.0)
        linf[name] = float(np.max(np.abs(mine_i[name] - ref_i[name])))
    return ErrorReport(mesh.nx, l1, linf)


def _error_norms_2d(sol, reference, variables):
    if not (isinstance(reference, Solution) and reference.mesh == sol.mesh):
        raise ConfigError("2D errors are only supported against a solution on the same mesh")
    names = variables or ["h1", "m1", "n1", "h2", "m2", "n2", "w"]
    rule = gauss_rule(sol.basis.k + 3)
    a, b = sol.evaluate(rule.nodes), reference.evaluate(rule.nodes)
    xi_inf = np.concatenate([sol.basis.nodes, [-1.0, 1.0]])
    ai, bi = sol.evaluate(xi_inf), reference.evaluate(xi_inf)
    W = np.outer(rule.weights, rule.weights) * sol.mesh.dx * sol.mesh.dy / 4.0
    l1 = {n: float(np.einsum("ijpq,pq->", np.abs(a[n] - b[n]), W)) for n in names}
    linf = {n: float(np.max(np.abs(ai[n] - bi[n]))) for n in names}
    return ErrorReport(sol.mesh.nx, l1, linf)


def convergence_orders(reports):
    """Per-variable L1 orders ``log(e_c / e_f) / log(n_f / n_c)`` between successive meshes."""
    orders = []
    for coarse, fine in zip(reports[:-1], reports[1:]):
        ratio = math.log(fine.nx / coarse.nx)
        row = {}
        for name, ec in coarse.l1.items():
            ef = fine.l1.get(name)
            row[name] = math.log(ec / ef) / ratio if ec > 0 and ef and ef > 0 else float("nan")
        orders.append(row)
    return orders


def convergence_table(reports, variables=("h1", "m1", "h2", "m2")):
    """Aligned text table of L1 errors and orders, plus the orders as a list."""
    orders = convergence_orders(reports)
    head = f"{'nx':>6}" + "".join(f"{v + ' L1':>14}{'order':>8}" for v in variables)
    lines = [head]
    for i, rep in enumerate(reports):
        row = f"{rep.nx:>6}"
        for v in variables:
            order = "--" if i == 0 else f"{orders[i - 1][v]:.2f}"
            row += f"{rep.l1[v]:>14.3e}{order:>8}"
        lines.append(row)
    return "\n".join(lines), orders


def convergence_csv(reports, path, variables=("h1", "m1", "h2", "m2")):
    orders = convergence_orders(reports)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nx"] + [f"{v}_{s}" for v in variables for s in ("l1", "order")])
        for i, rep in enumerate(reports):
            row = [rep.nx]
            for v in variables:
                row += [repr(rep.l1[v]), "" if i == 0 else repr(orders[i - 1][v])]
            w.writerow(row)


def run_convergence(case_name, meshes, **overrides):
    """Run a case on several meshes and return ``(reports, table_text, orders)``."""
    reports = []
    for n in meshes:
        cfg = RunConfig(case_name, nx=n, **overrides)
        res = run_case(cfg, write=False)
        if res.errors is None:
            raise ConfigError("convergence study needs a reference (set --ref)")
        reports.append(res.errors)
    text, orders = convergence_table(reports)
    return reports, text, orders


# -- output ------------------------------------------------------------------------------

def _fmt_time(t):
    return f"{t:.6g}".replace(".", "p")


def write_csv(sol: Solution, path):
    avg = sol.cell_averages()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if sol.dim == 1:
            w.writerow(("x",) + VARIABLES_1D)
            x = sol.sample_points()
            for j in range(len(x)):
                w.writerow([repr(float(x[j]))] + [repr(float(avg[v][j])) for v in VARIABLES_1D])
        else:
            w.writerow(("x", "y") + VARIABLES_2D)
            xs, ys = sol.sample_points()
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    w.writerow([repr(float(x)), repr(float(y))]
                               + [repr(float(avg[v][i, j])) for v in VARIABLES_2D])


def save_solution(sol: Solution, path):
    """Store a solution in ``.npz`` form for use as a ``file:`` reference."""
    m = sol.mesh
    np.savez(path, scheme=sol.scheme, coef=sol.coef, bottom=sol.bottom, k=sol.basis.k,
             g=sol.params.g, r=sol.params.r, t=sol.t,
             domain=np.array([m.x_lo, m.x_hi]), nx=m.nx,
             hq=sol.hq if sol.hq is not None else np.zeros(0))


def load_solution(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"reference file {path} not found")
    d = np.load(path, allow_pickle=False)
    mesh = Mesh1D(float(d["domain"][0]), float(d["domain"][1]), int(d["nx"]))
    hq = d["hq"] if d["hq"].size else None
    return Solution(str(d["scheme"]), mesh, ModalBasis(int(d["k"])),
                    PhysParams(float(d["g"]), float(d["r"])), d["coef"], d["bottom"],
                    float(d["t"]), hq)


def write_outputs(result: RunResult, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    files = []
    for t, sol in sorted(result.snapshots.items()):
        p = out / f"{cfg.case}_{cfg.scheme}_t{_fmt_time(t)}.csv"
        write_csv(sol, p)
        files.append(str(p))
    if result.solution.dim == 1:
        p = out / f"{cfg.case}_{cfg.scheme}_final.npz"
        save_solution(result.solution, p)
        files.append(str(p))
    meta = {
        "config": {k: v for k, v in asdict(cfg).items()},
        "steps": len(result.reports),
        "alpha_history": result.alpha_history,
        "dt_history": [r.dt for r in result.reports],
        "hyperbolicity_lost_steps": sum(1 for r in result.reports if not r.hyperbolic),
        "max_troubled_cells": max((r.troubled for r in result.reports), default=0),
        "newton": result.newton,
        "stage_newton_max": max((r.newton_max for r in result.reports), default=0),
        "errors": result.errors.as_dict() if result.errors else None,
        "wall_time_s": result.wall_time,
    }
    p = out / f"{cfg.case}_{cfg.scheme}_meta.json"
    p.write_text(json.dumps(meta, indent=2, default=float))
    files.append(str(p))
    return files
