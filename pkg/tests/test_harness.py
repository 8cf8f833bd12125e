import json
import math

import numpy as np
import pytest

from twolayer_pcdg.basis import Mesh1D, ModalBasis, project
from twolayer_pcdg.errors import ConfigError
from twolayer_pcdg.harness import (ErrorReport, RunConfig, Solution, convergence_orders,
                                   convergence_table, error_norms, load_solution, run_case,
                                   save_solution)
from twolayer_pcdg.model import PhysParams


def _still_solution(fields, nx=40, k=2, bottom=lambda x: -2.0 + 0 * x):
    mesh = Mesh1D(0.0, 1.0, nx)
    coef = project(fields, mesh, k).coef
    b = project(bottom, mesh, k).coef
    return Solution("still", mesh, ModalBasis(k), PhysParams(10.0, 0.98), coef, b)


def _smooth(x):
    return np.array([1.0 + 0.1 * np.sin(2 * np.pi * x), 0.2 + 0 * x, -1.0 + 0 * x, 0.1 + 0 * x])


def test_error_norms_identical_is_zero():
    sol = _still_solution(_smooth)
    rep = error_norms(sol, sol)
    assert all(v == 0.0 for v in rep.l1.values())
    assert all(v == 0.0 for v in rep.linf.values())


def test_error_norms_constant_offset():
    # shifting h1 by c gives L1 = c |D| and Linf = c
    c = 1e-3
    a = _still_solution(_smooth)
    b = _still_solution(lambda x: _smooth(x) + np.array([c, 0, 0, 0]).reshape((4,) + (1,) * np.ndim(x)))
    rep = error_norms(a, b)
    assert rep.l1["h1"] == pytest.approx(c * 1.0, rel=1e-10)
    assert rep.linf["h1"] == pytest.approx(c, rel=1e-10)
    assert rep.l1["m1"] == 0.0


def test_error_norms_against_function_matches_dense_sampling():
    sol = _still_solution(_smooth, nx=10, k=1)
    exact = lambda x: {"h1": 1.0 + 0.1 * np.sin(2 * np.pi * x)}
    rep = error_norms(sol, exact, variables=["h1"])
    x = (np.arange(200000) + 0.5) / 200000
    dense = np.mean(np.abs(sol.evaluate_at(x)["h1"] - exact(x)["h1"]))
    assert rep.l1["h1"] == pytest.approx(dense, rel=1e-2)


def test_error_norms_finer_reference():
    coarse = _still_solution(_smooth, nx=20)
    fine = _still_solution(_smooth, nx=80)
    rep = error_norms(coarse, fine)
    # both are projections of the same smooth field, k = 2: errors of order h^3
    assert 0 < rep.l1["h1"] < 1e-4


def test_convergence_orders_exact_values():
    reps = [ErrorReport(100, {"h1": 4e-3}, {}), ErrorReport(200, {"h1": 1e-3}, {}),
            ErrorReport(400, {"h1": 2.5e-4}, {})]
    orders = convergence_orders(reps)
    assert orders[0]["h1"] == pytest.approx(2.0)
    assert orders[1]["h1"] == pytest.approx(2.0)
    reps = [ErrorReport(100, {"h1": 1.62e-3}, {}), ErrorReport(200, {"h1": 3.94e-4}, {})]
    assert convergence_orders(reps)[0]["h1"] == pytest.approx(math.log2(1.62e-3 / 3.94e-4))
    assert convergence_orders(reps)[0]["h1"] == pytest.approx(2.04, abs=5e-3)


def test_convergence_table_single_mesh_has_no_order():
    rep = ErrorReport(50, {v: 1e-3 for v in ("h1", "m1", "h2", "m2")}, {})
    text, orders = convergence_table([rep])
    assert orders == []
    assert "--" in text.splitlines()[1]


def test_run_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        RunConfig("accuracy", k=3).resolved()
    with pytest.raises(ConfigError):
        RunConfig("accuracy", scheme="upwind").resolved()
    with pytest.raises(ConfigError):
        RunConfig("still_wb_2d", scheme="moving").resolved()
    with pytest.raises(ConfigError):
        RunConfig("accuracy", cfl=-0.1).resolved()
    with pytest.raises(ConfigError):
        RunConfig("accuracy", ref="bogus").resolved()
    with pytest.raises(ConfigError):
        RunConfig("no_such_case").resolved()


def test_run_case_outputs(tmp_path):
    cfg = RunConfig("accuracy", nx=20, k=1, t_end=0.01, ref="initial", out=str(tmp_path))
    res = run_case(cfg)
    assert len(res.alpha_history) == len(res.reports) > 0
    assert all(a > 0 for a in res.alpha_history)
    names = sorted(p.split("/")[-1] for p in res.files)
    assert names == ["accuracy_still_final.npz", "accuracy_still_meta.json",
                     "accuracy_still_t0p01.csv"]
    meta = json.loads((tmp_path / "accuracy_still_meta.json").read_text())
    assert meta["steps"] == len(res.reports)
    assert meta["errors"] is not None
    lines = (tmp_path / "accuracy_still_t0p01.csv").read_text().splitlines()
    assert lines[0].startswith("x,h1")
    assert len(lines) == 21


def test_save_load_round_trip(tmp_path):
    sol = _still_solution(_smooth)
    save_solution(sol, tmp_path / "s.npz")
    back = load_solution(tmp_path / "s.npz")
    np.testing.assert_array_equal(back.coef, sol.coef)
    assert error_norms(back, sol).linf["h1"] == 0.0
    with pytest.raises(ConfigError):
        load_solution(tmp_path / "missing.npz")


def test_file_reference(tmp_path):
    ref = run_case(RunConfig("accuracy", nx=40, k=2, t_end=0.01, ref="none"), write=False)
    save_solution(ref.solution, tmp_path / "ref.npz")
    res = run_case(RunConfig("accuracy", nx=20, k=2, t_end=0.01, ref=f"file:{tmp_path}/ref.npz"),
                   write=False)
    direct = error_norms(res.solution, ref.solution)
    assert res.errors.l1 == direct.l1
    assert 0 < res.errors.l1["h1"] < 1e-3


def test_positivity_only_for_dam_break_presets():
    assert RunConfig("dam_break_2d_flat").resolved().positivity
    assert not RunConfig("still_wb_2d").resolved().positivity
    assert RunConfig("riemann_1", positivity=True).resolved().positivity
