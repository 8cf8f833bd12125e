import numpy as np
import pytest

from conftest import LEFT_DEPTHS, RIGHT_DEPTHS
from twolayer_pcdg.basis import Mesh1D, ModalBasis
from twolayer_pcdg.cases import get_case
from twolayer_pcdg.harness import RunConfig, _depth_seeds, initial_solution
from twolayer_pcdg.model import PhysParams, cons_to_equil_moving, equil_to_cons_moving, flux_conservative
from twolayer_pcdg.moving import (MovingContext, fluctuation_moving, lf_alpha_moving,
                                  lf_flux_modified, make_state, path_integral, path_integrand,
                                  rhs_moving, coupling_volume_moving, starred_interface_states)

pytestmark = pytest.mark.filterwarnings("ignore:case .* not on a cell interface")

V_EQ = np.array([50.0, 12.0, 55.0, 10.0])


def moving_setup(case_name, k, nx=None):
    cfg = RunConfig(case_name, k=k, nx=nx, scheme="moving").resolved()
    case = get_case(case_name)
    sol = initial_solution(case, cfg)
    ctx = MovingContext(sol.params, sol.mesh, sol.basis, case.bc)
    seeds = _depth_seeds(case, sol.mesh, sol.basis)
    state = make_state(sol.coef.copy(), *seeds, ctx)
    ctx.alpha = lf_alpha_moving(state, ctx)
    return state, ctx


def ctx1(params):
    return MovingContext(params, Mesh1D(0.0, 1.0, 1), ModalBasis(1))


def test_starred_states_at_equilibrium_jump(params):
    vL = np.append(V_EQ, -2.0)
    vR = np.append(V_EQ, -1.0)
    uL, uR = starred_interface_states(vL, vR, LEFT_DEPTHS, RIGHT_DEPTHS, ctx1(params))
    assert uL[4] == -2.0 and uR[4] == -2.0
    for u in (uL, uR):
        assert u[0] == pytest.approx(LEFT_DEPTHS[0], abs=1e-11)
        assert u[2] == pytest.approx(LEFT_DEPTHS[1], abs=1e-11)
    np.testing.assert_array_equal(uL, uR)


def test_starred_states_still_water(params):
    # lake at rest: h1 = 0.6 and w = -0.5 on both sides, bottom steps from -2 to -1.5
    h1, w = 0.6, -0.5
    uL = (h1, 0.0, w + 2.0, 0.0, -2.0)
    uR = (h1, 0.0, w + 1.5, 0.0, -1.5)
    vL, vR = cons_to_equil_moving(uL, params), cons_to_equil_moving(uR, params)
    sL, sR = starred_interface_states(vL, vR, (h1, w + 2.0), (h1, w + 1.5), ctx1(params))
    # hydrostatic reconstruction at b* = -2 keeps h1 and w
    for s in (sL, sR):
        assert s[0] == pytest.approx(h1, abs=1e-11)
        assert s[2] == pytest.approx(w + 2.0, abs=1e-11)


def test_lf_flux_modified(params):
    uL = np.array([LEFT_DEPTHS[0], 12.0, LEFT_DEPTHS[1], 10.0, -2.0])
    uR = np.array([RIGHT_DEPTHS[0], 12.0, RIGHT_DEPTHS[1], 10.0, -1.0])
    mean = 0.5 * (flux_conservative(uL, params) + flux_conservative(uR, params))
    np.testing.assert_array_equal(lf_flux_modified(uL, uR, uL, uL, 30.0, params), mean)
    np.testing.assert_array_equal(lf_flux_modified(uL, uR, uL, uR, 0.0, params), mean)
    np.testing.assert_array_equal(lf_flux_modified(uL, uL, uL, uL, 30.0, params),
                                  flux_conservative(uL, params))


def test_fluctuation_equal_sides(params):
    v = np.append(V_EQ, -2.0)
    ctx = ctx1(params)
    uL = np.array([LEFT_DEPTHS[0], 12.0, LEFT_DEPTHS[1], 10.0, -2.0])
    D = fluctuation_moving(v, v, LEFT_DEPTHS, LEFT_DEPTHS, ctx)
    np.testing.assert_array_equal(D, 0.0)
    vR = np.append(V_EQ, -1.0)
    uR = np.array([RIGHT_DEPTHS[0], 12.0, RIGHT_DEPTHS[1], 10.0, -1.0])
    D = fluctuation_moving(v, vR, LEFT_DEPTHS, RIGHT_DEPTHS, ctx)
    np.testing.assert_allclose(D, flux_conservative(uL, params) - flux_conservative(uR, params),
                               atol=1e-13)


def test_simpson_matches_dense_quadrature(params):
    rng = np.random.default_rng(7)
    ctx = ctx1(params)
    for _ in range(10):
        uL = np.array([1.2, 12.0, 0.97, 10.0, -2.0]) + rng.uniform(-0.01, 0.01, 5)
        uR = uL + rng.uniform(-0.01, 0.01, 5)
        vL, vR = cons_to_equil_moving(uL, params), cons_to_equil_moving(uR, params)
        I = path_integral(vL, vR, uL[[0, 2]], uR[[0, 2]], ctx)
        tau = np.linspace(0.0, 1.0, 10001)
        VL = np.repeat(np.asarray(vL)[:, None], tau.size, axis=1)
        VR = np.repeat(np.asarray(vR)[:, None], tau.size, axis=1)
        HL = np.repeat(uL[[0, 2], None], tau.size, axis=1)
        HR = np.repeat(uR[[0, 2], None], tau.size, axis=1)
        f = path_integrand(tau, VL, VR, HL, HR, ctx)
        dense = np.sum(0.5 * (f[:, 1:] + f[:, :-1]) * np.diff(tau), axis=1)
        np.testing.assert_allclose(I, dense, atol=1e-8)


def test_coupling_volume_constant_is_zero(params):
    mesh = Mesh1D(0.0, 0.1, 2)
    basis = ModalBasis(2)
    ctx = MovingContext(params, mesh, basis)
    coef = np.zeros((2, 5, 3))
    coef[:, :, 0] = np.append(V_EQ, -2.0)
    hq = np.empty((2, 2, basis.nq))
    hq[0], hq[1] = LEFT_DEPTHS
    np.testing.assert_array_equal(coupling_volume_moving(coef, hq, ctx), 0.0)


def test_coupling_volume_manufactured(params):
    """Linear E, m, b on one cell against a dense Gauss integral of G(u) u_x P_m."""
    g, r = params.g, params.r
    x0, dx = 0.0, 0.02
    slope = np.array([3.0, 0.5, 2.0, -0.4, 1.5])
    v0 = np.append(V_EQ, -2.0)
    mesh = Mesh1D(x0, x0 + dx, 1)
    basis = ModalBasis(2)
    ctx = MovingContext(params, mesh, basis)
    coef = np.zeros((1, 5, 3))
    coef[0, :, 0] = v0 + slope * dx / 2
    coef[0, :, 1] = slope * dx / 2
    vq = coef[0] @ basis.V.T
    h1, h2 = equil_to_cons_moving(vq, (np.full(basis.nq, 1.2), np.full(basis.nq, 1.0)), params)
    got = coupling_volume_moving(coef, np.array([h1, h2])[:, None, :], ctx)[0]

    xi, w = np.polynomial.legendre.leggauss(40)
    x = x0 + (xi + 1) * dx / 2

    def depths(x):
        v = v0[:, None] + slope[:, None] * (x - x0)
        return np.array(equil_to_cons_moving(v, (np.full(x.size, 1.2), np.full(x.size, 1.0)), params))

    eps = 1e-6
    H = depths(x)
    Hx = (depths(x + eps) - depths(x - eps)) / (2 * eps)
    bx = slope[4]
    G1 = g * H[0] * (Hx[1] + bx)
    G3 = g * H[1] * (r * Hx[0] + bx)
    P, _ = basis.tabulate(xi)
    oracle = np.zeros((5, 3))
    oracle[1] = (G1 * w) @ P * dx / 2
    oracle[3] = (G3 * w) @ P * dx / 2
    np.testing.assert_allclose(got, oracle, atol=1e-8)


@pytest.mark.parametrize("k", [1, 2])
def test_rhs_vanishes_on_moving_equilibrium(k):
    state, ctx = moving_setup("moving_wb_1d", k)
    R = rhs_moving(state, ctx)
    assert np.abs(R).max() <= 1e-12


@pytest.mark.parametrize("case", ["still_wb_1d", "still_wb_1d_dis"])
def test_rhs_vanishes_on_still_water(case):
    state, ctx = moving_setup(case, 2)
    R = rhs_moving(state, ctx)
    assert np.abs(R).max() <= 1e-12
