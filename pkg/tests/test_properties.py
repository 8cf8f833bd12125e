"""Property-based checks of the model, limiter and time stepping."""
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from twolayer_pcdg.basis import Mesh1D, ModalBasis
from twolayer_pcdg.limiter import LimiterConfig, limit_moving, limit_still
from twolayer_pcdg.model import (PhysParams, cons_to_equil_moving, dh_dv, eigenvalues_exact,
                                 equil_to_cons_moving, quartic_roots)
from twolayer_pcdg.moving import MovingContext, cons_coefficients, path_integral, path_integrand
from twolayer_pcdg.timestep import cfl_dt, ssprk3_step_moving, ssprk3_step_still
from test_moving import moving_setup
from test_still import still_context

P = PhysParams(10.0, 0.98)


def companion_roots(u, params):
    """Oracle: eigenvalues of the conservative Jacobian (companion of the quartic)."""
    h1, m1, h2, m2 = u
    g, r = params.g, params.r
    u1, u2 = m1 / h1, m2 / h2
    A = np.array([[0, 1, 0, 0], [g * h1 - u1**2, 2 * u1, g * h1, 0],
                  [0, 0, 0, 1], [g * r * h2, 0, g * h2 - u2**2, 2 * u2]])
    return np.linalg.eigvals(A)


def test_quartic_roots_against_oracle_1000_states():
    rng = np.random.default_rng(2024)
    n = 1000
    h1 = rng.uniform(0.1, 2.0, n)
    h2 = rng.uniform(0.1, 2.0, n)
    u1 = rng.uniform(-3.0, 3.0, n)
    u2 = rng.uniform(-3.0, 3.0, n)
    r = rng.uniform(0.5, 0.999, n)
    worst = 0.0
    for i in range(n):
        params = PhysParams(9.81, r[i])
        u = (h1[i], u1[i] * h1[i], h2[i], u2[i] * h2[i])
        got = quartic_roots(u, params)
        ref = companion_roots(u, params)
        # match as multisets (roots may be complex)
        for z in ref:
            worst = max(worst, np.min(np.abs(got - z)))
        ev = eigenvalues_exact(u, params)
        if ev.real:
            np.testing.assert_allclose(ev.speeds, np.sort(ref.real), atol=1e-8)
    assert worst <= 1e-8


@settings(max_examples=200, deadline=None)
@given(h1=st.floats(0.2, 2.0), h2=st.floats(0.2, 2.0), u1=st.floats(-2, 2), u2=st.floats(-2, 2))
def test_eigenvalues_property(h1, h2, u1, u2):
    u = (h1, u1 * h1, h2, u2 * h2)
    ref = companion_roots(u, P)
    got = quartic_roots(u, P)
    assert max(np.min(np.abs(got - z)) for z in ref) <= 1e-8


# moving states, filtered below to be clearly subcritical for both wave families
states = st.tuples(st.floats(0.6, 1.6), st.floats(-1.0, 1.0), st.floats(0.6, 1.6),
                   st.floats(-1.0, 1.0), st.floats(-2.5, -0.5))


def subcritical(u, limit=0.5):
    h1, m1, h2, m2, _ = u
    gp = P.g * (1 - P.r)
    internal = (m1 / h1) ** 2 / (gp * h1) + (m2 / h2) ** 2 / (gp * h2)
    return internal < limit


@settings(max_examples=100, deadline=None)
@given(states)
def test_round_trip(u):
    assume(subcritical(u))
    v = cons_to_equil_moving(u, P)
    h1, h2 = equil_to_cons_moving(v, (u[0] * 1.05, u[2] * 0.95), P)
    assert h1 == pytest.approx(u[0], abs=1e-11)
    assert h2 == pytest.approx(u[2], abs=1e-11)


@settings(max_examples=50, deadline=None)
@given(states)
def test_dh_dv_property(u):
    assume(subcritical(u))
    v = np.array(cons_to_equil_moving(u, P))
    J = dh_dv(u[0], u[2], v, P)
    step = 1e-6
    for i in range(5):
        vp, vm = v.copy(), v.copy()
        vp[i] += step
        vm[i] -= step
        fd = (np.array(equil_to_cons_moving(vp, (u[0], u[2]), P))
              - np.array(equil_to_cons_moving(vm, (u[0], u[2]), P))) / (2 * step)
        np.testing.assert_allclose(J[:, i], fd, rtol=1e-6, atol=1e-8 * max(1.0, np.abs(J).max()))


@settings(max_examples=30, deadline=None)
@given(states, st.lists(st.floats(-0.005, 0.005), min_size=5, max_size=5))
def test_simpson_vs_dense_property(uL, du):
    assume(subcritical(uL, 0.3))
    ctx = MovingContext(P, Mesh1D(0.0, 1.0, 1), ModalBasis(1))
    uL = np.array(uL)
    uR = uL + np.array(du)
    vL, vR = cons_to_equil_moving(uL, P), cons_to_equil_moving(uR, P)
    I = path_integral(vL, vR, uL[[0, 2]], uR[[0, 2]], ctx)
    tau = np.linspace(0.0, 1.0, 10001)
    rep = lambda a: np.repeat(np.asarray(a, float)[:, None], tau.size, axis=1)
    f = path_integrand(tau, rep(vL), rep(vR), rep(uL[[0, 2]]), rep(uR[[0, 2]]), ctx)
    dense = np.sum(0.5 * (f[:, 1:] + f[:, :-1]) * np.diff(tau), axis=1)
    np.testing.assert_allclose(I, dense, atol=1e-8)


# -- limiter -----------------------------------------------------------------------

coef_strategy = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s))


def random_still_coef(rng, nx=12, k=2):
    coef = np.zeros((nx, 4, k + 1))
    coef[:, 0, 0] = rng.uniform(0.5, 1.5, nx)
    coef[:, 1, 0] = rng.uniform(-0.3, 0.3, nx)
    coef[:, 2, 0] = rng.uniform(-1.2, -0.8, nx)
    coef[:, 3, 0] = rng.uniform(-0.3, 0.3, nx)
    coef[..., 1:] = rng.normal(scale=0.05, size=(nx, 4, k))
    return coef


@settings(max_examples=100, deadline=None)
@given(coef_strategy, st.booleans(), st.booleans(), st.sampled_from([0.0, 1.0, 50.0]))
def test_still_limiter_idempotent(rng, characteristic, periodic, M):
    coef = random_still_coef(rng)
    cfg = LimiterConfig(M=M, characteristic=characteristic)
    bottom = np.full(coef.shape[0], -2.0)
    once, _ = limit_still(coef, cfg, 0.1, periodic, P, bottom)
    twice, bad = limit_still(once, cfg, 0.1, periodic, P, bottom)
    np.testing.assert_array_equal(once[..., 0], coef[..., 0])
    np.testing.assert_array_equal(twice, once)
    assert not bad.any()


@settings(max_examples=50, deadline=None)
@given(coef_strategy, st.booleans())
def test_moving_limiter_idempotent(rng, periodic):
    nx = 12
    u = np.array([rng.uniform(1.1, 1.3, nx), np.full(nx, 12.0), rng.uniform(0.9, 1.0, nx),
                  np.full(nx, 10.0)])
    coef = np.zeros((nx, 5, 3))
    coef[:, :4, 0] = np.array(cons_to_equil_moving(np.vstack([u, np.full(nx, -2.0)]), P))[:4].T
    coef[:, 4, 0] = -2.0
    coef[:, :4, 1:] = rng.normal(scale=0.05, size=(nx, 4, 2))
    cfg = LimiterConfig()
    once, _, _ = limit_moving(coef, cfg, 0.1, P, u, periodic)
    twice, bad, _ = limit_moving(once, cfg, 0.1, P, u, periodic)
    np.testing.assert_array_equal(once[..., 0], coef[..., 0])
    np.testing.assert_array_equal(once[:, 4], coef[:, 4])
    np.testing.assert_array_equal(twice, once)
    assert not bad.any()


# -- time stepping -------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2])
def test_still_mass_conservation_periodic(k):
    sol, ctx = still_context("accuracy", k, nx=40)
    coef = sol.coef
    b_avg = sol.bottom[:, 0]
    mass = lambda c: (c[:, 0, 0].sum(), (c[:, 2, 0] - b_avg).sum())
    m0 = mass(coef)
    dt = cfl_dt(sol.mesh, ctx.alpha, 0.18)
    for n in range(100):
        coef, _ = ssprk3_step_still(coef, ctx, dt, n * dt)
    for a, b in zip(mass(coef), m0):
        assert abs(a - b) <= 1e-12 * abs(b)


@pytest.mark.slow
def test_moving_mass_conservation_periodic():
    state, ctx = moving_setup("accuracy", 1, nx=40)
    U0 = cons_coefficients(state, ctx.basis)[:, :, 0].sum(axis=0)
    dt = cfl_dt(ctx.mesh, ctx.alpha, 0.18)
    for n in range(100):
        state, _ = ssprk3_step_moving(state, ctx, dt, n * dt)
    U = cons_coefficients(state, ctx.basis)[:, :, 0].sum(axis=0)
    for i in (0, 2):
        assert abs(U[i] - U0[i]) <= 1e-12 * abs(U0[i])


@pytest.mark.parametrize("case", ["moving_perturbation", "riemann_1"])
def test_bottom_bitwise_invariant(case):
    state, ctx = moving_setup(case, 1, nx=100)
    b0 = state.coef[:, 4].copy()
    t = 0.0
    from twolayer_pcdg.moving import lf_alpha_moving
    for _ in range(10):
        ctx.alpha = lf_alpha_moving(state, ctx)
        dt = cfl_dt(ctx.mesh, ctx.alpha, 0.18)
        state, _ = ssprk3_step_moving(state, ctx, dt, t, LimiterConfig())
        t += dt
    np.testing.assert_array_equal(state.coef[:, 4], b0)
