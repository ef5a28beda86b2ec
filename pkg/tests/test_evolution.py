import math
import warnings

import numpy as np
import pytest
import sympy as sy
from hypothesis import given, settings, strategies as st

from nsp_shock import evolution as ev
from nsp_shock.errors import CFLViolation, NewtonDiverged, PositivityLost
from nsp_shock.rankine_hugoniot import LagrangianEquilibrium, PlasmaParams

REST = LagrangianEquilibrium(1.0, 0.0, 0.0)


def constant_state(nodes=201, L=20.0, s=1.2, T=1.0):
    grid = np.linspace(-L, L, nodes)
    one = np.ones(nodes)
    return ev.LagrangianState.from_fields(grid, one, 0 * one, 0 * one, s, PlasmaParams(T), REST, REST)


# Poisson


def test_poisson_constant_state():
    y = np.linspace(-10, 10, 201)
    v = np.full_like(y, 1.3)
    phi = ev.poisson_solve(v, 1.0, np.zeros_like(y), -math.log(1.3), -math.log(1.3), y[1] - y[0])
    np.testing.assert_allclose(phi, -math.log(1.3), atol=1e-12)


def test_poisson_reproduces_profile_potential(lagrangian_small):
    raw, polished = lagrangian_small
    guess = np.linspace(raw.left.phi, raw.right.phi, len(raw.grid))
    phi = ev.poisson_solve(raw.v, raw.params.lam, guess, raw.left.phi, raw.right.phi, raw.dy)
    # interpolated profile: agreement to the discretization level of the polish
    assert np.max(np.abs(phi - raw.phi)) < 10 * polished.steady_residual
    phi_p = ev.poisson_solve(polished.v, 1.0, guess, polished.left.phi, polished.right.phi, polished.dy)
    assert np.max(np.abs(phi_p - polished.phi)) < 1e-10


def test_poisson_newton_is_quadratic(lagrangian_small):
    _, prof = lagrangian_small
    hist = []
    ev.poisson_solve(prof.v, 1.0, np.zeros_like(prof.v), prof.left.phi, prof.right.phi, prof.dy, tol=1e-13, history=hist)
    assert hist[-1] < 1e-13
    ratios = [b / a**2 for a, b in zip(hist, hist[1:]) if 1e-12 < a < 1e-2]
    assert ratios and max(ratios) < 100.0


def test_poisson_rejects_nonpositive_volume():
    v = np.ones(11)
    v[5] = -0.1
    with pytest.raises(PositivityLost):
        ev.poisson_solve(v, 1.0, np.zeros(11), 0.0, 0.0, 0.1)


def test_poisson_reports_divergence():
    y = np.linspace(-5, 5, 101)
    with pytest.raises(NewtonDiverged) as info:
        ev.poisson_solve(np.ones_like(y), 1.0, np.full_like(y, 40.0), 0.0, 0.0, y[1] - y[0], max_iter=2)
    assert len(info.value.history) >= 2


# initial data


def test_zero_amplitude_is_the_profile(lagrangian_small):
    _, prof = lagrangian_small
    st0 = ev.make_initial(prof, ev.PerturbationSpec(amplitude=0.0))
    assert not st0.dv.any() and not st0.du.any()
    np.testing.assert_allclose(st0.phi, prof.phi, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(
    amp=st.floats(1e-4, 1e-2),
    center=st.floats(-50.0, 50.0),
    width=st.floats(2.0, 20.0),
    shape=st.sampled_from(["derivative-of-bump", "dipole"]),
)
def test_perturbation_has_zero_mass(lagrangian_small, amp, center, width, shape):
    _, prof = lagrangian_small
    pv, pu = ev.make_perturbation(prof, ev.PerturbationSpec(amp, center, width, shape))
    assert abs(np.sum(pv) * prof.dy) < 1e-14
    assert abs(np.sum(pu) * prof.dy) < 1e-14


def test_amplitude_for_energy(lagrangian_small):
    _, prof = lagrangian_small
    spec = ev.PerturbationSpec(width=10.0)
    a = ev.amplitude_for_energy(prof, spec, 1e-3)
    from nsp_shock.energy import initial_energy

    pv, pu = ev.make_perturbation(prof, ev.PerturbationSpec(amplitude=a, width=10.0))
    assert initial_energy(pv, pu, prof.dy) == pytest.approx(1e-3, rel=1e-12)


def test_too_wide_perturbation(lagrangian_small):
    _, prof = lagrangian_small
    with pytest.raises(ValueError, match="too wide"):
        ev.make_initial(prof, ev.PerturbationSpec(amplitude=1e-3, width=60.0))
    with pytest.raises(ValueError):
        ev.perturbation_shape(prof.grid, ev.PerturbationSpec(shape="square"))


# stepping


def test_constant_equilibrium_unchanged():
    st0 = constant_state()
    st1 = st0
    for _ in range(20):
        st1 = ev.step(st1, ev.stable_dt(st1))
    assert np.max(np.abs(st1.v - 1.0)) < 1e-14
    assert np.max(np.abs(st1.u)) < 1e-14
    assert np.max(np.abs(st1.phi)) < 1e-14


def test_profile_is_near_stationary(lagrangian_small):
    raw, polished = lagrangian_small
    for prof, bound in ((raw, 10 * polished.steady_residual), (polished, 1e-12)):
        st0 = ev.profile_state(prof)
        st1 = ev.step(st0, ev.stable_dt(st0))
        change = max(np.max(np.abs(st1.v - prof.v)), np.max(np.abs(st1.u - prof.u)))
        assert change < bound


def test_cfl_violation():
    st0 = constant_state()
    with pytest.raises(CFLViolation):
        ev.step(st0, 1.5 * ev.stable_dt(st0))


def test_positivity_lost():
    st0 = constant_state()
    st0.dv = -1.5 * np.exp(-st0.grid**2)
    with pytest.raises(PositivityLost):
        ev.step(st0, ev.stable_dt(constant_state()), check_cfl=False)


def _bump_state(nodes=401, L=20.0):
    st0 = constant_state(nodes, L)
    y = st0.grid
    q = np.exp(-(y**2) / 4)
    st0.dv = 0.05 * q * (1 - y / 3)
    st0.du = 0.03 * q * np.sin(y)
    st0.dv -= np.sum(st0.dv) / np.sum(q) * q
    st0.du -= np.sum(st0.du) / np.sum(q) * q
    st0.phi = ev.poisson_solve(st0.v, 1.0, st0.phi, 0.0, 0.0, st0.dy)
    return st0


def _run(state, dt, t_end, forcing=None):
    n = int(round(t_end / dt))
    for _ in range(n):
        state = ev.step(state, dt, forcing=forcing)
    return state


def test_time_refinement_second_order():
    st0 = _bump_state()
    dt0 = ev.stable_dt(st0) * 0.5
    t_end = 8 * dt0
    ref = _run(st0, dt0 / 64, t_end)
    errs = []
    for k in (1, 2, 4):
        out = _run(st0, dt0 / k, t_end)
        errs.append(max(np.max(np.abs(out.v - ref.v)), np.max(np.abs(out.u - ref.u))))
    for a, b in zip(errs, errs[1:]):
        assert 3.0 < a / b < 5.0


def test_mass_conserved_by_steps():
    st0 = _bump_state(1201, 60.0)
    out = _run(st0, ev.stable_dt(st0) * 0.9, 2.0)
    assert abs(np.sum(out.dv) * out.dy) < 1e-14
    assert abs(np.sum(out.du) * out.dy) < 1e-14


# manufactured solution

_y, _t = sy.symbols("y t")
_S, _T, _MU, _LAM = 1.2, 1.0, 1.0, 1.0
_g = sy.exp(-(_y**2) / 8)
_V = 1 + sy.Rational(1, 10) * _g * (1 + sy.sin(_t) / 2)
_U = sy.Rational(1, 10) * _y * _g * sy.cos(_t)
_P = sy.Rational(1, 20) * _g * sy.cos(2 * _t)
_SV = sy.diff(_V, _t) - sy.diff(_S * _V + _U, _y)
_FU = _S * _U - _T / _V - sy.exp(_P) + _LAM**2 * (sy.diff(_P, _y) / _V) ** 2 / 2 + _MU * sy.diff(_U, _y) / _V
_SU = sy.diff(_U, _t) - sy.diff(_FU, _y)
_SP = -(_LAM**2) * sy.diff(sy.diff(_P, _y) / _V, _y) - 1 + _V * sy.exp(_P)
_exact = sy.lambdify((_t, _y), (_V, _U, _P), "numpy")
_source = sy.lambdify((_t, _y), (_SV, _SU, _SP), "numpy")


def _forcing(t, y):
    return tuple(np.broadcast_to(np.asarray(f, dtype=float), y.shape).copy() for f in _source(t, y))


def test_manufactured_solution_second_order():
    errs = []
    for nodes in (301, 601, 1201):
        y = np.linspace(-30, 30, nodes)
        v, u, phi = (np.broadcast_to(f, y.shape).astype(float) for f in _exact(0.0, y))
        st0 = ev.LagrangianState.from_fields(y, v, u, phi, _S, PlasmaParams(_T, _MU, _LAM), REST, REST)
        dt = 0.1 * (y[1] - y[0])
        out = _run(st0, dt, 1.0, _forcing)
        ve, ue, pe = (np.broadcast_to(f, y.shape) for f in _exact(1.0, y))
        errs.append(max(np.max(np.abs(out.v - ve)), np.max(np.abs(out.u - ue)), np.max(np.abs(out.phi - pe))))
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


# evolution


def test_unperturbed_evolution_stays_put(lagrangian_small):
    _, prof = lagrangian_small
    tr = ev.evolve(ev.profile_state(prof), prof, 20.0, sample_every=5.0)
    assert np.all(np.diff(tr.times) > 0)
    assert max(tr.column("sup_perturbation")) < 10 * prof.steady_residual


def test_evolve_decays_and_conserves(lagrangian_small):
    _, prof = lagrangian_small
    a = ev.amplitude_for_energy(prof, ev.PerturbationSpec(width=10.0), 1e-3)
    tr = ev.evolve(ev.make_initial(prof, ev.PerturbationSpec(amplitude=a, width=10.0)), prof, 60.0, sample_every=2.0)
    assert max(np.abs(tr.column("mass_v")).max(), np.abs(tr.column("mass_u")).max()) < 1e-10
    sup = tr.column("sup_perturbation")
    assert sup[-1] < sup.max()
    assert np.all(tr.column("margin") > 0)
    assert not tr.warnings


def test_boundary_warning():
    st0 = _bump_state(201)
    prof = ev.LagrangianProfile(st0.grid, np.ones(201), np.zeros(201), np.zeros(201), st0.s, st0.params, REST, REST)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tr = ev.evolve(st0, prof, 5.0, sample_every=1.0)
    assert tr.warnings
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_auto_grid_clears_the_acoustic_wave():
    g = ev.auto_grid(1.0, 1.38, 1.0, 4000.0)
    assert g.L_left >= (1.38 + math.sqrt(2.0)) * 4000.0
    assert g.L_left % 100 == 0
