import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsp_shock import profile_ode as po
from nsp_shock.errors import DomainTooShort, TailUnresolved
from nsp_shock.rankine_hugoniot import PlasmaParams, parametrize_downstream


def test_rhs_vanishes_at_upstream():
    assert po.profile_rhs(po.ProfileState(1.0, 1.0, 0.0), PlasmaParams(0.7, 0.3, 2.0), 1.1) == (0.0, 0.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 5), st.floats(1e-3, 0.5), st.floats(0.1, 3), st.floats(0.1, 3))
def test_rhs_vanishes_at_downstream(T, frac, mu, lam):
    eps = frac * math.sqrt(T + 1)
    s, right, _ = parametrize_downstream(T, eps)
    out = po.profile_rhs(po.ProfileState(right.n, right.n, 0.0), PlasmaParams(T, mu, lam), s)
    assert max(map(abs, out)) < 1e-12


def test_rhs_hand_evaluation():
    # T=0, mu=lam=1, s=0.9, (n, Z, W) = (0.9, 0.95, 0.01):
    # bracket = 0.081 + 0.009 - 0.00005 - 0.05 = 0.03995, n' = 0.81/0.9 * bracket
    dn, dZ, dW = po.profile_rhs(po.ProfileState(0.9, 0.95, 0.01), PlasmaParams(0.0), 0.9)
    assert dn == pytest.approx(0.9 * 0.03995, rel=1e-13)
    assert dZ == pytest.approx(0.0095, rel=1e-13)
    assert dW == pytest.approx(0.05, rel=1e-13)


def test_reference_spectrum_golden_ratio():
    s1, s2, s3, s4 = po.jacobian_eigenvalues_reference(PlasmaParams(0.0))
    assert s4 == pytest.approx(0.6180339887, abs=1e-9)
    assert s1 == pytest.approx(-1.6180339887, abs=1e-9)
    assert s2 == s3 == 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 5), st.floats(0.05, 5), st.floats(0.05, 5))
def test_reference_spectrum_matches_diagonalized_jacobian(T, mu, lam):
    p = PlasmaParams(T, mu, lam)
    closed = np.sort(po.jacobian_eigenvalues_reference(p))
    numeric = np.sort(np.linalg.eigvals(po.extended_jacobian(p)).real)
    assert np.max(np.abs(closed - numeric)) < 1e-10 * max(1.0, np.max(np.abs(closed)))


def test_large_debye_length_limit():
    s1, _, _, s4 = po.jacobian_eigenvalues_reference(PlasmaParams(1.0, 0.5, 1e6))
    assert 0 < s4 < 1e-10
    assert s1 == pytest.approx(-1 / (0.5 * math.sqrt(2.0)), rel=1e-10)


def test_jacobian_matches_finite_differences():
    p = PlasmaParams(0.5, 0.7, 1.3)
    state = np.array([0.93, 0.96, 0.02])
    s = 1.1

    def f(x):
        return np.array(po.profile_rhs(po.ProfileState(*x[:3]), p, x[3]))

    x0 = np.append(state, s)
    J = np.zeros((3, 4))
    for j in range(4):
        h = 1e-6
        e = np.zeros(4)
        e[j] = h
        J[:, j] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    assert np.allclose(po.extended_jacobian(p, tuple(state), s)[:3], J, atol=1e-8)


@pytest.mark.parametrize(
    "T, mu, n_plus, expected", [(0.0, 1.0, 1.0, 0.0), (0.0, 1.0, 0.81, 0.095), (3.0, 0.5, 0.9, 0.2)]
)
def test_g_dot_zero(T, mu, n_plus, expected):
    assert po.g_dot_zero(PlasmaParams(T, mu), n_plus) == pytest.approx(expected, abs=1e-15)


def test_slow_rate_tends_to_twice_g_dot():
    # a tanh(g xi) profile approaches its limits at rate 2 g; the gap closes like O(eps)
    p = PlasmaParams(0.0)
    gaps = []
    for eps in (0.01, 0.005, 0.0025):
        s, right, _ = parametrize_downstream(0.0, eps)
        gaps.append(po.slow_rate(p, s) / po.g_dot_zero(p, right.n) - 2.0)
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[1] / gaps[0] == pytest.approx(0.5, rel=0.1)
    assert gaps[2] / gaps[1] == pytest.approx(0.5, rel=0.1)


def test_profile_structure(profile_t0):
    sol = profile_t0
    assert sol.iterations <= 15
    assert np.max(np.abs(sol.u - sol.s * (1 - 1 / sol.n))) < 1e-8
    for name in ("n", "u", "phi"):
        assert po.strictly_decreasing(getattr(sol, name)), name
    mid = len(sol.grid) // 2
    assert sol.n[mid] == pytest.approx(0.5 * (1 + sol.right.n), abs=1e-15)
    c_lo, c_hi = po.monotonicity_constants(sol)
    assert 0 < c_lo <= c_hi < 2
    assert po.g_dot_zero(sol.params, sol.right.n) * sol.grid[-1] >= 30


def test_first_integral_converges_second_order():
    p = PlasmaParams(0.0)
    rate = po.g_dot_zero(p, parametrize_downstream(0.0, 0.02)[1].n)
    L = 40 / rate
    res = [po.first_integral_residual(po.solve_profile(p, 0.02, po.GridSpec(L=L, nodes=N))) for N in (2001, 4001)]
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.15)


def test_first_integral_zero_for_constant_state(profile_t0):
    sol = profile_t0
    const = po.ProfileSolution(
        sol.grid, np.ones_like(sol.grid), np.zeros_like(sol.grid), np.zeros_like(sol.grid),
        sol.s, sol.left, sol.left, sol.params, 0.0,
    )
    assert po.first_integral_residual(const) == 0.0


def test_first_integral_detects_corruption(profile_t0):
    sol = profile_t0
    base = po.first_integral_residual(sol)
    bump = 1e-3 * np.exp(-((sol.grid - 20.0) / 5.0) ** 2)
    bad = po.ProfileSolution(sol.grid, sol.n + bump, sol.u, sol.phi, sol.s, sol.left, sol.right, sol.params, 0.0)
    assert po.first_integral_residual(bad) >= 10 * base


def test_left_tail_follows_slow_eigenvalue(profile_t0):
    sol = profile_t0
    fitted = po.decay_rate_estimate(sol, "left")
    assert fitted == pytest.approx(po.slow_rate(sol.params, sol.s), rel=0.05)


def test_tail_rate_proportional_to_amplitude(profile_t0):
    half = po.solve_profile(PlasmaParams(0.0), 0.01, po.GridSpec(nodes=4001))
    ratio = po.decay_rate_estimate(half, "left") / po.decay_rate_estimate(profile_t0, "left")
    assert ratio == pytest.approx(0.5, rel=0.1)


def test_tail_fit_rejects_constant_field(profile_t0):
    sol = profile_t0
    flat = po.ProfileSolution(
        sol.grid, np.ones_like(sol.grid), np.zeros_like(sol.grid), np.zeros_like(sol.grid),
        sol.s, sol.left, sol.right, sol.params, 0.0,
    )
    with pytest.raises(TailUnresolved):
        po.decay_rate_estimate(flat, "left")


def test_short_domain_is_reported():
    with pytest.raises(DomainTooShort):
        po.solve_profile(PlasmaParams(0.0), 0.02, po.GridSpec(nodes=801, L_factor=4.0))


def test_continuation_reaches_larger_amplitude():
    sol = po.solve_profile(PlasmaParams(1.0, 1.0, 1.0), 0.6, po.GridSpec(nodes=2001))
    assert sol.residual_norm < 1e-9
    assert np.max(np.abs(sol.u - sol.s * (1 - 1 / sol.n))) < 1e-8


def _left_rates_real(p, s):
    ev = np.linalg.eigvals(po.extended_jacobian(p, (1.0, 1.0, 0.0), s)[:3, :3])
    return bool(np.all(ev.imag == 0))


def test_oscillatory_regime_overshoots():
    # beyond the amplitude where the upstream rates turn complex the tail oscillates
    p = PlasmaParams(0.0)
    s, _, _ = parametrize_downstream(0.0, 0.125)
    assert not _left_rates_real(p, s)
    sol = po.solve_profile(p, 0.125, po.GridSpec(nodes=2001))
    assert not po.strictly_decreasing(sol.n)
    assert np.max(sol.n) > 1.0


@settings(max_examples=6, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.01, 0.2), st.floats(0.5, 2.0), st.floats(0.5, 2.0))
def test_profiles_are_heteroclinic_and_monotone_when_rates_real(T, frac, mu, lam):
    p = PlasmaParams(T, mu, lam)
    eps = frac * math.sqrt(T + 1)
    sol = po.solve_profile(p, eps, po.GridSpec(nodes=2001))
    if _left_rates_real(p, sol.s):
        assert po.strictly_decreasing(sol.n)
    assert np.max(np.abs(sol.u - sol.s * (1 - 1 / sol.n))) < 1e-8
    assert abs(sol.n[0] - 1) < 1e-6 * (1 - sol.right.n)
    assert abs(sol.n[-1] - sol.right.n) < 1e-6 * (1 - sol.right.n)


def test_quasineutral_profile_solves_its_equation():
    T, mu, eps = 0.0, 1.0, 0.02
    s, right, _ = parametrize_downstream(T, eps)
    grid = np.linspace(-600, 600, 4001)
    sol = po.solve_quasineutral_profile(T, mu, eps, grid)
    n, h = sol.n, grid[1] - grid[0]
    resid = mu * s * np.gradient(n, h) - n**2 * ((T + 1 - s * s) * (n - 1) + s * s * (n - 1) ** 2 / n)
    assert np.max(np.abs(resid[1:-1])) < 1e-7
    assert np.allclose(sol.phi, np.log(n))
    assert po.strictly_decreasing(n)
