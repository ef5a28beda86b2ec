"""Traveling-wave shock profiles of the Navier-Stokes-Poisson system.

The profile (n, u, phi)(xi), xi = x - s t, connects U- = (1, 0, 0) to the
downstream state from :func:`parametrize_downstream`. Mass conservation gives
u = s(1 - 1/n) exactly, so the unknowns are n and phi on a uniform grid:

* n obeys the first-order equation n' = G(n, e^phi, phi'), discretized by the
  trapezoidal box scheme on every cell;
* phi obeys the Poisson equation -lam^2 phi'' = n - e^phi with Dirichlet data
  phi(+-L) = log n(+-L far field);
* the phase condition n(0) = (n- + n+)/2 fixes the translation.

The endpoint values of n are left free and checked afterwards.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp

from . import _fd
from ._newton import newton
from .errors import AmplitudeTooLarge, DomainTooShort, NewtonDiverged
from .rankine_hugoniot import (
    UPSTREAM,
    EquilibriumState,
    PlasmaParams,
    parametrize_downstream,
    sound_speed,
)


@dataclass(frozen=True)
class ProfileState:
    n: float
    Z: float
    W: float

    def __post_init__(self):
        if not (self.n > 0 and self.Z > 0):
            raise ValueError("n and Z must be positive")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L]; ``L=None`` picks a length from the slow decay rate."""

    L: float | None = None
    nodes: int = 4001
    L_factor: float = 40.0

    def build(self, rate):
        L = self.L if self.L is not None else self.L_factor / rate
        nodes = self.nodes if self.nodes % 2 == 1 else self.nodes + 1
        return np.linspace(-L, L, nodes)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 30
    boundary_tol: float = 1e-6
    max_halvings: int = 6


@dataclass
class ProfileSolution:
    grid: np.ndarray
    n: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    s: float
    left: EquilibriumState
    right: EquilibriumState
    params: PlasmaParams
    residual_norm: float
    epsilon: float = float("nan")
    iterations: int = 0
    history: list = field(default_factory=list)
    eta: np.ndarray | None = None

    def __post_init__(self):
        if self.eta is None:
            self.eta = self.n - 1.0

    @property
    def h(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def W(self):
        return _fd.d1(self.phi, self.h)


def profile_rhs(state, params, s):
    """Right-hand side (n', Z', W') of the three-field profile system."""
    n, Z, W = state.n, state.Z, state.W
    if n <= 0 or Z <= 0:
        raise ValueError("n and Z must be positive")
    if s == 0:
        raise ValueError("wave speed must be nonzero")
    T, mu, lam = params.T, params.mu, params.lam
    bracket = (T - s * s) * (n - 1) + s * s * (n - 1) ** 2 / n - 0.5 * lam**2 * W**2 + Z - 1
    return n * n / (mu * s) * bracket, Z * W, -(n - Z) / lam**2


def extended_jacobian(params, state=(1.0, 1.0, 0.0), tau=None):
    """Jacobian of the system extended by tau' = 0, in variables (n, Z, W, tau).

    Defaults to the reference point (U-, sqrt(T+1)).
    """
    T, mu, lam = params.T, params.mu, params.lam
    tau = sound_speed(T) if tau is None else tau
    n, Z, W = state
    B = (T - tau**2) * (n - 1) + tau**2 * (n - 1) ** 2 / n - 0.5 * lam**2 * W**2 + Z - 1
    k = n * n / (mu * tau)
    J = np.zeros((4, 4))
    J[0, 0] = 2 * n / (mu * tau) * B + k * ((T - tau**2) + tau**2 * (1 - 1 / n**2))
    J[0, 1] = k
    J[0, 2] = -k * lam**2 * W
    J[0, 3] = -B * n * n / (mu * tau**2) + k * (-2 * tau * (n - 1) + 2 * tau * (n - 1) ** 2 / n)
    J[1, 1] = W
    J[1, 2] = Z
    J[2, 0] = -1.0 / lam**2
    J[2, 1] = 1.0 / lam**2
    return J


def jacobian_eigenvalues_reference(params):
    """Closed-form spectrum (sigma1, sigma2, sigma3, sigma4) of J at (U-, sqrt(T+1))."""
    a = 1.0 / (2 * params.mu * sound_speed(params.T))
    root = math.sqrt(a * a + 1.0 / params.lam**2)
    return -a - root, 0.0, 0.0, -a + root


def linearized_rates(params, s, state=(1.0, 1.0, 0.0)):
    """Eigenvalues of the 3x3 profile system linearized at ``state`` with speed s."""
    return np.sort(np.linalg.eigvals(extended_jacobian(params, state, s)[:3, :3]).real)


def g_dot_zero(params, n_plus):
    """Leading term sqrt(T+1)(1 - n+)/(2 mu) of the slope of the reduced scalar field."""
    if not (0 < n_plus <= 1):
        raise ValueError("need 0 < n+ <= 1")
    return sound_speed(params.T) * (1.0 - n_plus) / (2.0 * params.mu)


def slow_rate(params, s):
    """Positive eigenvalue of the linearization at U- that governs the left tail."""
    rates = linearized_rates(params, s)
    return float(rates[rates > 0].min())


def _d1_matrix(N, h):
    """Sparse second-order first-derivative matrix (one-sided at the ends)."""
    rows, cols, vals = [], [], []
    for i in range(1, N - 1):
        rows += [i, i]
        cols += [i - 1, i + 1]
        vals += [-0.5 / h, 0.5 / h]
    rows += [0, 0, 0, N - 1, N - 1, N - 1]
    cols += [0, 1, 2, N - 1, N - 2, N - 3]
    vals += [-1.5 / h, 2 / h, -0.5 / h, 1.5 / h, -2 / h, 0.5 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(N, N))


def _box_matrices(N, h):
    """Forward difference and cell-average operators, (N-1) x N."""
    e = np.ones(N - 1)
    Dp = sp.diags([-e / h, e / h], [0, 1], shape=(N - 1, N))
    M = sp.diags([0.5 * e, 0.5 * e], [0, 1], shape=(N - 1, N))
    return Dp.tocsr(), M.tocsr()


class _ProfileSystem:
    """Discrete residual and Jacobian in x = [eta, phi] with eta = n - 1.

    Working with the deviation eta keeps full relative precision in the
    upstream tail, where n - 1 is far below machine epsilon.
    """

    def __init__(self, grid, params, s, n_plus):
        self.grid = grid
        self.N = N = len(grid)
        self.h = h = float(grid[1] - grid[0])
        self.params, self.s, self.n_plus = params, s, n_plus
        self.mid = N // 2
        self.D1 = _d1_matrix(N, h)
        self.Dp, self.M = _box_matrices(N, h)
        e = np.ones(N)
        lap = sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], shape=(N, N)).tolil()
        lap[0, :] = 0
        lap[N - 1, :] = 0
        self.lap = (lap / h**2).tocsr()
        self.phi_left, self.phi_right = 0.0, math.log(n_plus)

    def G(self, eta, phi, W):
        T, mu, lam, s = self.params.T, self.params.mu, self.params.lam, self.s
        n = 1.0 + eta
        B = (T - s * s) * eta + s * s * eta**2 / n - 0.5 * lam**2 * W**2 + np.expm1(phi)
        k = n * n / (mu * s)
        Gn = 2 * n / (mu * s) * B + k * ((T - s * s) + s * s * (1 - 1 / n**2))
        return k * B, Gn, k * np.exp(phi), -k * lam**2 * W

    def __call__(self, x):
        N, lam = self.N, self.params.lam
        eta, phi = x[:N], x[N:]
        W = self.D1 @ phi
        G, Gn, Gphi, GW = self.G(eta, phi, W)
        r_box = self.Dp @ eta - self.M @ G
        r_phase = np.array([eta[self.mid] - 0.5 * (self.n_plus - 1.0)])
        r_poi = -lam**2 * (self.lap @ phi) - eta + np.expm1(phi)
        r_poi[0] = phi[0] - self.phi_left
        r_poi[-1] = phi[-1] - self.phi_right
        F = np.concatenate([r_box, r_phase, r_poi])

        J_box_n = self.Dp - self.M @ sp.diags(Gn)
        J_box_phi = -self.M @ (sp.diags(Gphi) + sp.diags(GW) @ self.D1)
        phase = sp.csr_matrix(([1.0], ([0], [self.mid])), shape=(1, N))
        poi_n = sp.diags(np.r_[0.0, -np.ones(N - 2), 0.0])
        poi_phi = (-lam**2 * self.lap + sp.diags(np.r_[0.0, np.exp(phi[1:-1]), 0.0])).tolil()
        poi_phi[0, 0] = 1.0
        poi_phi[N - 1, N - 1] = 1.0
        J = sp.bmat(
            [
                [J_box_n, J_box_phi],
                [phase, None],
                [poi_n, poi_phi.tocsr()],
            ],
            format="csr",
        )
        return F, J


def tanh_guess(grid, n_plus, rate):
    """Deviation eta = n - 1 and phi = log n of a tanh front with decay rate ``rate``."""
    eta = 0.5 * (n_plus - 1.0) * (1.0 + np.tanh(0.5 * rate * grid))
    return eta, np.log1p(eta)


def _newton_profile(system, eta0, phi0, options):
    N = system.N
    x, iters, hist = newton(
        system,
        np.concatenate([eta0, phi0]),
        tol=options.tol,
        max_iter=options.max_iter,
        admissible=lambda y: np.all(y[:N] > -1),
    )
    return x[:N], x[N:], iters, hist


def solve_profile(params, epsilon, grid_spec=GridSpec(), options=SolverOptions(), eps_fraction=0.5):
    """Shock profile for amplitude ``epsilon``.

    Newton starts from a tanh profile whose rate matches the linearized slow
    rate at U-. If it fails, the amplitude is reduced by halving and the
    solution is continued back up to ``epsilon`` on the same grid.
    """
    s, right, _ = parametrize_downstream(params.T, epsilon, eps_fraction)
    rate0 = g_dot_zero(params, right.n)
    grid = grid_spec.build(rate0)
    try:
        sol = _solve_on_grid(params, epsilon, grid, None, options, eps_fraction)
    except NewtonDiverged:
        sol = _continuation(params, epsilon, grid, options, eps_fraction)
    _check_endpoints(sol, options.boundary_tol)
    return sol


def _solve_on_grid(params, epsilon, grid, start, options, eps_fraction):
    s, right, _ = parametrize_downstream(params.T, epsilon, eps_fraction)
    system = _ProfileSystem(grid, params, s, right.n)
    if start is None:
        eta0, phi0 = tanh_guess(grid, right.n, slow_rate(params, s))
    else:
        # rescale the previous profile to the new amplitude
        eta_old, n_plus_old = start
        eta0 = eta_old * (right.n - 1.0) / (n_plus_old - 1.0)
        phi0 = np.log1p(eta0)
    eta, phi, iters, hist = _newton_profile(system, eta0, phi0, options)
    F, _ = system(np.concatenate([eta, phi]))
    n = 1.0 + eta
    return ProfileSolution(
        grid=grid,
        n=n,
        u=s * eta / n,
        phi=phi,
        s=s,
        left=UPSTREAM,
        right=right,
        params=params,
        residual_norm=float(np.max(np.abs(F))),
        epsilon=epsilon,
        iterations=iters,
        history=hist,
        eta=eta,
    )


def _continuation(params, epsilon, grid, options, eps_fraction):
    eps_list = [epsilon * 0.5**k for k in range(1, options.max_halvings + 1)]
    for j, e0 in enumerate(eps_list):
        try:
            sol = _solve_on_grid(params, e0, grid, None, options, eps_fraction)
        except NewtonDiverged:
            continue
        for e in reversed(eps_list[:j]):
            sol = _step_to(params, sol, e, grid, options, eps_fraction)
        return _step_to(params, sol, epsilon, grid, options, eps_fraction)
    raise AmplitudeTooLarge(f"no converged start found below epsilon={epsilon}")


def _step_to(params, sol, epsilon, grid, options, eps_fraction):
    try:
        return _solve_on_grid(
            params, epsilon, grid, (sol.eta, sol.right.n), options, eps_fraction
        )
    except NewtonDiverged as exc:
        raise AmplitudeTooLarge(f"continuation failed at epsilon={epsilon}: {exc}") from exc


def _check_endpoints(sol, tol):
    amp = abs(sol.left.n - sol.right.n)
    err_l = abs(sol.n[0] - sol.left.n) / amp
    err_r = abs(sol.n[-1] - sol.right.n) / amp
    if max(err_l, err_r) > tol:
        raise DomainTooShort(
            f"endpoint mismatch left={err_l:.2e}, right={err_r:.2e} (relative); increase L"
        )


def first_integral_residual(sol):
    """Max interior residual of the integrated momentum balance.

    mu s n^-2 n' - [(T+1-s^2)(n-1) + s^2 (n-1)^2/n - lam^2 phi'^2/2 + lam^2 phi'']
    with centered second-order differences.
    """
    T, mu, lam = sol.params.T, sol.params.mu, sol.params.lam
    s, n, phi, h = sol.s, sol.n, sol.phi, sol.h
    dn = _fd.d1(n, h)
    dphi = _fd.d1(phi, h)
    ddphi = _fd.d2(phi, h)
    r = mu * s * dn / n**2 - (
        (T + 1 - s * s) * (n - 1) + s * s * (n - 1) ** 2 / n - 0.5 * lam**2 * dphi**2 + lam**2 * ddphi
    )
    return float(np.max(np.abs(r[1:-1])))


def decay_rate_estimate(sol, side, lo=1e-9, hi=1e-3, min_nodes=20):
    """Exponential rate of approach of n to its far-field value on one side."""
    far = sol.left.n if side == "left" else sol.right.n
    return _fd.fit_tail_rate(sol.grid, sol.n, far, side, lo, hi, min_nodes)


MONOTONE_FLOOR = 1e-12


def roundoff_floor(values):
    return MONOTONE_FLOOR * max(1.0, float(np.max(np.abs(values))))


def strictly_decreasing(values):
    """True when every node-to-node difference is negative.

    Differences smaller than a floor of 1e-12 (relative) are ignored: in the far
    tails the field equals its limit to solver precision and differences vanish.
    """
    d = np.diff(values)
    floor = roundoff_floor(values)
    return bool(np.all(d[np.abs(d) > floor] < 0))


def monotonicity_constants(sol):
    """Empirical (C_low, C_high) with C_low n' <= phi' <= C_high n' on the interior."""
    dn = _fd.d1(sol.n, sol.h)[1:-1]
    dphi = _fd.d1(sol.phi, sol.h)[1:-1]
    mask = np.abs(dn) > 1e-6 * np.max(np.abs(dn))
    ratio = dphi[mask] / dn[mask]
    return float(ratio.min()), float(ratio.max())


def solve_quasineutral_profile(T, mu, epsilon, grid, tol=1e-12, eps_fraction=0.5):
    """Profile of the zero-Debye-length limit, where phi = log n.

    Solves mu s n' = n^2 [(T+1-s^2)(n-1) + s^2 (n-1)^2/n] for eta = n - 1 with the
    box scheme and the midpoint phase condition.
    """
    s, right, _ = parametrize_downstream(T, epsilon, eps_fraction)
    N = len(grid)
    h = float(grid[1] - grid[0])
    Dp, M = _box_matrices(N, h)
    mid = N // 2
    a = T + 1 - s * s
    phase = sp.csr_matrix(([1.0], ([0], [mid])), shape=(1, N))

    def fun(eta):
        n = 1.0 + eta
        B = a * eta + s * s * eta**2 / n
        G = n * n * B / (mu * s)
        Gn = (2 * n * B + n * n * (a + s * s * (1 - 1 / n**2))) / (mu * s)
        F = np.concatenate([Dp @ eta - M @ G, [eta[mid] - 0.5 * (right.n - 1)]])
        J = sp.vstack([Dp - M @ sp.diags(Gn), phase])
        return F, J.tocsr()

    params = PlasmaParams(T, mu, 1.0)
    eta0, _ = tanh_guess(grid, right.n, 2 * g_dot_zero(params, right.n))
    eta, iters, hist = newton(fun, eta0, tol=tol, admissible=lambda y: np.all(y > -1))
    n = 1.0 + eta
    return ProfileSolution(
        grid=grid,
        n=n,
        u=s * eta / n,
        phi=np.log1p(eta),
        s=s,
        left=UPSTREAM,
        right=right,
        params=params,
        residual_norm=float(np.max(np.abs(fun(eta)[0]))),
        epsilon=epsilon,
        iterations=iters,
        history=hist,
        eta=eta,
    )
