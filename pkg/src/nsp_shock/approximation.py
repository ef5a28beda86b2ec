"""KdV-Burgers approximation of the scaled shock profile and its remainder.

In the scaled variable z = xi/mu_bar with mu = eps mu_bar and
lambda = sqrt(eps) lambda_bar, the exact profile is expanded as

    n_eps = 1 + eps N + eps^2 n_R,   phi_eps = eps P + eps^2 phi_R,

where (N, U, P) are the amplitude-corrected KdV-Burgers profiles. The remainder
(n_R, phi_R) satisfies

    n_R'           = A n_R + (delta/c) phi_R'' + r1 + r2 + r3,
    -eps delta phi_R'' = n_R - phi_R + r4 + r5 + r6,

with c = sqrt(T+1) and A = 2(1 + c n1). Both equations hold as exact algebraic
identities for the sources defined in :func:`compute_r_terms`.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import _fd
from .errors import NotContracting, SingularSystem
from .kdv_burgers import KdvbGrid, solve_kdvb
from .profile_ode import GridSpec, solve_profile, solve_quasineutral_profile
from .rankine_hugoniot import ScalingParams, sound_speed

FD_ORDER = 4


@dataclass(frozen=True)
class ZGrid:
    """Uniform grid on [-L, L] in the scaled variable z."""

    L: float = 60.0
    nodes: int = 8001

    def build(self):
        return np.linspace(-self.L, self.L, self.nodes)

    def coarsened(self):
        return ZGrid(self.L, (self.nodes - 1) // 2 + 1)


@dataclass(frozen=True)
class WeightedNormSpec:
    alpha: float = 1.0
    k: int = 2

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.k < 0:
            raise ValueError("k must be >= 0")


@dataclass
class ScaledProfile:
    grid: np.ndarray
    n_eps: np.ndarray
    u_eps: np.ndarray
    phi_eps: np.ndarray
    s_eps: float
    epsilon: float
    delta: float
    T: float
    eta: np.ndarray  # n_eps - 1 at full relative precision

    @property
    def h(self):
        return float(self.grid[1] - self.grid[0])


@dataclass
class FirstOrder:
    """Classic n1 and the amplitude-corrected triple (N, U, P) on a common grid."""

    grid: np.ndarray
    n1: np.ndarray
    N: np.ndarray
    U: np.ndarray
    P: np.ndarray
    epsilon: float
    delta: float
    T: float


@dataclass
class RemainderFields:
    grid: np.ndarray
    n_R: np.ndarray
    u_R: np.ndarray
    phi_R: np.ndarray
    epsilon: float
    delta: float
    shift: float = 0.0
    history: list = field(default_factory=list)

    @property
    def h(self):
        return float(self.grid[1] - self.grid[0])


def build_scaled_profile(scaling, T, zgrid=ZGrid()):
    """Exact profile in z for the scaled parameters (delta = 0 gives the quasi-neutral limit)."""
    eps = scaling.epsilon
    z = zgrid.build()
    if scaling.lambda_bar == 0:
        sol = solve_quasineutral_profile(T, eps * scaling.mu_bar, eps, scaling.mu_bar * z, eps_fraction=1.0)
        delta = 0.0
    else:
        params = scaling.physical(T)
        sol = solve_profile(params, eps, GridSpec(L=scaling.mu_bar * zgrid.L, nodes=zgrid.nodes), eps_fraction=1.0)
        delta = scaling.delta
    return ScaledProfile(z, sol.n, sol.u, sol.phi, sol.s, eps, delta, T, sol.eta)


def quasineutral_scaling(epsilon):
    """Scaling with lambda_bar = 0, i.e. delta = 0."""
    return _QuasiNeutral(epsilon)


@dataclass(frozen=True)
class _QuasiNeutral:
    epsilon: float
    mu_bar: float = 1.0
    lambda_bar: float = 0.0
    delta: float = 0.0


def build_first_order(T, delta, epsilon, zgrid=ZGrid()):
    """Solve n1 (classic) and the modified N, U, P on the z-grid."""
    g = KdvbGrid(zgrid.L, zgrid.nodes)
    n1 = solve_kdvb(T, delta, "n1", None, g)
    N = solve_kdvb(T, delta, "n1", epsilon, g)
    U = solve_kdvb(T, delta, "u1", epsilon, g)
    P = solve_kdvb(T, delta, "phi1", epsilon, g)
    return FirstOrder(n1.grid, n1.field, N.field, U.field, P.field, epsilon, delta, T)


def _align_shift(grid, eta, N, eps, window=1.0):
    """Shift sigma of N minimizing |n_R(0)|, found as a root of eta(0) - eps N(-sigma)."""
    mid = len(grid) // 2
    target = eta[mid] / eps
    spline = CubicSpline(grid, N)
    g = lambda sig: float(spline(-sig)) - target
    if abs(g(0.0)) < 1e-15 * max(1.0, abs(target)):
        return 0.0, spline
    a, b = -window, window
    if g(a) * g(b) > 0:
        return 0.0, spline
    return brentq(g, a, b, xtol=1e-14), spline


def compute_remainder_direct(exact, first, align=True):
    """n_R, u_R, phi_R by subtracting the first-order expansion from the exact profile."""
    if exact.grid.shape != first.grid.shape or not np.allclose(exact.grid, first.grid):
        raise ValueError("exact and first-order profiles must share the z-grid")
    eps = exact.epsilon
    N, U, P = first.N, first.U, first.P
    shift = 0.0
    if align:
        shift, _ = _align_shift(exact.grid, exact.eta, N, eps)
        if shift != 0.0:
            z = exact.grid
            N = CubicSpline(z, N)(z - shift)
            U = CubicSpline(z, U)(z - shift)
            P = CubicSpline(z, P)(z - shift)
    n_R = (exact.eta - eps * N) / eps**2
    n_R[len(n_R) // 2] = 0.0
    u_R = (exact.u_eps - eps * U) / eps**2
    phi_R = (exact.phi_eps - eps * P) / eps**2
    return RemainderFields(exact.grid, n_R, u_R, phi_R, eps, first.delta, shift)


def compute_u_remainder(n_R, exact, first):
    """u_R from n_R through the mass first integral u = s (n - 1)/n."""
    eps, s = exact.epsilon, exact.s_eps
    n, N, U = exact.n_eps, first.N, first.U
    return ((s - eps * U) * n_R + (s * N - U - eps * N * U) / eps) / n


def _derivs(f, h, k):
    out = [np.asarray(f, dtype=float)]
    for j in range(1, k + 1):
        out.append(_fd.derivative(f, h, j, FD_ORDER))
    return out


def compute_r_terms(first, n_R, phi_R):
    """Sources r1..r6 of the remainder system, as a dict of arrays.

    r1 includes the residual K of the discrete modified n-profile in its own
    equation (zero for an exact solution), r3 carries the cubic coefficient
    sqrt(T+1) eps^3, and r4 includes the term delta P'' that arises when the
    Poisson equation is expanded.
    """
    eps, delta, T = first.epsilon, first.delta, first.T
    c = sound_speed(T)
    h = float(first.grid[1] - first.grid[0])
    N, N1, N2 = _derivs(first.N, h, 2)
    P, P1, P2 = _derivs(first.P, h, 2)
    n1 = first.n1
    nR, nR1 = _derivs(n_R, h, 1)
    pR, pR1, pR2 = _derivs(phi_R, h, 2)
    s = c - eps
    m = 1 + eps * N

    K = (2 * c - eps) * N + (T + 1) * N**2 - c * N1 + delta * N2
    r1 = (
        (1 / c + N) * N1
        + delta * m / (eps * c) * (m * P2 - N2)
        - delta * m**2 / (2 * c) * P1**2
        + m * K / (eps * c)
    )
    r2 = (
        eps * nR / c * (
            2 * (T + 1) / eps * (N - n1) - 1 + 2 * (2 * c - eps) * N + 3 * (T + 1) * N**2
            + 2 * delta * m * P2 - eps * delta * m * P1**2
        )
        + eps * delta * (2 * N + eps * N**2) / c * pR2
        + eps * nR1 / c
        - eps * delta * P1 * m**2 / c * pR1
    )
    r3 = (
        eps * ((T + 1) * (2 + 3 * eps * N) - s**2 + eps**2 * delta * P2 - 0.5 * delta * eps**3 * P1**2) * nR**2 / c
        + c * eps**3 * nR**3
        + 2 * eps**2 * delta * m * nR * pR2 / c
        + eps**4 * delta * nR**2 * pR2 / c
        - eps**3 * delta * P1 * pR1 * (2 * nR * m + eps**2 * nR**2) / c
        - eps**2 * delta * pR1**2 * (m + eps**2 * nR) ** 2 / (2 * c)
    )
    eP = np.exp(eps * P)
    r4 = (eps * N - np.expm1(eps * P)) / eps**2 + delta * P2
    r5 = -np.expm1(eps * P) * pR
    r6 = -eP * (np.expm1(eps**2 * pR) - eps**2 * pR) / eps**2
    return {"r1": r1, "r2": r2, "r3": r3, "r4": r4, "r5": r5, "r6": r6}


def a_coefficient(n1, T):
    return 2.0 * (1.0 + sound_speed(T) * n1)


def remainder_equation_residual(remainder, r, first):
    """Max interior residuals of the two remainder equations (finite differences)."""
    h, eps, delta = remainder.h, remainder.epsilon, remainder.delta
    c = sound_speed(first.T)
    nR1 = _fd.d1(remainder.n_R, h, FD_ORDER)
    pR2 = _fd.d2(remainder.phi_R, h, FD_ORDER)
    A = a_coefficient(first.n1, first.T)
    e1 = nR1 - A * remainder.n_R - delta / c * pR2 - (r["r1"] + r["r2"] + r["r3"])
    e2 = -eps * delta * pR2 - (remainder.n_R - remainder.phi_R + r["r4"] + r["r5"] + r["r6"])
    return float(np.max(np.abs(e1[2:-2]))), float(np.max(np.abs(e2[2:-2])))


class LinearRemainderSolver:
    """Discrete solver for n' = A n + (delta/c) phi'' + h1, -eps delta phi'' = n - phi + h2.

    The n-equation uses the trapezoidal box scheme with nodal second differences
    of phi; n(0) = 0 fixes the homogeneous mode and phi vanishes at both ends.
    The matrix is factorized once and reused across right-hand sides.
    """

    def __init__(self, grid, n1, T, epsilon, delta):
        self.grid = grid
        N = self.N = len(grid)
        h = self.h = float(grid[1] - grid[0])
        self.mid = N // 2
        c = sound_speed(T)
        A = a_coefficient(n1, T)
        e = np.ones(N - 1)
        Dp = sp.diags([-e / h, e / h], [0, 1], shape=(N - 1, N))
        M = sp.diags([0.5 * e, 0.5 * e], [0, 1], shape=(N - 1, N))
        self.M = M.tocsr()
        D2 = sp.diags([np.ones(N - 1), -2 * np.ones(N), np.ones(N - 1)], [-1, 0, 1], shape=(N, N)).tolil()
        D2[0, :4] = [2, -5, 4, -1]
        D2[N - 1, N - 4:] = [-1, 4, -5, 2]
        D2 = (D2 / h**2).tocsr()
        box_n = Dp - M @ sp.diags(A)
        box_phi = -(delta / c) * (M @ D2)
        phase = sp.csr_matrix(([1.0], ([0], [self.mid])), shape=(1, N))
        lap = D2.tolil()
        lap[0, :] = 0
        lap[N - 1, :] = 0
        poi_phi = (-epsilon * delta * lap.tocsr() + sp.diags(np.r_[0.0, np.ones(N - 2), 0.0])).tolil()
        poi_phi[0, 0] = 1.0
        poi_phi[N - 1, N - 1] = 1.0
        poi_n = sp.diags(np.r_[0.0, -np.ones(N - 2), 0.0])
        K = sp.bmat([[box_n, box_phi], [phase, None], [poi_n, poi_phi.tocsr()]], format="csc")
        try:
            self._lu = spla.splu(K)
        except RuntimeError as exc:
            raise SingularSystem(f"linear remainder system is singular: {exc}") from exc
        diag = np.abs(self._lu.U.diagonal())
        self.condition_hint = float(diag.max() / max(diag.min(), 1e-300))
        if not np.isfinite(self.condition_hint) or self.condition_hint > 1e14:
            raise SingularSystem("linear remainder system is numerically singular", self.condition_hint)

    def solve(self, h1, h2):
        rhs = np.concatenate([self.M @ h1, [0.0], np.r_[0.0, np.asarray(h2)[1:-1], 0.0]])
        x = self._lu.solve(rhs)
        return x[: self.N], x[self.N :]


def solve_linear_remainder(n1, h1, h2, T, epsilon, delta, grid):
    return LinearRemainderSolver(grid, n1, T, epsilon, delta).solve(h1, h2)


def weighted_norm(fields, grid, spec=WeightedNormSpec(), window=None):
    """Discrete H^k_alpha norm of one or several fields, w = exp(alpha sqrt(1+z^2)).

    Derivatives by fourth-order differences; trapezoidal quadrature on |z| <= window.
    """
    if isinstance(fields, np.ndarray) and fields.ndim == 1:
        fields = [fields]
    h = float(grid[1] - grid[0])
    mask = np.ones_like(grid, dtype=bool) if window is None else np.abs(grid) <= window + 1e-12
    w2 = np.exp(2 * spec.alpha * np.sqrt(1 + grid[mask] ** 2))
    total = 0.0
    for f in fields:
        for j in range(spec.k + 1):
            d = _fd.derivative(f, h, j, FD_ORDER) if j else np.asarray(f, dtype=float)
            total += _fd.trapezoid(w2 * d[mask] ** 2, h)
    return float(np.sqrt(total))


def x_norm(n, phi, grid, epsilon, delta, spec=WeightedNormSpec(), window=None):
    """||[n, phi]||_{H^k_alpha} + sqrt(eps delta)||phi^(k+1)||_alpha + eps delta ||phi^(k+2)||_alpha."""
    h = float(grid[1] - grid[0])
    base = weighted_norm([n, phi], grid, spec, window)
    s0 = WeightedNormSpec(spec.alpha, 0)
    d1 = _fd.derivative(phi, h, spec.k + 1, FD_ORDER)
    d2 = _fd.derivative(phi, h, spec.k + 2, FD_ORDER)
    return (
        base
        + math.sqrt(epsilon * delta) * weighted_norm(d1, grid, s0, window)
        + epsilon * delta * weighted_norm(d2, grid, s0, window)
    )


def tail_bound(f, grid, alpha, rate, window):
    """Analytic bound of the weighted L2 tail beyond |z| = window for |f| ~ C exp(-rate |z|)."""
    if rate <= alpha:
        return float("inf")
    out = 0.0
    for side in (-1, 1):
        i = int(np.argmin(np.abs(grid - side * window)))
        amp = abs(f[i]) * math.exp(alpha * math.sqrt(1 + window**2))
        out += amp**2 / (2 * (rate - alpha))
    return math.sqrt(out)


@dataclass(frozen=True)
class FixedPointOptions:
    max_iter: int = 50
    tol: float = 1e-10
    rel_tol: float = 1e-10
    spec: WeightedNormSpec = WeightedNormSpec()
    window: float = 20.0


def solve_remainder_fixed_point(first, options=FixedPointOptions()):
    """Iterate U_{i+1} = L^{-1}(r1 + r2[U_i] + r3[U_i], r4 + r5[U_i] + r6[U_i]) from U_0 = 0.

    Increments are measured in the discrete X_{alpha,k} norm restricted to
    |z| <= window. The iteration stops once an increment falls below
    max(tol, rel_tol * ||U||), which sits above the round-off floor of the
    eps^-2 scaled sources.
    """
    eps, delta, grid = first.epsilon, first.delta, first.grid
    solver = LinearRemainderSolver(grid, first.n1, first.T, eps, delta)
    n = np.zeros_like(grid)
    phi = np.zeros_like(grid)
    increments, ratios = [], []
    bad = 0
    for _ in range(options.max_iter):
        r = compute_r_terms(first, n, phi)
        n_new, phi_new = solver.solve(r["r1"] + r["r2"] + r["r3"], r["r4"] + r["r5"] + r["r6"])
        inc = x_norm(n_new - n, phi_new - phi, grid, eps, delta, options.spec, options.window)
        size = x_norm(n_new, phi_new, grid, eps, delta, options.spec, options.window)
        if increments:
            ratios.append(inc / increments[-1] if increments[-1] > 0 else 0.0)
            bad = bad + 1 if ratios[-1] >= 1 else 0
            if bad >= 3:
                raise NotContracting("increment ratio >= 1 over 3 consecutive iterations", ratios)
        increments.append(inc)
        n, phi = n_new, phi_new
        if inc < max(options.tol, options.rel_tol * size):
            break
    else:
        if bad:
            raise NotContracting(f"no convergence in {options.max_iter} iterations", ratios)
    u = _u_from_n(n, first)
    return RemainderFields(grid, n, u, phi, eps, delta, 0.0, {"increments": increments, "ratios": ratios})


def _u_from_n(n_R, first):
    """u_R from n_R with the exact profile reconstructed from the expansion itself."""
    eps, T = first.epsilon, first.T
    s = sound_speed(T) - eps
    n = 1 + eps * first.N + eps**2 * n_R
    N, U = first.N, first.U
    return ((s - eps * U) * n_R + (s * N - U - eps * N * U) / eps) / n


def approximation_study(T, delta, eps_list, zgrid=ZGrid()):
    """First-order errors and remainder sizes over a list of amplitudes.

    Returns a dict with per-eps sup errors of n, u, phi against the KdV-Burgers
    expansion, sup norms of the remainders, and observed orders between
    consecutive amplitudes (log of the error ratio over log of the eps ratio).
    """
    eps_list = sorted(eps_list, reverse=True)
    rows = []
    for eps in eps_list:
        scaling = quasineutral_scaling(eps) if delta == 0 else ScalingParams.from_delta(eps, delta)
        exact = build_scaled_profile(scaling, T, zgrid)
        first = build_first_order(T, delta, eps, zgrid)
        rem = compute_remainder_direct(exact, first)
        rows.append(
            {
                "epsilon": eps,
                "err_n": eps**2 * float(np.max(np.abs(rem.n_R))),
                "err_u": eps**2 * float(np.max(np.abs(rem.u_R))),
                "err_phi": eps**2 * float(np.max(np.abs(rem.phi_R))),
                "sup_n_R": float(np.max(np.abs(rem.n_R))),
                "sup_u_R": float(np.max(np.abs(rem.u_R))),
                "sup_phi_R": float(np.max(np.abs(rem.phi_R))),
                "shift": rem.shift,
            }
        )
    orders = {}
    for key in ("err_n", "err_u", "err_phi"):
        orders[key] = [
            math.log(a[key] / b[key]) / math.log(a["epsilon"] / b["epsilon"]) for a, b in zip(rows, rows[1:])
        ]
    return {"T": T, "delta": delta, "nodes": zgrid.nodes, "L": zgrid.L, "rows": rows, "orders": orders}
