"""First-order KdV-Burgers profiles and their amplitude-corrected variants.

Each field f in {n1, u1, phi1} solves a once-integrated traveling-wave equation

    c0 f + kappa f^2 - beta f' + gamma f'' = 0,   f(-inf) = 0,  f(+inf) = -c0/kappa,

where (kappa, beta, gamma) depend on the field and c0 on the variant. The
classic variant has c0 = 2 sqrt(T+1) (n1, phi1) or 2 (u1); the modified
variant shifts c0 so that the right far field equals the exact downstream
state divided by eps.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse as sp

from . import _fd
from ._newton import newton
from .errors import ComplexRates, FarFieldMismatch
from .rankine_hugoniot import parametrize_downstream, sound_speed

KINDS = ("n1", "u1", "phi1")


@dataclass(frozen=True)
class KdvbGrid:
    """Uniform z-grid; ``L=None`` means 8 for delta = 0 and 30 otherwise.

    Without dispersion the box scheme is exact up to truncation of the
    tails, so a short domain keeps the grid fine.
    """

    L: float | None = None
    nodes: int = 4001

    def build(self, delta=1.0):
        L = self.L if self.L is not None else (8.0 if delta == 0 else 30.0)
        nodes = self.nodes if self.nodes % 2 == 1 else self.nodes + 1
        return np.linspace(-L, L, nodes)


@dataclass(frozen=True)
class KdvbCoefficients:
    c0: float
    kappa: float
    beta: float
    gamma: float

    @property
    def far_right(self):
        return -self.c0 / self.kappa


def coefficients(T, delta, kind, epsilon=None):
    """Coefficients of the integrated equation; ``epsilon=None`` is the classic variant."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    c = sound_speed(T)
    if epsilon is not None:
        _, _, a_eps = parametrize_downstream(T, epsilon, eps_fraction=1.0)
    if kind == "n1":
        c0 = 2 * c if epsilon is None else 2 * c - epsilon
        return KdvbCoefficients(c0, T + 1.0, c, delta)
    if kind == "u1":
        c0 = 2.0 if epsilon is None else 2.0 + epsilon / (c - epsilon)
        return KdvbCoefficients(c0, 1.0, 1.0, delta / c)
    c0 = 2 * c if epsilon is None else 2 * c - a_eps * (T + 1.0)
    return KdvbCoefficients(c0, T + 1.0, c, delta)


@dataclass
class KdvbProfile:
    grid: np.ndarray
    field: np.ndarray
    delta: float
    T: float
    far_left: float
    far_right: float
    kind: str
    epsilon: float | None
    coeffs: KdvbCoefficients
    residual_norm: float = 0.0

    @property
    def h(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def variant(self):
        return "classic" if self.epsilon is None else "modified"


def logistic_profile(coeffs, z):
    """Exact dispersionless profile f+/(1 + exp(-(c0/beta) z))."""
    z = np.asarray(z, dtype=float)
    return coeffs.far_right * 0.5 * (1.0 + np.tanh(0.5 * coeffs.c0 / coeffs.beta * z))


def kdvb_logistic_limit(T, z):
    """Classic n1 at delta = 0: n1+ / (1 + e^{-2z}) with n1+ = -2/sqrt(T+1)."""
    return logistic_profile(coefficients(T, 0.0, "n1"), z)


def integrated_residual(profile):
    """Pointwise residual of c0 f + kappa f^2 - beta f' + gamma f'' (interior nodes)."""
    k, f, h = profile.coeffs, profile.field, profile.h
    r = k.c0 * f + k.kappa * f**2 - k.beta * _fd.d1(f, h) + k.gamma * _fd.d2(f, h)
    return r[1:-1]


def _system_dispersive(coeffs, N, h, mid):
    e = np.ones(N)
    D1 = sp.diags([-0.5 * e[:-1] / h, 0.5 * e[:-1] / h], [-1, 1], shape=(N, N))
    D2 = sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], shape=(N, N)) / h**2
    L = (-coeffs.beta * D1 + coeffs.gamma * D2).tocsr()[1:-1]
    fr = coeffs.far_right
    row_mid = sp.csr_matrix(([1.0], ([0], [mid])), shape=(1, N))
    row_end = sp.csr_matrix(([1.0], ([0], [N - 1])), shape=(1, N))

    def fun(f):
        F = np.concatenate(
            [L @ f + (coeffs.c0 * f + coeffs.kappa * f**2)[1:-1], [f[mid] - 0.5 * fr], [f[-1] - fr]]
        )
        J = sp.vstack([L + sp.diags(coeffs.c0 + 2 * coeffs.kappa * f).tocsr()[1:-1], row_mid, row_end])
        return F, J.tocsr()

    return fun


def _system_box(coeffs, N, h, mid):
    e = np.ones(N - 1)
    Dp = sp.diags([-e / h, e / h], [0, 1], shape=(N - 1, N))
    M = sp.diags([0.5 * e, 0.5 * e], [0, 1], shape=(N - 1, N))
    fr = coeffs.far_right
    row_mid = sp.csr_matrix(([1.0], ([0], [mid])), shape=(1, N))

    def fun(f):
        R = (coeffs.c0 * f + coeffs.kappa * f**2) / coeffs.beta
        dR = (coeffs.c0 + 2 * coeffs.kappa * f) / coeffs.beta
        F = np.concatenate([Dp @ f - M @ R, [f[mid] - 0.5 * fr]])
        J = sp.vstack([Dp - M @ sp.diags(dR), row_mid])
        return F, J.tocsr()

    return fun


PECLET_MAX = 1.0
# differences below this (relative) level are solver noise, not oscillation
MONOTONE_FLOOR = 1e-12
# cap on the refined grid; smaller delta should use the delta = 0 solver
MAX_FINE_NODES = 2_000_001


def solve_kdvb(T, delta, kind="n1", epsilon=None, grid_spec=KdvbGrid(), tol=1e-12, far_tol=1e-6):
    """Solve the integrated KdV-Burgers profile with the midpoint phase condition.

    delta > 0: centered differences, Dirichlet data at the right end, free left end.
    When the cell Peclet number beta h/(2 gamma) exceeds PECLET_MAX the solve runs
    on an integer refinement of the grid and is sampled back, since the centered
    scheme is not monotone there.
    delta = 0: trapezoidal box scheme for the first-order equation.
    """
    coeffs = coefficients(T, delta, kind, epsilon)
    grid = grid_spec.build(delta)
    h = float(grid[1] - grid[0])
    if delta > 0 and coeffs.beta * h / (2 * coeffs.gamma) > PECLET_MAX:
        factor = math.ceil(coeffs.beta * h / (2 * coeffs.gamma * PECLET_MAX))
        if (len(grid) - 1) * factor + 1 > MAX_FINE_NODES:
            raise ValueError(f"delta = {delta:.3g} needs more than {MAX_FINE_NODES} nodes; use delta = 0")
        fine = np.linspace(grid[0], grid[-1], (len(grid) - 1) * factor + 1)
        f_fine, res = _solve_on(coeffs, fine, delta, tol)
        f = f_fine[::factor].copy()
    else:
        f, res = _solve_on(coeffs, grid, delta, tol)
    profile = KdvbProfile(grid, f, delta, T, 0.0, coeffs.far_right, kind, epsilon, coeffs, residual_norm=res)
    scale = abs(coeffs.far_right)
    drift = max(abs(f[0]), abs(f[-1] - coeffs.far_right)) / scale
    if drift > far_tol:
        raise FarFieldMismatch(f"endpoint drift {drift:.2e} relative to far field; increase L")
    return profile


def _solve_on(coeffs, grid, delta, tol):
    N, h, mid = len(grid), float(grid[1] - grid[0]), len(grid) // 2
    fun = _system_box(coeffs, N, h, mid) if delta == 0 else _system_dispersive(coeffs, N, h, mid)
    f0 = logistic_profile(coeffs, grid)
    f, _, hist = newton(fun, f0, tol=tol, max_iter=40, ftol=1e-12)
    return f, hist[-1]


def kdvb_phase_eigenvalues(T, delta):
    """(lam-1, lam-2, lam+1, lam+2) of the classic n1 equation at its two rest states."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    c = sound_speed(T)
    disc_minus = T + 1 - 8 * c * delta
    if disc_minus < 0:
        raise ComplexRates(f"T+1-8 sqrt(T+1) delta = {disc_minus:.3g} < 0: oscillatory left tail")
    rm, rp = math.sqrt(disc_minus), math.sqrt(T + 1 + 8 * c * delta)
    return (c - rm) / (2 * delta), (c + rm) / (2 * delta), (c - rp) / (2 * delta), (c + rp) / (2 * delta)


def critical_delta(T):
    """Root of the left-state discriminant, where the left rates turn complex."""
    return sound_speed(T) / 8.0


def kdvb_jacobian(coeffs, f_rest):
    """Jacobian of (f, f')' = (f', (beta f' - c0 f - kappa f^2)/gamma) at a rest state."""
    k = coeffs
    return np.array([[0.0, 1.0], [-(k.c0 + 2 * k.kappa * f_rest) / k.gamma, k.beta / k.gamma]])


def first_order_fields(n1):
    """u1 = sqrt(T+1) n1 and phi1 = n1 from a classic n1 profile."""
    if n1.kind != "n1" or n1.epsilon is not None:
        raise ValueError("first_order_fields needs a classic n1 profile")
    c = sound_speed(n1.T)
    u1 = KdvbProfile(
        n1.grid, c * n1.field, n1.delta, n1.T, 0.0, c * n1.far_right, "u1", None,
        coefficients(n1.T, n1.delta, "u1"), n1.residual_norm,
    )
    phi1 = KdvbProfile(
        n1.grid, n1.field.copy(), n1.delta, n1.T, 0.0, n1.far_right, "phi1", None,
        coefficients(n1.T, n1.delta, "phi1"), n1.residual_norm,
    )
    return u1, phi1


def second_order_correction(classic, modified, epsilon):
    """Scaled differences (modified - classic)/eps for matching triples of profiles."""
    out = []
    for a, b in zip(classic, modified):
        if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
            raise ValueError("grid mismatch")
        if a.kind != b.kind or a.delta != b.delta or a.T != b.T:
            raise ValueError("profiles differ in kind, delta or T")
        out.append((b.field - a.field) / epsilon)
    return tuple(out)


def monotonicity_report(profile):
    """Strict monotone decrease test plus the largest overshoot beyond the far fields."""
    f = profile.field
    d = np.diff(f)[1:-1]
    floor = MONOTONE_FLOOR * max(1.0, float(np.max(np.abs(f))))
    monotone = bool(np.all(d[np.abs(d) > floor] < 0))
    hi = max(profile.far_left, profile.far_right)
    lo = min(profile.far_left, profile.far_right)
    overshoot = max(0.0, float(f.max()) - hi, lo - float(f.min()))
    return {"monotone": monotone, "overshoot": overshoot}


def tail_rates(profile, lo=1e-9, hi=1e-3, min_nodes=20):
    """Fitted (left, right) exponential decay rates toward the far fields."""
    g, f = profile.grid, profile.field
    return (
        _fd.fit_tail_rate(g, f, profile.far_left, "left", lo, hi, min_nodes),
        _fd.fit_tail_rate(g, f, profile.far_right, "right", lo, hi, min_nodes),
    )


def tail_weighted_norms(profile, alpha=1.0):
    """L2 norms of w_alpha (f - f_far) on each half-line, w_alpha = exp(alpha sqrt(1+z^2))."""
    g, f, h = profile.grid, profile.field, profile.h
    w = np.exp(alpha * np.sqrt(1 + g**2))
    mid = len(g) // 2
    left = np.sqrt(_fd.trapezoid((w[: mid + 1] * (f[: mid + 1] - profile.far_left)) ** 2, h))
    right = np.sqrt(_fd.trapezoid((w[mid:] * (f[mid:] - profile.far_right)) ** 2, h))
    return float(left), float(right)
