"""Far-field algebra for the ion-acoustic 2-shock.

Equilibria are quasi-neutral (phi = log n). The downstream state is generated
from the amplitude parameter eps through s = sqrt(T+1) - eps.
"""

from dataclasses import dataclass
import math

DEFAULT_EPS_FRACTION = 0.5


@dataclass(frozen=True)
class PlasmaParams:
    """Temperature T, viscosity mu and Debye length lam."""

    T: float
    mu: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not (self.T >= 0):
            raise ValueError(f"T must be >= 0, got {self.T}")
        if not (self.mu > 0):
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not (self.lam > 0):
            raise ValueError(f"lambda must be > 0, got {self.lam}")


@dataclass(frozen=True)
class ScalingParams:
    """Scaled regime: mu = eps*mu_bar, lambda = sqrt(eps)*lambda_bar."""

    epsilon: float
    mu_bar: float = 1.0
    lambda_bar: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "mu_bar", "lambda_bar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def delta(self):
        return self.lambda_bar**2 / self.mu_bar**2

    @classmethod
    def from_delta(cls, epsilon, delta, mu_bar=1.0):
        if delta <= 0:
            raise ValueError("delta must be > 0; use the quasi-neutral solver for delta = 0")
        return cls(epsilon, mu_bar, mu_bar * math.sqrt(delta))

    def physical(self, T):
        return PlasmaParams(T, self.epsilon * self.mu_bar, math.sqrt(self.epsilon) * self.lambda_bar)


@dataclass(frozen=True)
class EquilibriumState:
    n: float
    u: float
    phi: float

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"density must be > 0, got {self.n}")

    @classmethod
    def quasi_neutral(cls, n, u):
        return cls(n, u, math.log(n))


@dataclass(frozen=True)
class LagrangianEquilibrium:
    v: float
    u: float
    phi: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"specific volume must be > 0, got {self.v}")


UPSTREAM = EquilibriumState(1.0, 0.0, 0.0)


def sound_speed(T):
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    return math.sqrt(T + 1.0)


def rh_residual_eulerian(left, right, s, T):
    """Mass and momentum jump residuals across a shock moving at speed s."""
    nl, ul, nr, ur = left.n, left.u, right.n, right.u
    r1 = -s * (nr - nl) + nr * ur - nl * ul
    r2 = -s * (nr * ur - nl * ul) + nr * ur**2 - nl * ul**2 + (T + 1.0) * (nr - nl)
    return r1, r2


def rh_residual_lagrangian(left, right, s, T):
    """Jump residuals of the Lagrangian system in the frame y = x - s t."""
    r1 = -s * (right.v - left.v) - (right.u - left.u)
    r2 = -s * (right.u - left.u) + (T + 1.0) * (1.0 / right.v - 1.0 / left.v)
    return r1, r2


def eps_max(T, fraction=DEFAULT_EPS_FRACTION):
    return fraction * sound_speed(T)


def parametrize_downstream(T, epsilon, eps_fraction=DEFAULT_EPS_FRACTION):
    """Return (s, downstream state, a_eps) for amplitude epsilon.

    ``eps_fraction`` bounds epsilon by that fraction of the sound speed; pass 1.0
    to allow the whole admissible range 0 < eps < sqrt(T+1).
    """
    c = sound_speed(T)
    if not (0 < epsilon < c) or epsilon > eps_fraction * c:
        raise ValueError(
            f"epsilon={epsilon} outside (0, {min(eps_fraction, 1.0) * c:.6g}] for T={T}"
        )
    s = c - epsilon
    n_plus = s * s / (T + 1.0)
    u_plus = s * (1.0 - 1.0 / n_plus)
    a_eps = math.log(n_plus) / epsilon + 2.0 / c
    return s, EquilibriumState.quasi_neutral(n_plus, u_plus), a_eps


def eulerian_to_lagrangian(state):
    return LagrangianEquilibrium(1.0 / state.n, state.u, state.phi)


def lagrangian_to_eulerian(state):
    return EquilibriumState(1.0 / state.v, state.u, state.phi)
