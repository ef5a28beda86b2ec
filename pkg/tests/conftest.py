import math

import pytest

from nsp_shock import evolution
from nsp_shock.profile_ode import GridSpec, solve_profile
from nsp_shock.rankine_hugoniot import PlasmaParams


@pytest.fixture(scope="session")
def profile_t0():
    """T=0, mu=lam=1, eps=0.02 on the default grid."""
    return solve_profile(PlasmaParams(0.0), 0.02, GridSpec(nodes=4001))


@pytest.fixture(scope="session")
def lagrangian_small():
    """Polished Lagrangian profile for T=1, v+ - v- = 0.05 on a short grid."""
    params = PlasmaParams(1.0)
    eps = evolution.epsilon_for_volume_jump(1.0, 0.05)
    sol = solve_profile(params, eps, GridSpec(nodes=4001), eps_fraction=1.0)
    raw = evolution.lagrangian_profile(sol, evolution.LagrangianGrid(400.0, 400.0, 0.5))
    return raw, evolution.polish_profile(raw)


def golden():
    return (math.sqrt(5.0) - 1.0) / 2.0
