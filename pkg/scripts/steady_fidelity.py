"""Unperturbed Lagrangian profile under the time stepper: drift against the discrete steady residual."""

import numpy as np

from nsp_shock import evolution as ev
from nsp_shock import profile_ode as po
from nsp_shock.rankine_hugoniot import PlasmaParams

params = PlasmaParams(1.0)
eps = ev.epsilon_for_volume_jump(1.0, 0.05)
sol = po.solve_profile(params, eps, po.GridSpec(nodes=4001), eps_fraction=1.0)
for dy in (0.2, 0.1):
    raw = ev.lagrangian_profile(sol, ev.LagrangianGrid(400.0, 400.0, dy))
    polished = ev.polish_profile(raw)
    for name, prof in (("raw", raw), ("polished", polished)):
        state = ev.profile_state(prof)
        dt = 0.95 * ev.stable_dt(state)
        for _ in range(10_000):
            state = ev.step(state, dt)
        change = max(np.max(np.abs(state.v - prof.v)), np.max(np.abs(state.u - prof.u)))
        print(f"dy={dy}  {name:8s} change={change:.2e}  steady_residual={polished.steady_residual:.2e}")
