"""Profile structure at T=0, mu=lam=1: monotonicity, tail rates and their eps scaling."""

import numpy as np

from nsp_shock import profile_ode as po
from nsp_shock.rankine_hugoniot import PlasmaParams

params = PlasmaParams(0.0)
print(f"{'eps':>6} {'monotone':>8} {'left rate':>10} {'slow eig':>10} {'g0':>10} {'rate/g0':>8} {'right rate':>10}")
for eps in (0.04, 0.02, 0.01, 0.005):
    sol = po.solve_profile(params, eps, po.GridSpec(nodes=4001))
    mono = all(po.strictly_decreasing(f) for f in (sol.n, sol.u, sol.phi))
    left = po.decay_rate_estimate(sol, "left")
    right = po.decay_rate_estimate(sol, "right")
    g0 = po.g_dot_zero(params, sol.right.n)
    slow = po.slow_rate(params, sol.s)
    print(f"{eps:6.3f} {mono!s:>8} {left:10.5f} {slow:10.5f} {g0:10.5f} {left / g0:8.3f} {right:10.5f}")
sol = po.solve_profile(params, 0.02, po.GridSpec(nodes=4001))
print("u identity error:", float(np.max(np.abs(sol.u - sol.s * (1 - 1 / sol.n)))))
print("phi'/n' bounds:", po.monotonicity_constants(sol))
