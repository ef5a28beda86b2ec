"""First-order KdV-Burgers approximation: eps-order, delta-uniformity and the fixed-point cross-check."""

import numpy as np

from nsp_shock.approximation import (
    ZGrid,
    approximation_study,
    build_first_order,
    build_scaled_profile,
    compute_remainder_direct,
    solve_remainder_fixed_point,
)
from nsp_shock.rankine_hugoniot import ScalingParams

grid = ZGrid(60.0, 8001)
study = approximation_study(0.0, 0.01, [0.04, 0.02, 0.01], grid)
for row in study["rows"]:
    print({k: f"{v:.3e}" for k, v in row.items()})
print("observed orders:", {k: [round(x, 3) for x in v] for k, v in study["orders"].items()})

for delta in (1e-2, 1e-3, 1e-4):
    ex = build_scaled_profile(ScalingParams.from_delta(0.02, delta), 0.0, grid)
    rem = compute_remainder_direct(ex, build_first_order(0.0, delta, 0.02, grid))
    print(f"delta={delta:.0e}  sup|n_R|={np.max(np.abs(rem.n_R)):.4f}")

first = build_first_order(0.0, 0.01, 0.02, grid)
fp = solve_remainder_fixed_point(first)
print("fixed-point contraction ratios:", [round(r, 4) for r in fp.history["ratios"]])
