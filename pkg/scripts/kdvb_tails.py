"""KdV-Burgers profiles: fitted tail rates against the linearization, and monotonicity in delta."""

from nsp_shock.errors import ComplexRates
from nsp_shock.kdv_burgers import critical_delta, kdvb_phase_eigenvalues, monotonicity_report, solve_kdvb, tail_rates

T = 0.0
print(f"critical delta (discriminant root) = {critical_delta(T):.4f}")
print(f"{'delta':>7} {'left':>10} {'lam-1':>10} {'right':>10} {'|lam+1|':>10} monotone")
for delta in (0.001, 0.01, 0.05, 0.1, 0.2, 0.5):
    prof = solve_kdvb(T, delta)
    mono = monotonicity_report(prof)["monotone"]
    try:
        lm1, _, lp1, _ = kdvb_phase_eigenvalues(T, delta)
    except ComplexRates:
        print(f"{delta:7.3f} {'complex left rates (oscillatory tail)':>43} {mono}")
        continue
    left, right = tail_rates(prof)
    print(f"{delta:7.3f} {left:10.4f} {lm1:10.4f} {right:10.4f} {abs(lp1):10.4f} {mono}")
