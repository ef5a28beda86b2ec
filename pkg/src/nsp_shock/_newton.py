"""Damped Newton iteration for sparse systems."""

import numpy as np
import scipy.sparse.linalg as spla

from .errors import NewtonDiverged


def newton(fun, x0, tol=1e-10, max_iter=30, min_step=1e-4, admissible=None, ftol=0.0):
    """Solve fun(x) = (F, J) = 0 with backtracking on ||F||_inf.

    Converged when the max-norm of the Newton update drops below ``tol`` or the
    residual max-norm drops below ``ftol``.
    Returns (x, iterations, history of residual norms).
    """
    x = np.array(x0, dtype=float)
    F, J = fun(x)
    res = float(np.max(np.abs(F)))
    merit = float(np.linalg.norm(F))
    history = [res]
    for it in range(1, max_iter + 1):
        try:
            dx = spla.spsolve(J.tocsc(), -F)
        except RuntimeError as exc:  # singular factor
            raise NewtonDiverged(f"singular Jacobian: {exc}", res, history) from exc
        if not np.all(np.isfinite(dx)):
            raise NewtonDiverged("non-finite Newton update", res, history)
        step = 1.0
        while True:
            trial = x + step * dx
            ok = admissible is None or admissible(trial)
            if ok:
                F_t, J_t = fun(trial)
                res_t = float(np.max(np.abs(F_t)))
                merit_t = float(np.linalg.norm(F_t))
                if np.isfinite(merit_t) and (merit_t <= (1 - 1e-4 * step) * merit or res_t < 1e-13):
                    break
            step *= 0.5
            if step < min_step:
                # accept a full step near round-off where the residual cannot drop further
                if res < 1e-11:
                    return x, it, history
                raise NewtonDiverged(
                    f"line search failed at iteration {it}, residual {res:.3e}", res, history
                )
        x, F, J, res, merit = trial, F_t, J_t, res_t, merit_t
        history.append(res)
        if step * np.max(np.abs(dx)) < tol or res < ftol:
            return x, it, history
    raise NewtonDiverged(f"no convergence in {max_iter} iterations, residual {res:.3e}", res, history)
