"""Energy functionals of the perturbation around a Lagrangian shock profile.

Perturbations are taken in antiderivative form: Phi and Psi integrate the
volume and velocity perturbations from the left end of the grid, phi~ is the
potential perturbation. Sobolev norms use fourth-order centered differences
and trapezoidal quadrature, as in the remainder validator.
"""

from dataclasses import dataclass, asdict

import numpy as np

from . import _fd

FD_ORDER = 4


@dataclass
class EnergyReport:
    t: float
    E: float
    D: float
    E1: float
    margin: float
    mass_v: float
    mass_u: float
    sup_perturbation: float
    leak_Phi: float = 0.0
    leak_Psi: float = 0.0
    boundary_amplitude: float = 0.0

    def as_dict(self):
        return asdict(self)


def h_sq(f, h, k):
    """Squared discrete H^k norm."""
    total = 0.0
    for j in range(k + 1):
        d = _fd.derivative(f, h, j, FD_ORDER) if j else np.asarray(f, dtype=float)
        total += _fd.trapezoid(d * d, h)
    return float(total)


def antiderivatives(v_t, u_t, h):
    return _fd.cumtrapz(v_t, h), _fd.cumtrapz(u_t, h)


def masses(v_t, u_t, h):
    """Discrete masses sum(.) * dy of the volume and velocity perturbations."""
    return float(np.sum(v_t) * h), float(np.sum(u_t) * h)


def energy_E(Phi, Psi, phi_t, h):
    return h_sq(Phi, h, 2) + h_sq(Psi, h, 2) + h_sq(phi_t, h, 2)


def dissipation_D(Phi, Psi, phi_t, dphi_dt, v_bar, s, h):
    """Dissipation: weighted Psi term plus derivative norms and the potential terms."""
    vy = _fd.d1(v_bar, h, FD_ORDER)
    weight = np.clip(s * v_bar * vy, 0.0, None)
    Phi_y = _fd.d1(Phi, h, FD_ORDER)
    Psi_y = _fd.d1(Psi, h, FD_ORDER)
    total = _fd.trapezoid(weight * Psi**2, h)
    total += h_sq(Phi_y, h, 1) + h_sq(dphi_dt, h, 1)
    total += h_sq(Psi_y, h, 2) + h_sq(phi_t, h, 2)
    return float(total)


def positivity_margin(v_bar, phi_bar, T, lam):
    """Pointwise smallest eigenvalue of the quadratic form in (Phi, phi~_y) inside E1."""
    a = 0.5 * (T + 1.0)
    b = 0.5 * lam**4 * np.exp(-phi_bar) / v_bar
    c = -0.5 * lam**2
    mean = 0.5 * (a + b)
    rad = np.sqrt(0.25 * (a - b) ** 2 + c * c)
    return mean - rad


def energy_E1(Phi, Psi, phi_t, v_bar, phi_bar, T, lam, h):
    """Basic energy together with its pointwise positivity margin."""
    phi_y = _fd.d1(phi_t, h, FD_ORDER)
    dens = (
        0.5 * v_bar**2 * Psi**2
        + 0.5 * lam**2 * v_bar * phi_t**2
        + 0.5 * (T + 1.0) * Phi**2
        + 0.5 * lam**4 * np.exp(-phi_bar) * phi_y**2 / v_bar
        - lam**2 * phi_y * Phi
    )
    return float(_fd.trapezoid(dens, h)), float(np.min(positivity_margin(v_bar, phi_bar, T, lam)))


def initial_energy(v_t, u_t, h):
    """E0 = |v~0, u~0|_{H^1}^2 + |Phi0, Psi0|_{L^2}^2."""
    Phi, Psi = antiderivatives(v_t, u_t, h)
    return h_sq(v_t, h, 1) + h_sq(u_t, h, 1) + h_sq(Phi, h, 0) + h_sq(Psi, h, 0)


def report_from_arrays(t, v_t, u_t, phi_t, dphi_dt, v_bar, phi_bar, s, T, lam, h):
    """Energy report from perturbation arrays and the base profile.

    ``leak_Phi`` and ``leak_Psi`` are the right-end values of the
    antiderivatives, which vanish for zero-mass perturbations.
    """
    Phi, Psi = antiderivatives(v_t, u_t, h)
    E1, margin = energy_E1(Phi, Psi, phi_t, v_bar, phi_bar, T, lam, h)
    mv, mu_ = masses(v_t, u_t, h)
    sup = float(max(np.max(np.abs(v_t)), np.max(np.abs(u_t)), np.max(np.abs(phi_t))))
    return EnergyReport(
        t=float(t),
        E=energy_E(Phi, Psi, phi_t, h),
        D=dissipation_D(Phi, Psi, phi_t, dphi_dt, v_bar, s, h),
        E1=E1,
        margin=margin,
        mass_v=mv,
        mass_u=mu_,
        sup_perturbation=sup,
        leak_Phi=float(Phi[-1]),
        leak_Psi=float(Psi[-1]),
    )


def running_integral(times, values):
    """Cumulative trapezoid of samples at (possibly uneven) times."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    out = np.zeros_like(values)
    if len(values) > 1:
        out[1:] = np.cumsum(0.5 * np.diff(times) * (values[1:] + values[:-1]))
    return out


def _value_at(times, values, t):
    return float(np.interp(t, times, values))


def stability_verdict(
    times,
    E,
    D,
    margin,
    mass_v,
    mass_u,
    sup_pert,
    t_end,
    E0=None,
    mass_tol=1e-10,
    growth_tol=0.05,
    decay_ratio=0.2,
    G_floor=1e-18,
    sup_floor=1e-10,
):
    """Pass/fail checks for a run that reaches at least 2 * t_end.

    G(t) = E(t) + int_0^t D must not grow by more than ``growth_tol`` between
    t_end/2 and t_end, nor between t_end and 2 t_end. The perturbation sup at
    t_end must be below ``decay_ratio`` times its running maximum. ``G_floor``
    and ``sup_floor`` are absolute levels below which growth and decay are not
    judged, so an unperturbed run passes on round-off.
    """
    times = np.asarray(times, dtype=float)
    if times[-1] < 2 * t_end * (1 - 1e-9):
        raise ValueError(f"trajectory ends at {times[-1]}, need {2 * t_end}")
    G = np.asarray(E) + running_integral(times, D)
    G_half = _value_at(times, G, 0.5 * t_end)
    G_end = _value_at(times, G, t_end)
    G_double = _value_at(times, G, 2 * t_end)
    sup = np.asarray(sup_pert)
    upto = times <= t_end * (1 + 1e-12)
    sup_end = _value_at(times, sup, t_end)
    peak = float(np.max(sup[upto]))
    checks = {
        "mass": float(max(np.max(np.abs(mass_v)), np.max(np.abs(mass_u)))) < mass_tol,
        "energy_trend": G_end <= (1 + growth_tol) * G_half + G_floor,
        "energy_doubling": G_double <= (1 + growth_tol) * G_end + G_floor,
        "decay": sup_end < decay_ratio * peak or peak <= sup_floor,
        "positivity": float(np.min(margin)) > 0,
    }
    E0 = float(E[0]) if E0 is None else float(E0)
    return {
        "passed": all(checks.values()),
        "sup_E_over_E0": float(np.max(E)) / E0 if E0 > 0 else 0.0,
        "max_G_over_E0": float(np.max(G)) / E0 if E0 > 0 else 0.0,
        "checks": checks,
        "G_half": G_half,
        "G_end": G_end,
        "G_double": G_double,
        "sup_ratio": sup_end / peak if peak > 0 else 0.0,
        "max_mass": float(max(np.max(np.abs(mass_v)), np.max(np.abs(mass_u)))),
        "min_margin": float(np.min(margin)),
    }
