"""Command-line entry point.

Exit codes: 0 success, 1 solver failure, 2 usage or configuration error.
Failures print a JSON error record on stderr. Field data are written as CSV
with a ``# key = value`` header carrying the resolved configuration; scalar
reports are JSON. Outputs default to ``$NSP_SHOCK_OUT/<command>`` when
``--out`` is not given (``NSP_SHOCK_OUT`` defaults to the working directory).
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import approximation, energy, evolution, kdv_burgers, profile_ode
from .config import ConfigError, load_config, with_override
from .errors import NspShockError
from .rankine_hugoniot import (
    PlasmaParams,
    eulerian_to_lagrangian,
    parametrize_downstream,
    rh_residual_eulerian,
    rh_residual_lagrangian,
    UPSTREAM,
)

OUT_ENV = "NSP_SHOCK_OUT"


# ----------------------------------------------------------------------------
# output helpers


def out_dir(args, command):
    path = Path(args.out) if getattr(args, "out", None) else Path(os.environ.get(OUT_ENV, ".")) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path, columns, header):
    """Columns as {name: array}; values with 17 significant digits for bit-stable output."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with open(path, "w") as fh:
        for k, v in header.items():
            fh.write(f"# {k} = {v}\n")
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_csv(path):
    """Inverse of :func:`write_csv`; returns (columns, header)."""
    header = {}
    with open(path) as fh:
        lines = fh.readlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
        else:
            body.append(line)
    names = body[0].strip().split(",")
    data = np.loadtxt(body[1:], delimiter=",", ndmin=2)
    return {k: data[:, i] for i, k in enumerate(names)}, header


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


# ----------------------------------------------------------------------------
# subcommands


def cmd_rh(args):
    s, right, a_eps = parametrize_downstream(args.T, args.eps, args.eps_fraction)
    r_e = rh_residual_eulerian(UPSTREAM, right, s, args.T)
    r_l = rh_residual_lagrangian(eulerian_to_lagrangian(UPSTREAM), eulerian_to_lagrangian(right), s, args.T)
    emit(
        {
            "T": args.T,
            "epsilon": args.eps,
            "s": s,
            "n_plus": right.n,
            "u_plus": right.u,
            "phi_plus": right.phi,
            "v_plus": 1.0 / right.n,
            "a_eps": a_eps,
            "residual_eulerian": list(r_e),
            "residual_lagrangian": list(r_l),
        }
    )
    return 0


def cmd_profile(args):
    params = PlasmaParams(args.T, args.mu, args.lam)
    grid = profile_ode.GridSpec(L=args.L, nodes=args.nodes, L_factor=args.L_factor)
    sol = profile_ode.solve_profile(params, args.eps, grid, eps_fraction=args.eps_fraction)
    path = out_dir(args, "profile")
    header = {"command": "profile", "T": args.T, "mu": args.mu, "lam": args.lam, "epsilon": args.eps,
              "nodes": args.nodes, "L": sol.grid[-1], "s": sol.s}
    write_csv(path / "profile.csv", {"xi": sol.grid, "n": sol.n, "u": sol.u, "phi": sol.phi}, header)
    c_lo, c_hi = profile_ode.monotonicity_constants(sol)
    report = {
        **header,
        "iterations": sol.iterations,
        "residual_norm": sol.residual_norm,
        "first_integral_residual": profile_ode.first_integral_residual(sol),
        "monotone": {k: bool(profile_ode.strictly_decreasing(getattr(sol, k))) for k in ("n", "u", "phi")},
        "monotonicity_constants": [c_lo, c_hi],
        "g_dot_zero": profile_ode.g_dot_zero(params, sol.right.n),
        "slow_rate": profile_ode.slow_rate(params, sol.s),
    }
    try:
        report["left_rate"] = profile_ode.decay_rate_estimate(sol, "left")
        report["right_rate"] = profile_ode.decay_rate_estimate(sol, "right")
    except NspShockError as exc:
        report["tail_fit_error"] = str(exc)
    write_json(path / "report.json", report)
    emit(report)
    return 0


def cmd_kdvb(args):
    grid = kdv_burgers.KdvbGrid(args.L, args.nodes)
    prof = kdv_burgers.solve_kdvb(args.T, args.delta, args.kind, args.eps, grid)
    path = out_dir(args, "kdvb")
    header = {"command": "kdvb", "T": args.T, "delta": args.delta, "kind": args.kind, "epsilon": args.eps,
              "nodes": args.nodes, "L": prof.grid[-1]}
    write_csv(path / f"{args.kind}.csv", {"z": prof.grid, args.kind: prof.field}, header)
    report = {**header, "far_left": prof.far_left, "far_right": prof.far_right,
              "residual_norm": prof.residual_norm, **kdv_burgers.monotonicity_report(prof)}
    if args.delta > 0:
        try:
            left, right = kdv_burgers.tail_rates(prof)
            report["tail_rates"] = {"left": left, "right": right}
        except NspShockError as exc:
            report["tail_fit_error"] = str(exc)
    write_json(path / "report.json", report)
    emit(report)
    return 0


def cmd_validate(args):
    zgrid = approximation.ZGrid(args.L, args.nodes)
    report = approximation.approximation_study(args.T, args.delta, args.eps_list, zgrid)
    report["command"] = "validate"
    if args.fixed_point:
        eps = min(args.eps_list)
        first = approximation.build_first_order(args.T, args.delta, eps, zgrid)
        fp = approximation.solve_remainder_fixed_point(first)
        report["fixed_point"] = {"epsilon": eps, **fp.history}
    path = out_dir(args, "validate")
    write_json(path / "report.json", report)
    emit(report)
    return 0


def _snapshot(path, state, profile, header):
    dv, du = state.deviation(profile.v, profile.u)
    cols = {"y": state.grid, "v": state.v, "u": state.u, "phi": state.phi, "dv": dv, "du": du}
    if state.phi_prev is not None and state.dt_prev:
        cols["phi_t"] = (state.phi - state.phi_prev) / state.dt_prev
    write_csv(path, cols, {**header, "t": repr(state.t)})


def run_evolution(cfg, path):
    """Full stability experiment for one configuration; returns the verdict dict."""
    params = cfg.plasma()
    ev = cfg.evolve
    eps = evolution.epsilon_for_volume_jump(params.T, ev.jump)
    sol = profile_ode.solve_profile(
        params,
        eps,
        profile_ode.GridSpec(nodes=cfg.grid.nodes, L_factor=cfg.grid.L_factor),
        profile_ode.SolverOptions(tol=cfg.solver.tol, max_iter=cfg.solver.max_iter),
        eps_fraction=1.0,
    )
    horizon = ev.t_end * (2 if ev.doubling else 1)
    if cfg.grid.L_left > 0:
        lgrid = evolution.LagrangianGrid(cfg.grid.L_left, cfg.grid.L_right, cfg.grid.dy)
    else:
        lgrid = evolution.auto_grid(params.T, sol.s, params.mu, horizon, ev.width, cfg.grid.dy, cfg.grid.L_right)
    profile = evolution.polish_profile(evolution.lagrangian_profile(sol, lgrid))
    spec = evolution.PerturbationSpec(ev.amplitude, ev.center, ev.width, ev.shape)
    if ev.amplitude == 0 and ev.E0 > 0:
        spec = evolution.PerturbationSpec(evolution.amplitude_for_energy(profile, spec, ev.E0), ev.center, ev.width, ev.shape)
    state = evolution.make_initial(profile, spec)
    header = {**cfg.flat(), "epsilon": eps, "s": sol.s, "L_left": lgrid.L_left, "L_right": lgrid.L_right,
              "amplitude": spec.amplitude}
    if params.T == 0:
        header["warning"] = "T = 0: positivity of the modified energy is not guaranteed"
    write_csv(path / "profile.csv", {"y": profile.grid, "v": profile.v, "u": profile.u, "phi": profile.phi}, header)
    E0 = energy.initial_energy(state.dv, state.du, state.dy)

    next_snap = [0.0]

    def callback(st, rep):
        if ev.snapshot_every > 0 and st.t >= next_snap[0] - 1e-9:
            _snapshot(path / f"snapshot_t{st.t:010.3f}.csv", st, profile, header)
            next_snap[0] += ev.snapshot_every

    _snapshot(path / f"snapshot_t{0.0:010.3f}.csv", state, profile, header)
    next_snap[0] = ev.snapshot_every
    traj = evolution.evolve(state, profile, horizon, ev.sample_every, cfg.solver.cfl, callback=callback)
    cols = {name: traj.column(name) for name in
            ("t", "E", "D", "E1", "margin", "mass_v", "mass_u", "sup_perturbation", "leak_Phi", "leak_Psi",
             "boundary_amplitude")}
    cols["G"] = traj.G()
    write_csv(path / "diagnostics.csv", cols, {**header, "E0": E0, "dt": traj.dt})
    t_check = ev.t_end if ev.doubling else ev.t_end / 2
    verdict = energy.stability_verdict(
        traj.times, cols["E"], cols["D"], cols["margin"], cols["mass_v"], cols["mass_u"],
        cols["sup_perturbation"], t_check, E0=E0,
    )
    verdict.update({"config": cfg.to_dict(), "E0": E0, "dt": traj.dt, "steps": traj.steps, "warnings": traj.warnings,
                    "steady_residual": profile.steady_residual, "epsilon": eps, "T": params.T})
    write_json(path / "verdict.json", verdict)
    return verdict


def _config(args):
    return load_config(args.config, args.set)


def cmd_evolve(args):
    cfg = _config(args)
    path = Path(args.out) if args.out else Path(os.environ.get(OUT_ENV, ".")) / cfg.output.dir
    path.mkdir(parents=True, exist_ok=True)
    verdict = run_evolution(cfg, path)
    emit(verdict)
    return 0


def cmd_diagnose(args):
    state_cols, state_hdr = read_csv(args.state)
    prof_cols, prof_hdr = read_csv(args.profile)
    if not np.array_equal(state_cols["y"], prof_cols["y"]):
        raise ConfigError("state and profile grids differ")
    T = float(prof_hdr.get("physical.T", args.T if args.T is not None else "nan"))
    lam = float(prof_hdr.get("physical.lam", args.lam))
    s = float(prof_hdr.get("s", "nan"))
    if math.isnan(T) or math.isnan(s):
        raise ConfigError("profile header lacks T or s; pass --T and use a profile written by evolve")
    h = float(state_cols["y"][1] - state_cols["y"][0])
    rep = energy.report_from_arrays(
        float(state_hdr.get("t", "nan")),
        state_cols["v"] - prof_cols["v"],
        state_cols["u"] - prof_cols["u"],
        state_cols["phi"] - prof_cols["phi"],
        state_cols.get("phi_t", np.zeros_like(state_cols["y"])),
        prof_cols["v"],
        prof_cols["phi"],
        s,
        T,
        lam,
        h,
    )
    emit(rep.as_dict())
    return 0


def _sweep_worker(job):
    cfg, path = job
    path.mkdir(parents=True, exist_ok=True)
    try:
        return {"dir": str(path), **run_evolution(cfg, path)}
    except NspShockError as exc:
        return {"dir": str(path), "passed": False, "error": type(exc).__name__, "message": str(exc)}


def cmd_sweep(args):
    cfg = _config(args)
    root = out_dir(args, "sweep")
    jobs = [(with_override(cfg, args.param, v), root / f"{args.param}={v}") for v in args.values]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    summary = {"param": args.param, "values": args.values, "results": results}
    passed = [v for v, r in zip(args.values, results) if r.get("passed")]
    summary["largest_passing"] = max((float(v) for v in passed), default=None)
    write_json(root / "summary.json", summary)
    emit(summary)
    return 0


# ----------------------------------------------------------------------------
# parser


def build_parser():
    ap = argparse.ArgumentParser(prog="nsp-shock", description=__doc__.splitlines()[0],
                                 formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("rh", help="downstream state and jump residuals", formatter_class=fmt)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--eps-fraction", type=float, default=0.5, help="upper bound on eps / sqrt(T+1)")
    p.set_defaults(func=cmd_rh)

    p = sub.add_parser("profile", help="full shock profile", formatter_class=fmt)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--nodes", type=int, default=4001)
    p.add_argument("--L", type=float, default=None, help="half-length; default L_factor / rate")
    p.add_argument("--L-factor", type=float, default=40.0)
    p.add_argument("--eps-fraction", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("kdvb", help="KdV-Burgers profile", formatter_class=fmt)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kind", choices=kdv_burgers.KINDS, default="n1")
    p.add_argument("--eps", type=float, default=None, help="amplitude for the modified equations")
    p.add_argument("--nodes", type=int, default=4001)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kdvb)

    p = sub.add_parser("validate", help="KdV-Burgers approximation study", formatter_class=fmt)
    p.add_argument("--T", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--eps-list", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    p.add_argument("--nodes", type=int, default=4001)
    p.add_argument("--L", type=float, default=60.0)
    p.add_argument("--fixed-point", action="store_true", help="also run the remainder fixed point")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evolve", help="stability experiment from a TOML config", formatter_class=fmt)
    p.add_argument("--config", required=False, help="TOML file; see nsp_shock.config for the schema")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("diagnose", help="energy report of a snapshot", formatter_class=fmt)
    p.add_argument("--state", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("sweep", help="parallel evolve runs over one parameter", formatter_class=fmt)
    p.add_argument("--config")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    p.add_argument("--param", required=True, help="dotted key, e.g. evolve.E0")
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": 2}), file=sys.stderr)
        return 2
    except NspShockError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": 1}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
