"""Command-line front end: ``simulate``, ``sweep``, ``phase-diagram``, ``validate``.

Precedence of settings: command-line flag > ``NMBATTERY_*`` environment
variable > config file > built-in default.

Exit codes: 0 success, 1 cross-validation check failed, 2 invalid
configuration, 3 solver failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import DEFAULT_NORM_TOL, SolverDivergence, cross_validate, solve
from .io import (ConfigError, RunConfig, apply_overrides, check_config, env_overrides,
                 load_config, write_table)
from .observables import metrics
from .sweep import derivative_Wmax, find_critical_detuning, phase_diagram, scan_delta

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4

SIMULATE_COLUMNS = ["gamma_t", "re_c1", "im_c1", "re_c2", "im_c2", "c2sq",
                    "deltaE", "power", "ergotropy"]
SWEEP_COLUMNS = ["delta_over_gamma", "deltaE_max", "W_max", "t_of_Wmax",
                 "c2sq_at_Wmax", "rho22_at_Wmax", "dWmax_dDelta", "status"]
DIAGRAM_COLUMNS = ["eta_over_gamma", "delta_over_gamma", "W_max", "deltaE_max", "status"]
BOUNDARY_COLUMNS = ["eta_over_gamma", "delta_onset_over_gamma"]


def _meta(cfg: RunConfig, command: str) -> dict:
    meta = {"artifact": "nmbattery", "version": __version__, "command": command,
            "norm_tol": DEFAULT_NORM_TOL}
    meta.update(cfg.to_flat())
    return meta


def cmd_simulate(cfg: RunConfig, stream=None) -> int:
    traj = solve(cfg.system, cfg.initial, cfg.time_grid(), cfg.grid.solver)
    m = metrics(traj)
    rows = zip(m.times, traj.c1.real, traj.c1.imag, traj.c2.real, traj.c2.imag,
               m.c2sq, m.delta_e, m.power, m.ergotropy)
    meta = _meta(cfg, "simulate")
    if traj.notes:
        meta["notes"] = "; ".join(traj.notes)
    write_table(cfg.output.path, meta, SIMULATE_COLUMNS, rows, cfg.output.format,
                stream=stream)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, stream=None) -> int:
    s = cfg.sweep
    gamma = cfg.system.gamma
    deltas = s.deltas()
    grid = cfg.time_grid()
    epsilon = s.epsilon * cfg.system.w0
    scan = scan_delta(cfg.system, deltas * gamma, cfg.initial, grid, cfg.grid.solver,
                      cfg.grid.threads)
    if len(scan) >= 3:
        deriv = derivative_Wmax(scan) * gamma
    else:
        # too few points for a derivative: NaN sentinel
        deriv = np.full(len(scan), np.nan)
    rows = [[pt.params.delta / gamma, pt.deltaE_max, pt.W_max, pt.t_of_Wmax,
             pt.c2sq_at_Wmax, pt.rho22_at_Wmax, d, pt.status]
            for pt, d in zip(scan, deriv)]
    crit = None
    if len(scan) >= 2:
        crit = find_critical_detuning(cfg.system, (deltas[0] * gamma, deltas[-1] * gamma),
                                      epsilon, s.resolution * gamma, cfg.initial, grid,
                                      cfg.grid.solver, coarse=scan)
    if crit is None:
        trailer = {"critical": "none"}
    else:
        trailer = {
            "critical.delta_c": crit.delta_c / gamma,
            "critical.bracket_lo": crit.bracket[0] / gamma,
            "critical.bracket_hi": crit.bracket[1] / gamma,
            "critical.jump": crit.jump,
            "critical.at_lower_edge": crit.at_lower_edge,
            "critical.multiple_onsets": crit.multiple_onsets,
        }
    write_table(cfg.output.path, _meta(cfg, "sweep"), SWEEP_COLUMNS, rows,
                cfg.output.format, trailer=trailer, stream=stream)
    return EXIT_OK


def boundary_path(path: str) -> str:
    if path in (None, "-"):
        return "-"
    p = Path(path)
    return str(p.with_name(f"{p.stem}_boundary{p.suffix}"))


def cmd_phase_diagram(cfg: RunConfig, stream=None) -> int:
    d = cfg.diagram
    gamma = cfg.system.gamma
    pd = phase_diagram(d.etas() * gamma, d.deltas() * gamma, cfg.system, cfg.initial,
                       cfg.time_grid(), cfg.grid.solver, cfg.sweep.epsilon * cfg.system.w0,
                       cfg.grid.threads)
    rows = []
    for i, eta in enumerate(pd.eta_axis):
        for j, delta in enumerate(pd.delta_axis):
            rows.append([eta / gamma, delta / gamma, pd.Wmax_grid[i, j],
                         pd.deltaE_grid[i, j], pd.status[i, j]])
    meta = _meta(cfg, "phase-diagram")
    write_table(cfg.output.path, meta, DIAGRAM_COLUMNS, rows, cfg.output.format,
                stream=stream)
    brows = [[eta / gamma, b / gamma] for eta, b in zip(pd.eta_axis, pd.boundary)]
    write_table(boundary_path(cfg.output.path), meta, BOUNDARY_COLUMNS, brows,
                cfg.output.format, stream=stream)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, stream=None, tol: float = 1e-4) -> int:
    out = stream or sys.stdout
    issues = check_config(cfg)
    if issues:
        for issue in issues:
            print(f"invalid: {issue}", file=out)
        return EXIT_VALIDATION
    report = cross_validate(cfg.system, cfg.initial, cfg.time_grid(), tol)
    print(report.summary(), file=out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "phase-diagram": cmd_phase_diagram,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmbattery",
        description="Two-qubit quantum battery in a Lorentzian non-Markovian reservoir.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--solver", choices=["ode", "laplace", "quadrature"])
        p.add_argument("--threads", type=int, help="worker processes, 0 = all cores")
        p.add_argument("--cross-sign", choices=["common", "bracket"])
        if name == "validate":
            p.add_argument("--tol", type=float, default=1e-4)
    return parser


def resolve_config(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = load_config(args.config or environ.get("NMBATTERY_CONFIG"))
    cfg = apply_overrides(cfg, env_overrides(environ))
    flags = {
        "output.path": args.out,
        "output.format": args.format,
        "grid.solver": args.solver,
        "grid.threads": args.threads,
        "system.cross_sign": args.cross_sign,
    }
    return apply_overrides(cfg, flags)


def main(argv=None, environ=None, stream=None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    try:
        cfg = resolve_config(args, environ)
    except ConfigError as exc:
        for issue in exc.issues:
            print(f"invalid: {issue}", file=err)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=err)
        return EXIT_IO

    if args.command == "validate":
        return cmd_validate(cfg, stream, args.tol)

    issues = check_config(cfg, args.command)
    if issues:
        for issue in issues:
            print(f"invalid: {issue}", file=err)
        return EXIT_VALIDATION
    try:
        return COMMANDS[args.command](cfg, stream)
    except SolverDivergence as exc:
        print(f"solver error: {exc}", file=err)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
