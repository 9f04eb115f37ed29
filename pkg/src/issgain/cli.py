"""Command-line front end: spectrum, gain, sweep-fig1 and simulate.

Exit codes: 0 success, 1 uncertified spectral hypothesis, 2 numerical
failure, 3 configuration error.  All outputs are CSV with 12 significant
digits; identical configurations produce byte-identical files.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import csvio
from .config import (
    backstepping_target,
    dirichlet_laplacian,
    load_config,
    problem_from_config,
    transport_problem,
)
from .disturbances import DisturbanceSignal
from .errors import ConfigError, IssgainError, NumericalFailure, UncertifiedHypothesis
from .gains import (
    TransportCase,
    backstepping_gain,
    gain_bvp,
    gain_series,
    sweep_figure1,
    transport_gain,
    advection_gain,
)
from .grids import GridFunction
from .pde_sim import (
    IssEnvelope,
    advection_exact,
    lift_disturbance,
    simulate_fd,
    simulate_spectral,
    simulate_via_lifting,
    verify_iss,
)
from .backstepping import ClosedLoopConfig, closed_loop_bound, simulate_closed_loop, solve_kernel, solve_inverse_kernel
from .sturm_liouville import check_hypothesis_H, solve_spectrum, solve_steady_bvp


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="issgain",
        description="ISS gains, spectra and simulations for boundary-disturbed "
                    "1-D parabolic equations")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_problem_args(p):
        p.add_argument("--case", choices=["dirichlet-laplacian", "transport", "backstepping"])
        p.add_argument("--config", help="path to a key/value config file")
        p.add_argument("--D", type=float, default=1.0)
        p.add_argument("--v", type=float, default=1.0)
        p.add_argument("--k", type=float, default=0.0)
        p.add_argument("--a", default="inf", help="exit parameter, number or 'inf'")
        p.add_argument("--c", type=float, default=0.0, help="target coefficient")
        p.add_argument("--zeta", type=float, help="directly sets zeta (transport, k=0)")
        p.add_argument("--q", type=float, help="constant potential override")
        p.add_argument("--resolution", type=int, default=256)

    p_spec = sub.add_parser("spectrum", help="eigenvalues/eigenfunctions + hypothesis report")
    add_problem_args(p_spec)
    p_spec.add_argument("--modes", type=int, default=12)
    p_spec.add_argument("--output", default="-")

    p_gain = sub.add_parser("gain", help="gain constant by all applicable routes")
    add_problem_args(p_gain)
    p_gain.add_argument("--modes", type=int, default=16, help="numeric series modes")
    p_gain.add_argument("--N", type=int, default=10_000, help="analytic series length")

    p_sweep = sub.add_parser("sweep-fig1", help="gain comparison sweep over zeta (k = 0)")
    p_sweep.add_argument("--zeta-min", type=float, default=0.05)
    p_sweep.add_argument("--zeta-max", type=float, default=4.0)
    p_sweep.add_argument("--points", type=int, default=80)
    p_sweep.add_argument("--advection-form", choices=["derivation", "legacy"],
                         default="derivation")
    p_sweep.add_argument("--output", default="-")

    p_sim = sub.add_parser("simulate", help="run a solver and export the trajectory")
    add_problem_args(p_sim)
    p_sim.add_argument("--solver", choices=["fd", "spectral", "lifted", "advection",
                                            "closed-loop"], default="fd")
    p_sim.add_argument("--dt", type=float, default=1e-3)
    p_sim.add_argument("--T", type=float, default=1.0)
    p_sim.add_argument("--store", type=int, default=160)
    p_sim.add_argument("--modes", type=int, default=32)
    p_sim.add_argument("--disturbance", choices=["constant", "sinusoid", "smoothed-step"],
                       default="constant")
    p_sim.add_argument("--amplitude", type=float, default=1.0)
    p_sim.add_argument("--omega", type=float, default=2.0)
    p_sim.add_argument("--phase", type=float, default=0.0)
    p_sim.add_argument("--ramp", type=float, default=0.5)
    p_sim.add_argument("--x0", choices=["zero", "steady", "lift", "sine"], default="zero")
    p_sim.add_argument("--plant-p", type=float, default=3.0, help="plant rate (closed loop)")
    p_sim.add_argument("--weight-D", type=float, help="norm weight e^{-vz/D} (advection)")
    p_sim.add_argument("--wide", action="store_true", help="append grid samples to rows")
    p_sim.add_argument("--output", default="-")
    p_sim.add_argument("--kernel-output", help="export the feedback kernel CSV (closed loop)")
    p_sim.add_argument("--verify-iss", action="store_true")
    p_sim.add_argument("--eps", default="0.1,1,10")
    p_sim.add_argument("--slack", type=float, default=1e-3)
    p_sim.add_argument("--iss-output", default="-")
    return parser


def _parse_a(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if value in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"--a must be a number or 'inf', got {value!r}") from exc


def _problem_from_args(args):
    if args.config:
        problem = problem_from_config(load_config(args.config))
    else:
        case = args.case or "dirichlet-laplacian"
        if case == "dirichlet-laplacian":
            problem = dirichlet_laplacian(args.resolution)
        elif case == "transport":
            if args.zeta is not None:
                tc = TransportCase.from_zeta(args.zeta, _parse_a(args.a), args.D)
                problem = transport_problem(tc.D, tc.v, tc.k, tc.a,
                                            resolution=args.resolution)
            else:
                problem = transport_problem(args.D, args.v, args.k, _parse_a(args.a),
                                            resolution=args.resolution)
        elif case == "backstepping":
            problem = backstepping_target(args.c, args.D, args.resolution)
        else:
            raise ConfigError(f"unknown case {case!r}")
    if getattr(args, "q", None) is not None:
        from .sturm_liouville import build_problem
        problem = build_problem(problem.p, args.q, problem.r, problem.a1, problem.a2,
                                problem.b1, problem.b2, problem.resolution)
    return problem


def _signal_from_args(args) -> DisturbanceSignal:
    if args.disturbance == "constant":
        return DisturbanceSignal.constant(args.amplitude)
    if args.disturbance == "sinusoid":
        return DisturbanceSignal.sinusoid(args.amplitude, args.omega, args.phase)
    return DisturbanceSignal.smoothed_step(args.amplitude, args.ramp)


def _initial_state(args, problem, d0: float) -> GridFunction:
    grid = problem.grid
    if args.x0 == "zero":
        return GridFunction(grid, np.zeros_like(grid))
    if args.x0 == "steady":
        return solve_steady_bvp(problem, d0)
    if args.x0 == "lift":
        lifting = lift_disturbance(problem, DisturbanceSignal.constant(d0))
        return GridFunction(grid, d0 / lifting.scale * lifting.g.values)
    return GridFunction(grid, args.amplitude * np.sin(math.pi * grid))


def cmd_spectrum(args) -> int:
    problem = _problem_from_args(args)
    spectrum = solve_spectrum(problem, args.modes)
    report = check_hypothesis_H(spectrum, problem) if args.modes >= 10 else None
    csvio.write_csv(csvio.spectrum_header(spectrum), csvio.spectrum_rows(spectrum),
                    args.output)
    sink = sys.stderr if args.output in (None, "-") else sys.stdout
    if report is None:
        print("hypothesis check skipped (needs >= 10 modes)", file=sink)
        return 0
    print(f"lambda1 = {csvio.fmt(report.lambda1)}", file=sink)
    print(f"positive = {report.positive}", file=sink)
    print(f"partial_sum = {csvio.fmt(report.partial_sum)}", file=sink)
    print(f"tail_bound = {csvio.fmt(report.tail_bound)}", file=sink)
    print(f"certified = {report.certified}", file=sink)
    print(f"method = {report.method}", file=sink)
    return 0 if report.certified else 1


def cmd_gain(args) -> int:
    rows = []
    main_report = None
    case = args.case or ("config" if args.config else "dirichlet-laplacian")
    if case == "transport":
        a = _parse_a(args.a)
        tc = (TransportCase.from_zeta(args.zeta, a, args.D) if args.zeta is not None
              else TransportCase(args.D, args.v, args.k, a))
        main_report = transport_gain(tc, args.N)
        rows.append(("closed_form", main_report.closed_value))
        rows.append(("series", main_report.series_value))
        problem = transport_problem(tc.D, tc.v, tc.k, tc.a, resolution=args.resolution)
        rows.append(("bvp_integral", gain_bvp(problem).gain_C))
    elif case in ("backstepping", "dirichlet-laplacian"):
        c = args.c if case == "backstepping" else 0.0
        main_report = backstepping_gain(c, args.D, args.N)
        rows.append(("closed_form", main_report.closed_value))
        rows.append(("series", main_report.series_value))
        problem = backstepping_target(c, args.D, args.resolution)
        rows.append(("bvp_integral", gain_bvp(problem).gain_C))
    else:
        problem = problem_from_config(load_config(args.config))
        spectrum = solve_spectrum(problem, args.modes)
        series = gain_series(problem, spectrum, args.modes)
        main_report = series
        rows.append(("series_tail_corrected", series.tail_corrected))
        rows.append(("bvp_integral", gain_bvp(problem, spectrum=spectrum).gain_C))
    values = [v for _, v in rows]
    spread = max(values) - min(values)
    print("route,gain")
    for name, value in rows:
        print(f"{name},{csvio.fmt(value)}")
    print(f"max_disagreement,{csvio.fmt(spread)}")
    print()
    print(main_report.to_kv_block())
    return 0


def cmd_sweep(args) -> int:
    zetas = np.linspace(args.zeta_min, args.zeta_max, args.points)
    table = sweep_figure1(zetas, advection_form=args.advection_form)
    csvio.write_csv(table.HEADER, table.rows(), args.output)
    sink = sys.stderr if args.output in (None, "-") else sys.stdout
    print(f"ordering_decreasing_in_a = {table.ordering_ok()}", file=sink)
    flags = table.nonincreasing_columns()
    print(f"columns_nonincreasing = {all(flags.values())}", file=sink)
    cross = table.crossovers(math.inf)
    print(f"advection_vs_dirichlet_crossovers = {len(cross)}", file=sink)
    for lo, hi in cross:
        print(f"crossover_bracket = [{csvio.fmt(lo)}, {csvio.fmt(hi)}]", file=sink)
    return 0


def _verify_from_args(args, problem, traj) -> int:
    eps = tuple(float(e) for e in args.eps.split(","))
    if args.solver == "advection":
        v, k, d_ref = args.v, args.k, args.weight_D or args.D
        envelope = IssEnvelope(decay_rate=k + v * v / (2.0 * d_ref),
                               gain_base=advection_gain(v, d_ref, k),
                               epsilon_dependent=False, max_window=1.0 / v)
    elif args.solver == "closed-loop":
        cfg = ClosedLoopConfig(D=args.D, p=args.plant_p, c=args.c)
        kn = solve_kernel(cfg, 128)
        ln = solve_inverse_kernel(cfg, 128)
        envelope = closed_loop_bound(cfg, kn.norm, ln.norm)
    else:
        envelope = IssEnvelope.from_gain_report(gain_bvp(problem))
    report = verify_iss(traj, envelope, epsilons=eps, slack=args.slack)
    csvio.write_csv(csvio.ISS_HEADER, csvio.iss_report_rows(report), args.iss_output)
    return 0 if report.passed else 2


def cmd_simulate(args) -> int:
    d = _signal_from_args(args)
    if args.solver == "advection":
        if args.disturbance == "sinusoid" and args.phase == 0.0:
            # cosine start satisfies d'(0) = 0, matching the default profile below
            d = DisturbanceSignal.sinusoid(args.amplitude, args.omega, math.pi / 2.0)
        d0 = float(d.value(np.asarray(0.0)))
        k_over_v = args.k / args.v
        y0 = lambda z: d0 * np.exp(-k_over_v * np.asarray(z))
        traj = advection_exact(args.v, args.k, d, y0, args.T,
                               resolution=args.resolution,
                               weight_D=args.weight_D or args.D, n_store=args.store)
        problem = None
    elif args.solver == "closed-loop":
        cfg = ClosedLoopConfig(D=args.D, p=args.plant_p, c=args.c, d=d)
        kernel = solve_kernel(cfg, args.resolution)
        inverse = solve_inverse_kernel(cfg, args.resolution)
        from .backstepping import apply_transform
        grid = kernel.grid
        d0 = float(d.value(np.asarray(0.0)))
        x0 = GridFunction(grid, d0 * (1.0 - grid) + 0.5 * args.amplitude * np.sin(math.pi * grid))
        y0 = apply_transform(inverse, x0)
        result = simulate_closed_loop(cfg, y0, args.dt, args.T, kernel=kernel,
                                      inverse_kernel=inverse, n_store=args.store)
        traj = result.y
        problem = None
        if args.kernel_output:
            csvio.write_csv(csvio.KERNEL_HEADER, csvio.kernel_rows(kernel),
                            args.kernel_output)
    else:
        problem = _problem_from_args(args)
        d0 = float(d.value(np.asarray(0.0)))
        x0 = _initial_state(args, problem, d0)
        if args.solver == "fd":
            traj = simulate_fd(problem, d, x0, args.dt, args.T, n_store=args.store)
        else:
            spectrum = solve_spectrum(problem, args.modes)
            if args.solver == "spectral":
                traj = simulate_spectral(problem, spectrum, d, x0, args.T,
                                         N=args.modes, n_store=args.store)
            else:
                traj = simulate_via_lifting(problem, spectrum, d, x0, args.T,
                                            N=args.modes, n_store=args.store)
    csvio.write_csv(csvio.trajectory_header(traj, args.wide),
                    csvio.trajectory_rows(traj, args.wide), args.output)
    if args.verify_iss:
        return _verify_from_args(args, problem, traj)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 3
    handlers = {"spectrum": cmd_spectrum, "gain": cmd_gain,
                "sweep-fig1": cmd_sweep, "simulate": cmd_simulate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except UncertifiedHypothesis as exc:
        print(f"uncertified hypothesis: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except IssgainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
