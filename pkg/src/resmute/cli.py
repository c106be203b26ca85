"""Command-line harness.

Subcommands: generate, solve, analyze, sweep, mute, flexduplex,
montecarlo, oracle.  All file outputs are CSV (plus a plain-text run
manifest for batch runs); runs are fully deterministic given the seed.

Budgets above 1 are allowed in sweeps as analysis artifacts even though
physical allocations are capped at a full resource pool.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .asymptotics import asymptotic_report, solve_downlink, sweep
from .flexduplex import SafpConfig, frozen_c_asymptotics, run_flexduplex_muting, safp
from .montecarlo import (DOWNLINK_PROTOCOLS, FLEX_PROTOCOLS, MonteCarloConfig,
                         montecarlo, write_csv, write_manifest, write_summary)
from .muting import SelectionStrategy, run_partial_muting
from .netmodel import (GeneratorParams, ScenarioError, downlink_sif,
                       generate_scenario, load_scenario, per_bs_norm,
                       save_scenario)
from .oracle import brute_force_maxmin
from .sif import FixedPointConfig


def _add_generator_args(p):
    p.add_argument("--cells", type=int, default=7, help="number of cells")
    p.add_argument("--services-min", type=int, default=2)
    p.add_argument("--services-max", type=int, default=4)
    p.add_argument("--radius", type=float, default=250.0, help="cell radius in m")
    p.add_argument("--demand-max", type=float, default=10e6,
                   help="upper end of the uniform demand range in bit/s")
    p.add_argument("--ul-fraction", type=str, default="0",
                   help="uplink service fraction: scalar or comma list per cell")
    p.add_argument("--shadowing-db", type=float, default=0.0)
    p.add_argument("--fade-fraction", type=float, default=0.0,
                   help="fraction of services with a deep serving-link fade")
    p.add_argument("--fade-db", type=float, default=13.0)
    p.add_argument("--power-factors", type=str, default=None,
                   help="comma list of per-cell power scale factors")
    p.add_argument("--seed", type=int, default=0)


def _generator_params(args) -> GeneratorParams:
    frac = args.ul_fraction
    ul = (tuple(float(x) for x in frac.split(","))
          if "," in frac else float(frac))
    return GeneratorParams(
        n_cells=args.cells,
        services_per_cell=(args.services_min, args.services_max),
        cell_radius_m=args.radius,
        demand_range_bps=(0.0, args.demand_max),
        shadowing_db=args.shadowing_db,
        uplink_fraction=ul,
        serving_fade_fraction=args.fade_fraction,
        serving_fade_db=args.fade_db,
        cell_power_factors=(None if args.power_factors is None else
                            tuple(float(x) for x in args.power_factors.split(","))),
        seed=args.seed,
    )


def _strategy(args) -> SelectionStrategy:
    return SelectionStrategy(args.strategy, args.candidates)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resmute",
                                 description="max-min allocation with muting")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic scenario file")
    _add_generator_args(p)
    p.add_argument("--out", required=True, help="scenario output path")

    p = sub.add_parser("solve", help="max-min solve at a given budget")
    p.add_argument("--scenario", required=True)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="allocation CSV output path")

    p = sub.add_parser("analyze", help="asymptotic limits and transition point")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", help="CSV output path")

    p = sub.add_parser("sweep", help="utility/efficiency over a budget grid")
    p.add_argument("--scenario", required=True)
    p.add_argument("--theta-min", type=float, default=1e-2)
    p.add_argument("--theta-max", type=float, default=1e2)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", required=True, help="CSV output path")

    p = sub.add_parser("mute", help="downlink partial resource muting")
    p.add_argument("--scenario", required=True)
    p.add_argument("--strategy", choices=("successive", "exhaustive", "indicator"),
                   default="successive")
    p.add_argument("--candidates", type=int, default=8,
                   help="candidate pool size for exhaustive search")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="per-step CSV output path")

    p = sub.add_parser("flexduplex", help="joint UL/DL solve with restarts")
    p.add_argument("--scenario", required=True)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--muting", action="store_true",
                   help="run the muting loop on top of the restart solver")
    p.add_argument("--strategy", choices=("successive", "exhaustive", "indicator"),
                   default="successive")
    p.add_argument("--candidates", type=int, default=8)
    p.add_argument("--out", help="per-restart CSV output path")

    p = sub.add_parser("montecarlo", help="batch of randomized trials")
    _add_generator_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--flex", action="store_true", help="joint UL/DL protocols")
    p.add_argument("--protocols", type=str, default=None,
                   help="comma list; default: all for the selected mode")
    p.add_argument("--candidates", type=int, default=8)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("oracle", help="brute-force grid search (K <= 3)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)

    return ap


def cmd_generate(args) -> int:
    scenario = generate_scenario(_generator_params(args))
    save_scenario(scenario, args.out)
    print(f"wrote {args.out}: {scenario.n_cells} cells, "
          f"{scenario.n_services} services")
    return 0


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    sol = solve_downlink(scenario, theta=args.theta, tol=args.tol)
    print(f"utility: {sol.c_star:.10g}")
    print(f"iterations: {sol.iterations}  converged: {sol.converged}")
    if args.out:
        write_csv(args.out, ["service", "cell", "allocation", "utility"],
                  [[k, int(scenario.serving_cell[k]), sol.w_star[k], sol.c_star]
                   for k in range(scenario.n_services)])
        print(f"wrote {args.out}")
    return 0


def cmd_analyze(args) -> int:
    scenario = load_scenario(args.scenario)
    T = downlink_sif(scenario)
    report = asymptotic_report(scenario, T, per_bs_norm(scenario))
    print(f"lambda_inf: {report.lambda_inf:.10g}")
    print(f"theta_trans: {report.theta_trans:.10g}")
    print(f"sup_utility: {report.sup_utility:.10g}")
    print(f"sup_efficiency: {report.sup_efficiency:.10g}")
    if report.degenerate:
        print("note: reducible or interference-free coupling; "
              "asymptotic vector may contain zeros")
    if args.out:
        write_csv(args.out,
                  ["lambda_inf", "theta_trans", "sup_utility", "sup_efficiency"],
                  [[report.lambda_inf, report.theta_trans,
                    report.sup_utility, report.sup_efficiency]])
        print(f"wrote {args.out}")
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    T = downlink_sif(scenario)
    grid = np.logspace(np.log10(args.theta_min), np.log10(args.theta_max),
                       args.points)
    points = sweep(scenario, T, per_bs_norm(scenario), grid, tol=args.tol)
    write_csv(args.out,
              ["theta", "utility", "efficiency", "utility_bound",
               "efficiency_bound", "converged"],
              [[pt.theta, pt.utility, pt.efficiency, pt.utility_bound,
                pt.efficiency_bound, int(pt.converged)] for pt in points])
    print(f"wrote {args.out} ({len(points)} points)")
    return 0


def cmd_mute(args) -> int:
    scenario = load_scenario(args.scenario)
    plan = run_partial_muting(scenario, _strategy(args),
                              FixedPointConfig(theta=1.0, tol=args.tol))
    print(f"triggered: {plan.triggered}  "
          f"theta_trans: {plan.report.theta_trans:.6g}")
    print(f"baseline utility: {plan.baseline.c_star:.10g}")
    print(f"plan utility: {plan.utility:.10g}")
    print(f"bottleneck services: {list(plan.bottleneck_set)}")
    if args.out:
        write_csv(args.out, ["step", "added_service", "utility", "accepted"],
                  [[s.index, -1 if s.added_service is None else s.added_service,
                    s.utility, int(s.accepted)] for s in plan.steps])
        print(f"wrote {args.out}")
    return 0


def cmd_flexduplex(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = SafpConfig(restarts=args.restarts, eps=args.eps, seed=args.seed,
                     inner=FixedPointConfig(theta=1.0, tol=args.tol))
    if args.muting:
        plan = run_flexduplex_muting(scenario, _strategy(args), cfg)
        print(f"triggered: {plan.triggered}")
        print(f"baseline utility: {plan.baseline.c_star:.10g}")
        print(f"plan utility: {plan.utility:.10g}")
        print(f"bottleneck services: {list(plan.bottleneck_set)}")
        if args.out:
            write_csv(args.out, ["step", "added_service", "utility", "accepted"],
                      [[s.index, -1 if s.added_service is None else s.added_service,
                        s.utility, int(s.accepted)] for s in plan.steps])
            print(f"wrote {args.out}")
        return 0
    result = safp(scenario, cfg)
    report = frozen_c_asymptotics(scenario, result.best.c_hat)
    print(f"best utility: {result.utility:.10g} (restart {result.best_index})")
    print(f"theta_trans (frozen overlaps): {report.theta_trans:.6g}")
    if args.out:
        write_csv(args.out, ["restart", "outer_iterations", "utility", "converged"],
                  [[r.index, r.outer_iterations, r.utility, int(r.converged)]
                   for r in result.restarts])
        print(f"wrote {args.out}")
    return 0


def cmd_montecarlo(args) -> int:
    if args.protocols:
        protocols = tuple(args.protocols.split(","))
    else:
        protocols = FLEX_PROTOCOLS if args.flex else DOWNLINK_PROTOCOLS
    cfg = MonteCarloConfig(
        trials=args.trials, seed=args.seed, generator=_generator_params(args),
        theta=args.theta, tol=args.tol, protocols=protocols, flex=args.flex,
        candidate_count=args.candidates, restarts=args.restarts, eps=args.eps)
    manifest_args = {k: v for k, v in vars(args).items() if k != "command"}
    write_manifest(args.out, "montecarlo", manifest_args, ["status: running"])
    summary = montecarlo(cfg)
    written = write_summary(summary, args.out)
    write_manifest(args.out, "montecarlo", manifest_args,
                   [f"status: done, {len(summary.failed_trials)} failed trials"]
                   + [f"failed_trial: {t} {msg}" for t, msg in summary.failed_trials])
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    w, utility = brute_force_maxmin(scenario, args.theta, args.step)
    print(f"utility: {utility:.10g}")
    print(f"allocation: {np.array2string(w, precision=6)}")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "mute": cmd_mute,
    "flexduplex": cmd_flexduplex,
    "montecarlo": cmd_montecarlo,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"cannot read file: {exc}", file=sys.stderr)
        return 4
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
