"""Monte Carlo batches over randomly generated scenarios.

Each trial draws a scenario from a per-trial seed (master seed + trial
index, so serial and parallel execution agree), runs the selected
protocols, and records their achieved utilities.  Results are emitted as
CSV: one row per trial, an empirical CDF per protocol, and, for duplex
batches, per-bin mean utilities versus inter-cell traffic distance.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import solve_downlink
from .flexduplex import (SafpConfig, fixed_split_solve, mean_traffic_distance,
                         model_utility, run_flexduplex_muting, safp)
from .muting import SelectionStrategy, run_partial_muting
from .netmodel import GeneratorParams, Scenario, generate_scenario
from .sif import FixedPointConfig

DOWNLINK_PROTOCOLS = ("nonmuting", "successive", "exhaustive", "indicator")
FLEX_PROTOCOLS = ("fixed-split", "safp", "winf-muting", "indicator-muting")


@dataclass
class MonteCarloConfig:
    trials: int = 100
    seed: int = 0
    generator: GeneratorParams = field(default_factory=GeneratorParams)
    theta: float = 1.0
    tol: float = 1e-8
    max_iter: int = 100_000
    protocols: tuple = DOWNLINK_PROTOCOLS
    flex: bool = False
    candidate_count: int = 8
    restarts: int = 4
    eps: float = 1e-6
    distance_bins: int = 3
    max_failure_fraction: float = 0.1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        known = FLEX_PROTOCOLS if self.flex else DOWNLINK_PROTOCOLS
        bad = [p for p in self.protocols if p not in known]
        if bad:
            raise ValueError(f"unknown protocols {bad}; pick from {known}")


@dataclass
class MonteCarloSummary:
    config: MonteCarloConfig
    utilities: dict            # protocol -> array (NaN for failed trials)
    trial_seeds: np.ndarray
    traffic_distances: np.ndarray
    failed_trials: list

    def cdf(self, protocol: str):
        """Sorted utilities with empirical CDF levels (failures dropped)."""
        u = self.utilities[protocol]
        u = np.sort(u[~np.isnan(u)])
        levels = np.arange(1, u.size + 1) / u.size
        return u, levels

    def binned_means(self):
        """Mean utility per protocol over equal-width traffic-distance bins."""
        d = self.traffic_distances
        ok = ~np.isnan(d)
        lo, hi = float(d[ok].min()), float(d[ok].max())
        if hi <= lo:
            hi = lo + 1e-12
        edges = np.linspace(lo, hi, self.config.distance_bins + 1)
        rows = []
        for b in range(self.config.distance_bins):
            mask = ok & (d >= edges[b]) & (d <= edges[b + 1] if b == self.config.distance_bins - 1
                                           else d < edges[b + 1])
            row = {"bin": b, "d_mean": float(d[mask].mean()) if mask.any() else np.nan,
                   "count": int(mask.sum())}
            for proto, u in self.utilities.items():
                vals = u[mask]
                vals = vals[~np.isnan(vals)]
                row[proto] = float(vals.mean()) if vals.size else np.nan
            rows.append(row)
        return rows


def _run_trial_downlink(scenario: Scenario, cfg: MonteCarloConfig) -> dict:
    out = {}
    solver_cfg = FixedPointConfig(theta=cfg.theta, tol=cfg.tol, max_iter=cfg.max_iter)
    if "nonmuting" in cfg.protocols:
        out["nonmuting"] = solve_downlink(scenario, theta=cfg.theta,
                                          tol=cfg.tol, max_iter=cfg.max_iter).c_star
    if "successive" in cfg.protocols:
        out["successive"] = run_partial_muting(
            scenario, SelectionStrategy("successive"), solver_cfg).utility
    if "exhaustive" in cfg.protocols:
        out["exhaustive"] = run_partial_muting(
            scenario, SelectionStrategy("exhaustive", cfg.candidate_count),
            solver_cfg).utility
    if "indicator" in cfg.protocols:
        out["indicator"] = run_partial_muting(
            scenario, SelectionStrategy("indicator"), solver_cfg).utility
    return out


def _run_trial_flex(scenario: Scenario, cfg: MonteCarloConfig, trial_seed: int) -> dict:
    out = {}
    inner = FixedPointConfig(theta=cfg.theta, tol=cfg.tol, max_iter=cfg.max_iter)
    safp_cfg = SafpConfig(restarts=cfg.restarts, eps=cfg.eps, inner=inner,
                          seed=trial_seed)
    if "fixed-split" in cfg.protocols:
        w_fix, _ = fixed_split_solve(scenario, theta=cfg.theta, tol=cfg.tol,
                                     max_iter=cfg.max_iter)
        # score the static split under the common overlap interference model
        out["fixed-split"] = model_utility(w_fix, scenario)
    if "safp" in cfg.protocols:
        out["safp"] = safp(scenario, safp_cfg).utility
    if "winf-muting" in cfg.protocols:
        out["winf-muting"] = run_flexduplex_muting(
            scenario, SelectionStrategy("successive"), safp_cfg).utility
    if "indicator-muting" in cfg.protocols:
        out["indicator-muting"] = run_flexduplex_muting(
            scenario, SelectionStrategy("indicator"), safp_cfg).utility
    return out


def montecarlo(cfg: MonteCarloConfig) -> MonteCarloSummary:
    """Run the batch; individual trial failures are recorded and skipped,
    and the whole batch aborts only when too many trials fail."""
    utilities = {p: np.full(cfg.trials, np.nan) for p in cfg.protocols}
    seeds = np.arange(cfg.trials) + cfg.seed
    distances = np.full(cfg.trials, np.nan)
    failed = []
    for t in range(cfg.trials):
        params = dataclasses.replace(cfg.generator, seed=int(seeds[t]))
        try:
            scenario = generate_scenario(params)
            distances[t] = mean_traffic_distance(scenario)
            res = (_run_trial_flex(scenario, cfg, int(seeds[t])) if cfg.flex
                   else _run_trial_downlink(scenario, cfg))
        except (ValueError, RuntimeError) as exc:
            failed.append((t, str(exc)))
            if len(failed) > cfg.max_failure_fraction * cfg.trials:
                raise RuntimeError(
                    f"{len(failed)} of {t + 1} trials failed; aborting") from exc
            continue
        for proto, u in res.items():
            utilities[proto][t] = u
    return MonteCarloSummary(config=cfg, utilities=utilities, trial_seeds=seeds,
                             traffic_distances=distances, failed_trials=failed)


# ---------------------------------------------------------------------------
# CSV emission (comma separated, header row, '.' decimals, LF endings)
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_summary(summary: MonteCarloSummary, outdir) -> list:
    """Emit trials.csv, one CDF file per protocol, and (duplex batches)
    binned.csv.  Returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = summary.config
    written = []

    header = ["trial", "seed"]
    if cfg.flex:
        header.append("traffic_distance")
    header += list(cfg.protocols)
    rows = []
    for t in range(cfg.trials):
        row = [t, int(summary.trial_seeds[t])]
        if cfg.flex:
            row.append(summary.traffic_distances[t])
        row += [summary.utilities[p][t] for p in cfg.protocols]
        rows.append(row)
    path = outdir / "trials.csv"
    write_csv(path, header, rows)
    written.append(path)

    for proto in cfg.protocols:
        u, levels = summary.cdf(proto)
        path = outdir / f"cdf_{proto.replace('-', '_')}.csv"
        write_csv(path, ["utility", "cdf"], list(zip(u, levels)))
        written.append(path)

    if cfg.flex:
        rows = summary.binned_means()
        header = ["bin", "d_mean", "count"] + list(cfg.protocols)
        path = outdir / "binned.csv"
        write_csv(path, header,
                  [[r["bin"], r["d_mean"], r["count"]] + [r[p] for p in cfg.protocols]
                   for r in rows])
        written.append(path)
    return written


def write_manifest(outdir, command: str, args: dict, extra=None) -> Path:
    """Plain-text run manifest: command, inputs, seeds, versions."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "manifest.txt"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"command: {command}\n")
        fh.write(f"resmute_version: {__version__}\n")
        fh.write(f"numpy_version: {np.__version__}\n")
        for key in sorted(args):
            fh.write(f"{key}: {args[key]}\n")
        for line in extra or []:
            fh.write(line.rstrip("\n") + "\n")
    return path
