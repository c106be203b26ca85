"""Partial resource muting for the downlink model: trigger rule,
interference-pattern update, muting-augmented load norm, bottleneck
ranking/selection strategies, and the full muting loop.

Selected bottleneck services are placed in a protected resource share:
their interference to and from neighboring cells is zeroed, and the
protected share is charged against those neighbors' budgets through an
augmented load norm.  Candidates are ranked by the components of the
asymptotic allocation (largest first) or, alternatively, by a measured
interference indicator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import AsymptoticReport, asymptotic_report
from .netmodel import Coupling, Scenario, build_coupling, downlink_sif, per_bs_norm
from .sif import CevpSolution, FixedPointConfig, LoadNorm, fixed_point_solve


def trigger(report: AsymptoticReport) -> bool:
    """Muting pays off only in the interference-limited regime: trigger
    when the transition budget lies strictly below the full budget 1."""
    return report.theta_trans < 1.0


def mute_interference(coupling: Coupling, scenario: Scenario, bottleneck_set) -> Coupling:
    """Zero the coupling between each bottleneck service and all services
    of its neighboring cells, in both directions.  Returns a copy."""
    out = coupling.copy()
    K = scenario.n_services
    for k in bottleneck_set:
        if not 0 <= k < K:
            raise ValueError(f"unknown service id {k}")
        for m in scenario.neighbors[scenario.serving_cell[k]]:
            for l in scenario.cell_services(m):
                out.v_tilde[k, l] = 0.0
                out.v_tilde[l, k] = 0.0
    return out


def muting_norm(scenario: Scenario, bottleneck_set) -> LoadNorm:
    """Load norm charging protected services to their neighbors:

        g(w) = max_n ( sum_{k served by n} |w_k|
                       + sum_{m neighbor of n} sum_{l bottleneck in m} |w_l| )

    Reduces to the per-cell norm for an empty bottleneck set.
    """
    B = scenario.assignment_matrix()
    bset = set(int(k) for k in bottleneck_set)
    for k in bset:
        if not 0 <= k < scenario.n_services:
            raise ValueError(f"unknown service id {k}")
    for n in range(scenario.n_cells):
        for m in scenario.neighbors[n]:
            for l in scenario.cell_services(m):
                if l in bset:
                    B[n, l] = 1.0
    desc = "per-cell load max" if not bset else f"muting-augmented load max {sorted(bset)}"
    return LoadNorm(B, description=desc)


def interference_indicator(scenario: Scenario, w_star) -> np.ndarray:
    """Received plus generated interference per service at allocation w:
    I_k = sum_{l != k} (p_l v[k,l] w_l + p_k v[l,k] w_k), using raw gains."""
    w = np.asarray(w_star, dtype=float)
    p = scenario.power_density
    v = scenario.gains.copy()
    np.fill_diagonal(v, 0.0)
    received = v @ (p * w)
    generated = p * w * v.sum(axis=0)
    return received + generated


@dataclass
class SelectionStrategy:
    """Bottleneck selection: 'successive' and 'indicator' walk a fixed
    ranking until the utility first drops; 'exhaustive' scores every
    subset of the top ``candidate_count`` ranked services."""

    kind: str = "successive"
    candidate_count: int = 8

    def __post_init__(self):
        if self.kind not in ("successive", "exhaustive", "indicator"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.kind == "exhaustive" and self.candidate_count < 1:
            raise ValueError("candidate_count must be >= 1")


@dataclass
class MutingStep:
    index: int
    added_service: int | None
    bottleneck_set: tuple
    utility: float
    accepted: bool


@dataclass
class MutingPlan:
    bottleneck_set: tuple
    order: list
    step_utilities: list
    steps: list
    final_solution: CevpSolution
    triggered: bool
    report: AsymptoticReport
    baseline: CevpSolution

    @property
    def utility(self) -> float:
        return self.final_solution.c_star


def run_partial_muting(scenario: Scenario,
                       strategy: SelectionStrategy | None = None,
                       solver_cfg: FixedPointConfig | None = None) -> MutingPlan:
    """Full muting loop for the downlink model at budget theta = 1.

    Solves the unrestricted problem, computes the asymptotic report, and,
    when triggered, grows/searches a bottleneck set per the strategy.  The
    returned plan always retains the best evaluated set (including the
    empty one), so its utility never falls below the unrestricted solve.
    """
    strategy = strategy or SelectionStrategy()
    cfg = solver_cfg or FixedPointConfig(theta=1.0)
    coupling = build_coupling(scenario)
    T0 = downlink_sif(scenario, coupling)
    norm0 = per_bs_norm(scenario)
    baseline = fixed_point_solve(T0, norm0, cfg)
    report = asymptotic_report(scenario, T0, norm0)

    def solve_for(bset, init):
        muted = mute_interference(coupling, scenario, bset)
        T = downlink_sif(scenario, muted)
        norm = muting_norm(scenario, bset)
        step_cfg = FixedPointConfig(theta=cfg.theta, tol=cfg.tol,
                                    max_iter=cfg.max_iter, init=init)
        return fixed_point_solve(T, norm, step_cfg)

    return _muting_loop(scenario, strategy, baseline, report, solve_for)


def _muting_loop(scenario, strategy, baseline, report, solve_for) -> MutingPlan:
    """Shared selection loop; ``solve_for(bottleneck_set, init)`` solves
    the modified problem and returns a CevpSolution."""
    steps = [MutingStep(index=0, added_service=None, bottleneck_set=(),
                        utility=baseline.c_star, accepted=True)]
    if not trigger(report):
        return MutingPlan(bottleneck_set=(), order=[], step_utilities=[baseline.c_star],
                          steps=steps, final_solution=baseline, triggered=False,
                          report=report, baseline=baseline)

    if strategy.kind == "indicator":
        scores = interference_indicator(scenario, baseline.w_star)
    else:
        scores = report.w_inf
    # descending score, ties broken by lower service index
    order = sorted(range(scenario.n_services), key=lambda k: (-scores[k], k))

    if strategy.kind == "exhaustive":
        return _exhaustive(scenario, strategy, baseline, report, solve_for, order, steps)

    best_set, best_sol = (), baseline
    prev_utility = baseline.c_star
    init = baseline.w_star
    utilities = [baseline.c_star]
    for n, k in enumerate(order, start=1):
        bset = tuple(order[:n])
        sol = solve_for(bset, init)
        utility = sol.c_star if sol.converged else -np.inf
        init = sol.w_star
        utilities.append(utility)
        if utility < prev_utility:
            steps.append(MutingStep(n, k, bset, utility, accepted=False))
            break
        best_set, best_sol = bset, sol
        prev_utility = utility
        steps.append(MutingStep(n, k, bset, utility, accepted=True))
    return MutingPlan(bottleneck_set=best_set, order=order, step_utilities=utilities,
                      steps=steps, final_solution=best_sol, triggered=True,
                      report=report, baseline=baseline)


def _exhaustive(scenario, strategy, baseline, report, solve_for, order, steps):
    m = min(strategy.candidate_count, scenario.n_services)
    candidates = order[:m]
    best_set, best_sol = (), baseline
    utilities = [baseline.c_star]
    index = 0
    for mask in range(1, 1 << m):
        bset = tuple(candidates[i] for i in range(m) if mask & (1 << i))
        sol = solve_for(bset, None)
        utility = sol.c_star if sol.converged else -np.inf
        utilities.append(utility)
        index += 1
        accepted = utility > best_sol.c_star
        steps.append(MutingStep(index, None, bset, utility, accepted=accepted))
        if accepted:
            best_set, best_sol = bset, sol
    return MutingPlan(bottleneck_set=best_set, order=order, step_utilities=utilities,
                      steps=steps, final_solution=best_sol, triggered=True,
                      report=report, baseline=baseline)
