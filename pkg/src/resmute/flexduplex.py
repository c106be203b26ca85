"""Joint uplink/downlink allocation with inter-mode interference.

Cross-link interference between uplink and downlink transmissions is
modeled through load-overlap factors: the chance that resources of two
services collide depends on how full their cells are in the respective
duplex modes.  The resulting coupled problem may have several fixed
points, so it is solved by successive approximation with random restarts:
freeze the overlap matrix, solve the resulting well-behaved problem, and
refresh the overlaps until the allocation stops moving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import AsymptoticReport, asymptotic_matrix, asymptotic_report
from .muting import MutingPlan, SelectionStrategy, _muting_loop, mute_interference, muting_norm
from .netmodel import (DOWNLINK, UPLINK, Coupling, RateDemandSif, Scenario,
                       build_coupling, per_bs_norm)
from .sif import CevpSolution, FixedPointConfig, LoadNorm, fixed_point_solve


@dataclass
class LoadVector:
    """Per-cell resource occupancy by duplex mode."""

    uplink: np.ndarray
    downlink: np.ndarray

    def for_service(self, scenario: Scenario, k: int) -> float:
        n = scenario.serving_cell[k]
        return (self.uplink[n] if scenario.duplex_mode[k] == UPLINK
                else self.downlink[n])


def loads(w, scenario: Scenario) -> LoadVector:
    """Sum the allocation over each cell's services, split by mode."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("allocation must be nonnegative")
    up = np.zeros(scenario.n_cells)
    down = np.zeros(scenario.n_cells)
    for k in range(scenario.n_services):
        n = scenario.serving_cell[k]
        if scenario.duplex_mode[k] == UPLINK:
            up[n] += w[k]
        else:
            down[n] += w[k]
    return LoadVector(uplink=up, downlink=down)


def overlap_matrix(w, scenario: Scenario) -> np.ndarray:
    """Overlap factors c[k, l] in [0, 1] for allocation w.

    Cross-mode pairs overlap only when the two loads jointly exceed a full
    resource pool: c = [(nu_l + nu_k - 1)/nu_k]^+.  Same-mode pairs align,
    c = min(1, nu_l/nu_k).  Here nu_l is the load of l's cell in l's mode
    and nu_k that of k's cell in k's mode; a zero receiving-side load
    gives c = 0 (service k occupies nothing, overlap is vacuous).
    """
    lv = loads(w, scenario)
    K = scenario.n_services
    nu = np.array([lv.for_service(scenario, k) for k in range(K)])
    same_mode = np.array([[scenario.duplex_mode[k] == scenario.duplex_mode[l]
                           for l in range(K)] for k in range(K)])
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = (nu[None, :] + nu[:, None] - 1.0) / nu[:, None]
        same = nu[None, :] / nu[:, None]
    C = np.where(same_mode, np.minimum(1.0, same), np.maximum(0.0, cross))
    C[nu == 0.0, :] = 0.0
    C = np.clip(C, 0.0, 1.0)
    np.fill_diagonal(C, 1.0)
    return C


def imi_sinr(w, scenario: Scenario, C, coupling: Coupling | None = None) -> np.ndarray:
    """SINR with overlap-masked coupling: p / [(C o V~) diag(p) w + sigma~]."""
    if coupling is None:
        coupling = build_coupling(scenario)
    w = np.asarray(w, dtype=float)
    p = scenario.power_density
    masked = np.asarray(C, dtype=float) * coupling.v_tilde
    denom = masked @ (p * w) + coupling.sigma_tilde
    return p / denom


def frozen_sif(scenario: Scenario, C, coupling: Coupling | None = None) -> RateDemandSif:
    """Rate-demand mapping with a fixed overlap matrix.  With constant C
    the masked coupling is just another nonnegative matrix, so the mapping
    keeps all interference-function properties."""
    if coupling is None:
        coupling = build_coupling(scenario)
    masked = Coupling(v_tilde=np.asarray(C, dtype=float) * coupling.v_tilde,
                      sigma_tilde=coupling.sigma_tilde)
    return RateDemandSif(masked, scenario.power_density,
                         scenario.bandwidth_hz, scenario.demand_bps)


def model_utility(w, scenario: Scenario, coupling: Coupling | None = None) -> float:
    """Worst-case satisfaction ratio under the self-consistent overlap
    model: min_k w_k W log2(1 + SINR_k(w; C(w))) / demand_k."""
    if coupling is None:
        coupling = build_coupling(scenario)
    w = np.asarray(w, dtype=float)
    C = overlap_matrix(w, scenario)
    s = imi_sinr(w, scenario, C, coupling)
    rates = w * scenario.bandwidth_hz * np.log2(1.0 + s)
    return float(np.min(rates / scenario.demand_bps))


@dataclass
class SafpConfig:
    """Restart count, outer stopping distance, inner solver settings."""

    restarts: int = 8
    eps: float = 1e-6
    outer_max_iter: int = 200
    inner: FixedPointConfig = field(default_factory=FixedPointConfig)
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass
class SafpRestart:
    index: int
    w_init: np.ndarray
    w: np.ndarray
    c_hat: np.ndarray
    utility: float
    outer_iterations: int
    converged: bool


@dataclass
class SafpResult:
    restarts: list
    best_index: int

    @property
    def best(self) -> SafpRestart:
        return self.restarts[self.best_index]

    @property
    def utility(self) -> float:
        return self.best.utility

    @property
    def w_star(self) -> np.ndarray:
        return self.best.w


def safp(scenario: Scenario, cfg: SafpConfig | None = None,
         coupling: Coupling | None = None, norm=None) -> SafpResult:
    """Successive approximation of a fixed point with random restarts.

    Per restart: draw a strictly positive start allocation scaled to the
    budget, freeze the overlap matrix, solve the frozen problem with the
    normalized fixed-point iteration, refresh the overlaps, and repeat
    until the allocation moves by at most ``eps`` (max-abs) or the outer
    cap is hit.  The restart with the highest utility wins; ties go to the
    lowest restart index.  Raises if every restart fails.
    """
    cfg = cfg or SafpConfig()
    if coupling is None:
        coupling = build_coupling(scenario)
    if norm is None:
        norm = per_bs_norm(scenario)
    theta = cfg.inner.theta
    records = []
    for z in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + z)
        w0 = rng.uniform(0.0, 1.0, scenario.n_services)
        w0 = np.maximum(w0, 1e-12)
        w0 = (theta / norm(w0)) * w0
        w = w0
        converged = False
        outer = 0
        sol = None
        for outer in range(1, cfg.outer_max_iter + 1):
            C = overlap_matrix(w, scenario)
            T = frozen_sif(scenario, C, coupling)
            inner_cfg = FixedPointConfig(theta=theta, tol=cfg.inner.tol,
                                         max_iter=cfg.inner.max_iter, init=w)
            sol = fixed_point_solve(T, norm, inner_cfg)
            if not sol.converged:
                break
            dist = float(np.max(np.abs(sol.w_star - w)))
            w = sol.w_star
            if dist <= cfg.eps:
                converged = True
                break
        utility = sol.c_star if (sol is not None and converged) else -np.inf
        records.append(SafpRestart(
            index=z, w_init=w0, w=w,
            c_hat=overlap_matrix(w, scenario),
            utility=utility, outer_iterations=outer, converged=converged))
    ok = [r for r in records if r.converged]
    if not ok:
        raise RuntimeError("every restart of the successive approximation failed")
    best = max(ok, key=lambda r: (r.utility, -r.index))
    return SafpResult(restarts=records, best_index=best.index)


def frozen_c_asymptotics(scenario: Scenario, c_hat,
                         coupling: Coupling | None = None,
                         norm=None) -> AsymptoticReport:
    """Asymptotic report for the mapping with frozen overlap matrix."""
    if coupling is None:
        coupling = build_coupling(scenario)
    if norm is None:
        norm = per_bs_norm(scenario)
    masked = Coupling(v_tilde=np.asarray(c_hat, dtype=float) * coupling.v_tilde,
                      sigma_tilde=coupling.sigma_tilde)
    T = frozen_sif(scenario, c_hat, coupling)
    G = asymptotic_matrix(scenario, masked)
    return asymptotic_report(scenario, T, norm, G=G)


def run_flexduplex_muting(scenario: Scenario,
                          strategy: SelectionStrategy | None = None,
                          safp_cfg: SafpConfig | None = None) -> MutingPlan:
    """Muting loop with the restart solver as the inner engine.

    The trigger and the bottleneck ranking come from the asymptotics of
    the baseline solution's converged overlap matrix; coupling updates and
    the augmented norm are applied exactly as in the downlink loop.
    """
    strategy = strategy or SelectionStrategy()
    cfg = safp_cfg or SafpConfig()
    coupling = build_coupling(scenario)
    base = safp(scenario, cfg, coupling=coupling)
    baseline = CevpSolution(w_star=base.w_star, c_star=base.utility,
                            iterations=base.best.outer_iterations,
                            residual=0.0, converged=True)
    report = frozen_c_asymptotics(scenario, base.best.c_hat, coupling=coupling)

    def solve_for(bset, init):
        muted = mute_interference(coupling, scenario, bset)
        norm = muting_norm(scenario, bset)
        try:
            res = safp(scenario, cfg, coupling=muted, norm=norm)
        except RuntimeError:
            return CevpSolution(w_star=np.zeros(scenario.n_services),
                                c_star=-np.inf, iterations=0,
                                residual=np.inf, converged=False)
        return CevpSolution(w_star=res.w_star, c_star=res.utility,
                            iterations=res.best.outer_iterations,
                            residual=0.0, converged=True)

    return _muting_loop(scenario, strategy, baseline, report, solve_for)


def fixed_split_solve(scenario: Scenario, theta: float = 1.0,
                      uplink_share: float = 0.5, tol: float = 1e-9,
                      max_iter: int = 100_000):
    """Static-split baseline: reserve a fixed share of every cell's budget
    for uplink and the rest for downlink, and solve the two single-mode
    problems independently (no cross-mode interference by construction).

    Returns (w, utility) with utility the worse of the two sub-solves.
    """
    if not 0.0 < uplink_share < 1.0:
        raise ValueError("uplink_share must lie strictly between 0 and 1")
    coupling = build_coupling(scenario)
    K = scenario.n_services
    modes = np.array(scenario.duplex_mode)
    A = scenario.assignment_matrix()
    w = np.zeros(K)
    utility = np.inf
    for mode, share in ((UPLINK, uplink_share), (DOWNLINK, 1.0 - uplink_share)):
        idx = np.flatnonzero(modes == mode)
        if idx.size == 0:
            continue
        sub = Coupling(v_tilde=coupling.v_tilde[np.ix_(idx, idx)],
                       sigma_tilde=coupling.sigma_tilde[idx])
        T = RateDemandSif(sub, scenario.power_density[idx],
                          scenario.bandwidth_hz, scenario.demand_bps[idx])
        norm = LoadNorm(A[:, idx][A[:, idx].sum(axis=1) > 0],
                        description=f"per-cell load max ({mode})")
        sol = fixed_point_solve(T, norm, FixedPointConfig(
            theta=share * theta, tol=tol, max_iter=max_iter))
        w[idx] = sol.w_star
        utility = min(utility, sol.c_star)
    return w, float(utility)


@dataclass
class TrafficProfile:
    """Normalized per-cell (uplink, downlink) demand shares."""

    shares: np.ndarray  # shape (N, 2), rows sum to 1

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "TrafficProfile":
        shares = np.zeros((scenario.n_cells, 2))
        for k in range(scenario.n_services):
            n = scenario.serving_cell[k]
            col = 0 if scenario.duplex_mode[k] == UPLINK else 1
            shares[n, col] += scenario.demand_bps[k]
        totals = shares.sum(axis=1, keepdims=True)
        totals[totals == 0.0] = 1.0
        return cls(shares=shares / totals)


def traffic_distance(profile: TrafficProfile) -> np.ndarray:
    """Pairwise Euclidean distances between per-cell demand shares."""
    d = profile.shares
    return np.linalg.norm(d[:, None, :] - d[None, :, :], axis=2)


def mean_traffic_distance(scenario: Scenario) -> float:
    """Mean off-diagonal traffic distance; 0 for a single cell."""
    D = traffic_distance(TrafficProfile.from_scenario(scenario))
    n = D.shape[0]
    if n < 2:
        return 0.0
    return float(D.sum() / (n * (n - 1)))
