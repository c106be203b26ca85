"""Asymptotic behavior of the rate-demand mapping: the linear asymptote,
its dominant eigenpair, performance limits, the noise-/interference-limited
transition point, and budget sweeps of utility and efficiency.

For the rate-demand mapping the limit of T(h w)/h as h grows is linear,
G w, with G[k, l] = (ln 2 * demand_k / (W * p_k)) * v_tilde[k, l] * p_l.
Its dominant eigenvalue lam gives the utility ceiling 1/lam; T(0) under
the solve norm gives the efficiency ceiling 1/||T(0)||; their ratio
||T(0)||/lam is the transition budget separating the noise-limited from
the interference-limited regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netmodel import Coupling, Scenario, build_coupling, downlink_sif, per_bs_norm
from .sif import CevpSolution, FixedPointConfig, MonotoneNorm, SifMapping, fixed_point_solve


def asymptotic_matrix(scenario: Scenario, coupling: Coupling | None = None) -> np.ndarray:
    """Linear asymptote G of the rate-demand mapping.

    G = diag(p)^-1 Phi V~ diag(p) with Phi = (ln 2 / W) diag(demands).
    The eigenvalues of G equal those of Phi V~, independent of p.
    """
    if coupling is None:
        coupling = build_coupling(scenario)
    p = scenario.power_density
    if np.any(p <= 0):
        raise ValueError("power densities must be positive")
    phi = math.log(2.0) * scenario.demand_bps / scenario.bandwidth_hz
    return (phi / p)[:, None] * coupling.v_tilde * p[None, :]


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray
    iterations: int
    degenerate: bool


def perron_eigenpair(G: np.ndarray, tol: float = 1e-12, max_iter: int = 10_000) -> EigenPair:
    """Dominant eigenpair of a nonnegative matrix by power iteration.

    Iterates on G + mu*I (mu = max row sum) so that the chain is aperiodic
    even for periodic coupling patterns; the shift moves every eigenvalue
    by mu and leaves eigenvectors unchanged.  Starts from the all-ones
    vector and stops once the ratio bounds min_i y_i/x_i <= lam <=
    max_i y_i/x_i certify the eigenvalue to the requested relative
    tolerance (on the unshifted value).  Returns a unit-max-norm
    nonnegative vector; for an irreducible matrix this is the (strictly
    positive) Perron pair.  A zero spectral radius or a zero-entry limit
    vector sets the ``degenerate`` flag.
    """
    G = np.asarray(G, dtype=float)
    K = G.shape[0]
    if G.shape != (K, K):
        raise ValueError("G must be square")
    if np.any(G < 0):
        raise ValueError("G must be nonnegative")
    mu = float(np.max(G.sum(axis=1)))
    if mu == 0.0:
        return EigenPair(value=0.0, vector=np.ones(K), iterations=0, degenerate=True)

    x = np.ones(K)
    lam = 2.0 * mu  # shifted estimate; true value lies in (mu, 2 mu]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        y = G @ x + mu * x
        top = float(np.max(y))
        pos = x > 0
        ratios = y[pos] / x[pos]
        lo, hi = float(np.min(ratios)), float(np.max(ratios))
        x_next = y / top
        # the ratio bracket certifies the shifted eigenvalue; for an
        # irreducible matrix it closes and pins the unshifted value to the
        # requested relative tolerance
        if np.all(y[~pos] == 0.0) and hi - lo <= 2.0 * tol * max(0.5 * (lo + hi) - mu, tol):
            lam = 0.5 * (lo + hi)
            x = x_next
            break
        # matrices with vanishing limit components keep the bracket open
        # (the smaller classes hold the lower ratio); for those fall back
        # to iterate convergence with the dominant-component estimate
        done = (np.min(x_next) <= 1e-9 * np.max(x_next)
                and abs(top - lam) <= tol * max(1.0, top)
                and np.max(np.abs(x_next - x)) <= tol)
        lam, x = top, x_next
        if done:
            break

    value = lam - mu
    if value < tol:
        value = max(value, 0.0)
        return EigenPair(value=value, vector=x, iterations=iterations, degenerate=True)
    degenerate = bool(np.min(x) <= 1e-12 * np.max(x))
    return EigenPair(value=value, vector=x, iterations=iterations, degenerate=degenerate)


@dataclass
class AsymptoticReport:
    """Performance limits derived from the linear asymptote."""

    lambda_inf: float
    w_inf: np.ndarray
    sup_utility: float
    sup_efficiency: float
    theta_trans: float
    t_zero_norm: float
    degenerate: bool


def asymptotic_report(scenario: Scenario, T: SifMapping, norm: MonotoneNorm,
                      G: np.ndarray | None = None) -> AsymptoticReport:
    """Limits and transition point for a mapping with linear asymptote G.

    ``norm`` must be the norm used by the solve; it enters through
    ||T(0)||.  w_inf is normalized so that the per-cell load of the
    assignment matrix has max 1.  A zero spectral radius means the
    interference-free case: infinite transition point and unbounded
    utility.
    """
    if G is None:
        G = asymptotic_matrix(scenario)
    pair = perron_eigenpair(G)
    A = scenario.assignment_matrix()
    w_inf = pair.vector / np.max(A @ pair.vector)
    t0 = norm(np.asarray(T(np.zeros(T.dim)), dtype=float))
    if pair.value > 0.0:
        sup_utility = 1.0 / pair.value
        theta_trans = t0 / pair.value
    else:
        sup_utility = math.inf
        theta_trans = math.inf
    return AsymptoticReport(
        lambda_inf=pair.value,
        w_inf=w_inf,
        sup_utility=sup_utility,
        sup_efficiency=1.0 / t0,
        theta_trans=theta_trans,
        t_zero_norm=t0,
        degenerate=pair.degenerate,
    )


def numeric_asymptotic_limit(T: SifMapping, x, h_grid=None) -> np.ndarray:
    """Numeric estimate of the asymptote lim_h T(h x)/h along direction x.

    Evaluates T(h x)/h over an increasing grid and returns the estimate at
    the largest h.  Serves as an independent oracle for the closed-form
    asymptotic matrix.
    """
    x = np.asarray(x, dtype=float)
    if h_grid is None:
        h_grid = np.logspace(0, 6, 7)
    h_grid = np.asarray(h_grid, dtype=float)
    if np.any(h_grid <= 0) or np.any(np.diff(h_grid) <= 0):
        raise ValueError("h_grid must be positive and increasing")
    est = None
    for h in h_grid:
        est = np.asarray(T(h * x), dtype=float) / h
    return est


@dataclass
class SweepPoint:
    theta: float
    utility: float
    efficiency: float
    utility_bound: float
    efficiency_bound: float
    converged: bool


def sweep(scenario: Scenario, T: SifMapping, norm: MonotoneNorm, theta_grid,
          tol: float = 1e-9, max_iter: int = 100_000) -> list[SweepPoint]:
    """Solve the allocation problem over a budget grid.

    Records the achieved utility and efficiency per budget together with
    the theoretical ceilings min(theta/||T(0)||, 1/lam) and
    min(1/||T(0)||, 1/(lam*theta)).  Budgets above 1 are analysis
    artifacts (allocations then exceed the physical resource pool).
    Non-convergence at a point is recorded; the sweep continues.
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    if np.any(theta_grid <= 0) or np.any(np.diff(theta_grid) < 0):
        raise ValueError("theta_grid must be positive and sorted")
    report = asymptotic_report(scenario, T, norm)
    points = []
    init = None
    for theta in theta_grid:
        sol = fixed_point_solve(T, norm, FixedPointConfig(
            theta=float(theta), tol=tol, max_iter=max_iter, init=init))
        init = sol.w_star  # warm start the next budget
        lam = report.lambda_inf
        ub_u = min(theta / report.t_zero_norm,
                   1.0 / lam if lam > 0 else math.inf)
        ub_e = min(1.0 / report.t_zero_norm,
                   1.0 / (lam * theta) if lam > 0 else math.inf)
        points.append(SweepPoint(
            theta=float(theta),
            utility=sol.c_star,
            efficiency=sol.c_star / norm(sol.w_star),
            utility_bound=ub_u,
            efficiency_bound=ub_e,
            converged=sol.converged,
        ))
    return points


def solve_downlink(scenario: Scenario, theta: float = 1.0, tol: float = 1e-9,
                   max_iter: int = 100_000, init=None) -> CevpSolution:
    """Convenience wrapper: plain downlink solve under the per-cell norm."""
    T = downlink_sif(scenario)
    return fixed_point_solve(T, per_bs_norm(scenario),
                             FixedPointConfig(theta=theta, tol=tol,
                                              max_iter=max_iter, init=init))
