"""Brute-force grid oracle for the max-min satisfaction problem.

Used by the test and acceptance suites to validate the fixed-point solver
on tiny instances (at most three services).  The search is exact on the
grid: utilities are evaluated at every feasible grid point, except that
for three services the last axis is resolved by a monotone crossing
search, which finds the same grid maximum because along that axis the
last service's utility is nondecreasing while every other utility is
nonincreasing (the minimum of the two groups is single-peaked on the
grid).
"""

from __future__ import annotations

import numpy as np

from .netmodel import Scenario, build_coupling


def brute_force_maxmin(scenario: Scenario, theta: float, grid_step: float = 1e-3):
    """Grid search maximizing min_k rate_k(w)/demand_k subject to the
    per-cell load constraint.  Returns (w, utility).  Only K <= 3."""
    K = scenario.n_services
    if K > 3:
        raise ValueError("oracle supports at most 3 services")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    if theta == 0.0:
        return np.zeros(K), 0.0

    coupling = build_coupling(scenario)
    p = scenario.power_density
    a = coupling.v_tilde * p[None, :]  # interference weights
    sig = coupling.sigma_tilde
    wscale = scenario.bandwidth_hz / scenario.demand_bps  # utility = w * wscale * log2(1+SINR)
    cells = scenario.serving_cell
    m = int(round(theta / grid_step))
    axis = np.linspace(0.0, theta, m + 1)

    if K == 1:
        u = axis * wscale[0] * np.log2(1.0 + p[0] / sig[0])
        j = int(np.argmax(u))
        return np.array([axis[j]]), float(u[j])

    if K == 2:
        w1, w2 = np.meshgrid(axis, axis, indexing="ij")
        if cells[0] == cells[1]:
            feasible = w1 + w2 <= theta + 1e-12
        else:
            feasible = np.ones_like(w1, dtype=bool)
        u1 = w1 * wscale[0] * np.log2(1.0 + p[0] / (sig[0] + a[0, 1] * w2))
        u2 = w2 * wscale[1] * np.log2(1.0 + p[1] / (sig[1] + a[1, 0] * w1))
        u = np.minimum(u1, u2)
        u[~feasible] = -np.inf
        j = np.unravel_index(np.argmax(u), u.shape)
        return np.array([w1[j], w2[j]]), float(u[j])

    return _grid3(axis, theta, a, sig, p, wscale, cells)


def _grid3(axis, theta, a, sig, p, wscale, cells):
    m = axis.size - 1
    best_u = -np.inf
    best_w = np.zeros(3)
    for i1, w1 in enumerate(axis):
        # feasible range of w2 given w1
        cap2 = theta - w1 if cells[1] == cells[0] else theta
        n2 = int(np.floor(cap2 / (axis[1] - axis[0]) + 1e-9))
        if n2 < 0:
            continue
        w2 = axis[: n2 + 1]
        # upper grid index for w3 per w2 value
        cap3 = np.full(w2.shape, theta)
        if cells[2] == cells[0]:
            cap3 -= w1
        if cells[2] == cells[1]:
            cap3 -= w2
        jmax = np.floor(cap3 / (axis[1] - axis[0]) + 1e-9).astype(int)
        jmax = np.clip(jmax, 0, m)

        c3 = wscale[2] * np.log2(1.0 + p[2] / (sig[2] + a[2, 0] * w1 + a[2, 1] * w2))

        def others(j_idx):
            w3 = axis[j_idx]
            u1 = w1 * wscale[0] * np.log2(
                1.0 + p[0] / (sig[0] + a[0, 1] * w2 + a[0, 2] * w3))
            u2 = w2 * wscale[1] * np.log2(
                1.0 + p[1] / (sig[1] + a[1, 0] * w1 + a[1, 2] * w3))
            return np.minimum(u1, u2)

        # largest j with axis[j]*c3 <= others(j): binary search per w2 value
        lo = np.zeros(w2.shape, dtype=int)
        hi = jmax.copy()
        pred_hi = axis[hi] * c3 <= others(hi)
        pred_lo = axis[lo] * c3 <= others(lo)
        jstar = np.where(pred_hi, hi, -1)
        open_mask = ~pred_hi & pred_lo
        lo_s, hi_s = lo.copy(), hi.copy()
        while np.any(open_mask & (hi_s - lo_s > 1)):
            mid = (lo_s + hi_s) // 2
            pm = axis[mid] * c3 <= others(mid)
            lo_s = np.where(open_mask & pm, mid, lo_s)
            hi_s = np.where(open_mask & ~pm, mid, hi_s)
        jstar = np.where(open_mask, lo_s, jstar)

        for cand in (np.clip(jstar, 0, jmax), np.clip(jstar + 1, 0, jmax)):
            u = np.minimum(others(cand), axis[cand] * c3)
            j = int(np.argmax(u))
            if u[j] > best_u:
                best_u = float(u[j])
                best_w = np.array([w1, w2[j], axis[cand[j]]])
    return best_w, best_u
