"""Network scenario model: cells, services, channel gains, SINR and rates,
the rate-demand interference mapping, the per-cell load norm, plus a
synthetic scenario generator and file IO.

Units: bandwidth in Hz, power and noise spectral densities in Watt/Hz,
demands in bit/s, channel gains linear and dimensionless.  Allocations w
are resource fractions per service.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .sif import LoadNorm, SifMapping

DOWNLINK = "d"
UPLINK = "u"


class ScenarioError(ValueError):
    """Raised when a scenario violates its structural invariants."""


@dataclass
class Scenario:
    """Static network instance.

    serving_cell maps each service k to its cell; gains[k, l] is the linear
    channel gain from the transmitter of service l to the receiver of
    service k (gains[k, k] is the direct link); neighbors holds a symmetric,
    irreflexive cell adjacency; duplex_mode is 'd' or 'u' per service.
    """

    n_cells: int
    serving_cell: np.ndarray
    bandwidth_hz: float
    power_density: np.ndarray
    demand_bps: np.ndarray
    gains: np.ndarray
    noise_density: np.ndarray
    neighbors: tuple
    duplex_mode: tuple

    def __post_init__(self):
        self.serving_cell = np.asarray(self.serving_cell, dtype=int)
        self.power_density = np.asarray(self.power_density, dtype=float)
        self.demand_bps = np.asarray(self.demand_bps, dtype=float)
        self.gains = np.asarray(self.gains, dtype=float)
        self.noise_density = np.asarray(self.noise_density, dtype=float)
        self.neighbors = tuple(frozenset(s) for s in self.neighbors)
        self.duplex_mode = tuple(self.duplex_mode)
        self.validate()

    @property
    def n_services(self) -> int:
        return self.serving_cell.shape[0]

    def validate(self):
        K, N = self.n_services, self.n_cells
        if N < 1 or K < 1:
            raise ScenarioError("need at least one cell and one service")
        if self.serving_cell.min() < 0 or self.serving_cell.max() >= N:
            raise ScenarioError("serving_cell: cell index out of range")
        served = set(self.serving_cell.tolist())
        if served != set(range(N)):
            missing = sorted(set(range(N)) - served)
            raise ScenarioError(f"cells without services: {missing}")
        if not self.bandwidth_hz > 0:
            raise ScenarioError("bandwidth_hz must be positive")
        for name, v in (("powers", self.power_density),
                        ("demands", self.demand_bps),
                        ("noise", self.noise_density)):
            if v.shape != (K,):
                raise ScenarioError(f"{name}: expected length {K}")
            if np.any(~np.isfinite(v)) or np.any(v <= 0):
                raise ScenarioError(f"{name}: entries must be finite and positive")
        if self.gains.shape != (K, K):
            raise ScenarioError(f"gains: expected {K}x{K} matrix")
        if np.any(~np.isfinite(self.gains)) or np.any(self.gains < 0):
            raise ScenarioError("gains: entries must be finite and nonnegative")
        if np.any(np.diag(self.gains) <= 0):
            raise ScenarioError("gains: direct-link gains gains[k,k] must be positive")
        if len(self.neighbors) != N:
            raise ScenarioError(f"neighbors: expected {N} adjacency sets")
        for n, adj in enumerate(self.neighbors):
            if n in adj:
                raise ScenarioError(f"neighbors: cell {n} lists itself")
            for m in adj:
                if not 0 <= m < N:
                    raise ScenarioError(f"neighbors: cell index {m} out of range")
                if n not in self.neighbors[m]:
                    raise ScenarioError(f"neighbors: relation not symmetric ({n}, {m})")
        if len(self.duplex_mode) != K:
            raise ScenarioError(f"modes: expected length {K}")
        if any(m not in (UPLINK, DOWNLINK) for m in self.duplex_mode):
            raise ScenarioError("modes: entries must be 'u' or 'd'")

    def assignment_matrix(self) -> np.ndarray:
        """Cell-to-service assignment A with A[n, k] = 1 iff cell n serves k."""
        A = np.zeros((self.n_cells, self.n_services))
        A[self.serving_cell, np.arange(self.n_services)] = 1.0
        return A

    def cell_services(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.serving_cell == n)

    def equals(self, other: "Scenario") -> bool:
        return (self.n_cells == other.n_cells
                and np.array_equal(self.serving_cell, other.serving_cell)
                and self.bandwidth_hz == other.bandwidth_hz
                and np.array_equal(self.power_density, other.power_density)
                and np.array_equal(self.demand_bps, other.demand_bps)
                and np.array_equal(self.gains, other.gains)
                and np.array_equal(self.noise_density, other.noise_density)
                and self.neighbors == other.neighbors
                and self.duplex_mode == other.duplex_mode)


@dataclass
class Coupling:
    """Normalized interference matrix and noise: v_tilde[k, l] =
    gains[k, l]/gains[k, k] off the diagonal (zero diagonal), and
    sigma_tilde[k] = noise[k]/gains[k, k]."""

    v_tilde: np.ndarray
    sigma_tilde: np.ndarray

    def copy(self) -> "Coupling":
        return Coupling(self.v_tilde.copy(), self.sigma_tilde.copy())


def build_coupling(scenario: Scenario) -> Coupling:
    d = np.diag(scenario.gains)
    v_tilde = scenario.gains / d[:, None]
    np.fill_diagonal(v_tilde, 0.0)
    sigma_tilde = scenario.noise_density / d
    return Coupling(v_tilde=v_tilde, sigma_tilde=sigma_tilde)


def sinr(w, coupling: Coupling, p) -> np.ndarray:
    """SINR_k = p_k / [V~ diag(p) w + sigma~]_k."""
    w = np.asarray(w, dtype=float)
    p = np.asarray(p, dtype=float)
    denom = coupling.v_tilde @ (p * w) + coupling.sigma_tilde
    return p / denom


def rate(w, coupling: Coupling, p, bandwidth_hz) -> np.ndarray:
    """Achievable rate r_k = w_k * W * log2(1 + SINR_k(w)) in bit/s."""
    w = np.asarray(w, dtype=float)
    return w * bandwidth_hz * np.log2(1.0 + sinr(w, coupling, p))


class RateDemandSif(SifMapping):
    """Interference mapping T_k(w) = demand_k / (W log2(1 + SINR_k(w))).

    T_k(w) is the resource fraction service k would need to meet its
    demand at the spectral efficiency induced by allocation w, so the
    utility w_k / T_k(w) equals the satisfaction ratio rate_k(w)/demand_k.
    The SINR uses the (possibly masked or muted) coupling matrix held by
    the instance.
    """

    def __init__(self, coupling: Coupling, p, bandwidth_hz, demand_bps):
        self.coupling = coupling
        self.p = np.asarray(p, dtype=float)
        self.bandwidth_hz = float(bandwidth_hz)
        self.demand_bps = np.asarray(demand_bps, dtype=float)
        self.dim = self.p.shape[0]
        # precomputed V~ diag(p) keeps the solver inner loop to one matvec
        self._vp = self.coupling.v_tilde * self.p[None, :]

    def __call__(self, w):
        denom = self._vp @ np.asarray(w, dtype=float) + self.coupling.sigma_tilde
        se = self.bandwidth_hz * np.log2(1.0 + self.p / denom)
        return self.demand_bps / se


def downlink_sif(scenario: Scenario, coupling: Coupling | None = None) -> RateDemandSif:
    """Rate-demand mapping of the downlink model (optionally with a
    pre-modified coupling, e.g. after muting)."""
    if coupling is None:
        coupling = build_coupling(scenario)
    return RateDemandSif(coupling, scenario.power_density,
                         scenario.bandwidth_hz, scenario.demand_bps)


def per_bs_norm(scenario: Scenario) -> LoadNorm:
    """Per-cell load norm g(w) = max_n sum_{k served by n} |w_k|."""
    return LoadNorm(scenario.assignment_matrix(), description="per-cell load max")


# ---------------------------------------------------------------------------
# Synthetic scenario generation
# ---------------------------------------------------------------------------

@dataclass
class GeneratorParams:
    """Knobs for the synthetic hex-grid scenario generator.

    Cell sites sit on a hexagonal lattice with spacing 1.3x the cell
    radius (dense deployment, so the default neighbor threshold of 1.5x
    the radius captures adjacent sites).  Users are dropped uniformly in
    a disk around their nominal site and attached to the cell with the
    strongest received power (per-cell powers can be scaled through
    ``cell_power_factors`` for mixed macro/pico layouts).  The reference
    gain defaults to a value calibrated so that a cell-edge user sees
    roughly 10 dB SNR without interference.  ``serving_fade_fraction``
    puts a deep fade (``serving_fade_db``) on the serving link of a
    random subset of services, emulating degraded direct paths.
    """

    n_cells: int = 7
    services_per_cell: tuple = (2, 4)
    cell_radius_m: float = 250.0
    pathloss_exponent: float = 3.7
    min_distance_m: float = 10.0
    reference_gain: float | None = None
    shadowing_db: float = 0.0
    demand_range_bps: tuple = (0.0, 10e6)
    power_density: float = 1e-6
    uplink_power_density: float = 1e-7
    noise_density: float = 4e-21
    bandwidth_hz: float = 10e6
    neighbor_threshold_m: float | None = None
    uplink_fraction: float | tuple = 0.0
    cell_power_factors: tuple | None = None
    serving_fade_fraction: float = 0.0
    serving_fade_db: float = 13.0
    seed: int = 0
    max_retries: int = 50

    def __post_init__(self):
        lo, hi = self.services_per_cell
        if not (1 <= lo <= hi):
            raise ValueError("services_per_cell must be a range with 1 <= lo <= hi")
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        for name in ("cell_radius_m", "pathloss_exponent", "min_distance_m",
                     "power_density", "uplink_power_density", "noise_density",
                     "bandwidth_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.demand_range_bps[0] < self.demand_range_bps[1]:
            raise ValueError("demand_range_bps must be a nonempty range")
        if not 0 <= self.serving_fade_fraction <= 1:
            raise ValueError("serving_fade_fraction must lie in [0, 1]")
        if self.cell_power_factors is not None:
            factors = np.asarray(self.cell_power_factors, dtype=float)
            if factors.shape != (self.n_cells,) or not np.all(factors > 0):
                raise ValueError("cell_power_factors needs one positive "
                                 "entry per cell")

    def resolved_reference_gain(self) -> float:
        if self.reference_gain is not None:
            return self.reference_gain
        # 10 dB SNR at cell edge: G0 * R^-eta * p / noise = 10
        return (10.0 * self.noise_density
                * self.cell_radius_m ** self.pathloss_exponent
                / self.power_density)

    def resolved_neighbor_threshold(self) -> float:
        if self.neighbor_threshold_m is not None:
            return self.neighbor_threshold_m
        return 1.5 * self.cell_radius_m


def _hex_sites(n_cells: int, spacing: float) -> np.ndarray:
    """Centers of a hex spiral: origin first, then rings outward."""
    sites = [(0.0, 0.0)]
    ring = 1
    while len(sites) < n_cells:
        # walk the hexagon of the current ring corner by corner
        x, y = ring * spacing, 0.0
        angles = np.arange(6) * math.pi / 3.0
        corners = [(ring * spacing * math.cos(a), ring * spacing * math.sin(a))
                   for a in angles]
        for i in range(6):
            cx, cy = corners[i]
            nx, ny = corners[(i + 1) % 6]
            for step in range(ring):
                t = step / ring
                sites.append((cx + t * (nx - cx), cy + t * (ny - cy)))
        ring += 1
    return np.asarray(sites[:n_cells])


def _pathloss_gain(d: np.ndarray, params: GeneratorParams) -> np.ndarray:
    d = np.maximum(d, params.min_distance_m)
    return params.resolved_reference_gain() * d ** (-params.pathloss_exponent)


def generate_scenario(params: GeneratorParams) -> Scenario:
    """Draw a reproducible synthetic scenario from the given parameters.

    Retries internally (fresh draws from the same stream) when the
    strongest-cell attachment leaves some cell without services.
    """
    rng = np.random.default_rng(params.seed)
    spacing = 1.3 * params.cell_radius_m
    sites = _hex_sites(params.n_cells, spacing)
    threshold = params.resolved_neighbor_threshold()

    neighbors = [set() for _ in range(params.n_cells)]
    for n in range(params.n_cells):
        for m in range(n + 1, params.n_cells):
            if np.linalg.norm(sites[n] - sites[m]) <= threshold:
                neighbors[n].add(m)
                neighbors[m].add(n)

    for _ in range(params.max_retries):
        lo, hi = params.services_per_cell
        counts = rng.integers(lo, hi + 1, size=params.n_cells)
        K = int(counts.sum())
        home = np.repeat(np.arange(params.n_cells), counts)
        radii = params.cell_radius_m * np.sqrt(rng.uniform(0.0, 1.0, K))
        angles = rng.uniform(0.0, 2.0 * math.pi, K)
        users = sites[home] + np.stack([radii * np.cos(angles),
                                        radii * np.sin(angles)], axis=1)

        # attach to the site with the strongest received power (equal to
        # strongest gain for uniform cell powers); shadowing per link
        d_user_site = np.linalg.norm(users[:, None, :] - sites[None, :, :], axis=2)
        g_user_site = _pathloss_gain(d_user_site, params)
        if params.shadowing_db > 0:
            g_user_site = g_user_site * 10.0 ** (
                rng.normal(0.0, params.shadowing_db, g_user_site.shape) / 10.0)
        if params.cell_power_factors is None:
            factors = np.ones(params.n_cells)
        else:
            factors = np.asarray(params.cell_power_factors, dtype=float)
        serving = np.argmax(g_user_site * factors[None, :], axis=1)
        if set(serving.tolist()) != set(range(params.n_cells)):
            continue

        modes = _draw_modes(rng, serving, params)
        p = np.where(np.array(modes) == UPLINK,
                     params.uplink_power_density,
                     params.power_density * factors[serving])

        # transmitter/receiver positions per service
        tx = np.where((np.array(modes) == UPLINK)[:, None], users, sites[serving])
        rx = np.where((np.array(modes) == UPLINK)[:, None], sites[serving], users)
        d_kl = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=2)
        gains = _pathloss_gain(d_kl, params)
        if params.shadowing_db > 0:
            gains = gains * 10.0 ** (
                rng.normal(0.0, params.shadowing_db, gains.shape) / 10.0)
        # intra-cell, same-mode links are orthogonal in this model
        same_cell = serving[:, None] == serving[None, :]
        same_mode = (np.array(modes)[:, None] == np.array(modes)[None, :])
        off = same_cell & same_mode & ~np.eye(K, dtype=bool)
        gains[off] = 0.0

        # a fraction of services sees a deep fade on its serving link only
        # (degraded beam or blocked direct path), drawn after attachment
        if params.serving_fade_fraction > 0:
            faded = rng.uniform(0.0, 1.0, K) < params.serving_fade_fraction
            idx = np.flatnonzero(faded)
            gains[idx, idx] *= 10.0 ** (-params.serving_fade_db / 10.0)

        demands = rng.uniform(*params.demand_range_bps, K)
        demands = np.maximum(demands, 1.0)  # demands must stay positive

        return Scenario(
            n_cells=params.n_cells,
            serving_cell=serving,
            bandwidth_hz=params.bandwidth_hz,
            power_density=p,
            demand_bps=demands,
            gains=gains,
            noise_density=np.full(K, params.noise_density),
            neighbors=tuple(frozenset(s) for s in neighbors),
            duplex_mode=tuple(modes),
        )
    raise ScenarioError(
        f"could not place services in every cell after {params.max_retries} tries")


def _draw_modes(rng, serving, params: GeneratorParams):
    frac = params.uplink_fraction
    K = serving.shape[0]
    if np.isscalar(frac):
        per_cell = np.full(int(serving.max()) + 1, float(frac))
    else:
        per_cell = np.asarray(frac, dtype=float)
    draws = rng.uniform(0.0, 1.0, K)
    return [UPLINK if draws[k] < per_cell[serving[k]] else DOWNLINK
            for k in range(K)]


# ---------------------------------------------------------------------------
# Scenario file IO (JSON schema, documented in the README)
# ---------------------------------------------------------------------------

_SCHEMA_FIELDS = ("cells", "services", "bandwidth_hz", "neighbors", "gains",
                  "noise", "demands", "powers", "modes")


def save_scenario(scenario: Scenario, path) -> None:
    doc = {
        "cells": scenario.n_cells,
        "services": scenario.serving_cell.tolist(),
        "bandwidth_hz": scenario.bandwidth_hz,
        "neighbors": [sorted(s) for s in scenario.neighbors],
        "gains": scenario.gains.tolist(),
        "noise": scenario.noise_density.tolist(),
        "demands": scenario.demand_bps.tolist(),
        "powers": scenario.power_density.tolist(),
        "modes": list(scenario.duplex_mode),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"not a valid scenario document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    missing = [f for f in _SCHEMA_FIELDS if f not in doc]
    if missing:
        raise ScenarioError(f"missing fields: {', '.join(missing)}")
    try:
        return Scenario(
            n_cells=int(doc["cells"]),
            serving_cell=np.asarray(doc["services"], dtype=int),
            bandwidth_hz=float(doc["bandwidth_hz"]),
            power_density=np.asarray(doc["powers"], dtype=float),
            demand_bps=np.asarray(doc["demands"], dtype=float),
            gains=np.asarray(doc["gains"], dtype=float),
            noise_density=np.asarray(doc["noise"], dtype=float),
            neighbors=tuple(frozenset(int(m) for m in s) for s in doc["neighbors"]),
            duplex_mode=tuple(doc["modes"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario document: {exc}") from exc
