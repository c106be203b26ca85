"""Standard interference functions, monotone norms, and the normalized
fixed-point solver for conditional eigenvalue problems.

A mapping T on the nonnegative orthant is a standard interference function
(SIF) when it is strictly positive, monotone (x <= y implies T(x) <= T(y))
and scalable (alpha > 1 implies alpha*T(x) > T(alpha*x)).  For such a T, a
monotone norm ||.|| and a budget theta > 0, the conditional eigenvalue
problem asks for (w, c) with T(w) = w/c and ||w|| = theta; w then solves the
max-min utility problem with utilities u_k(w) = w_k / T_k(w), and all
utilities are equal to c at the solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SifMapping:
    """Base class for vector interference mappings.

    Subclasses implement ``__call__`` taking a nonnegative vector of length
    ``dim`` and returning a strictly positive vector of the same length.
    Instances are immutable after construction and safe to evaluate from
    concurrent solver runs.
    """

    dim: int

    def __call__(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LinearSif(SifMapping):
    """Affine mapping w -> G w + b with G nonnegative.

    Strictly positive b makes this a proper SIF; with b = 0 positivity
    fails, which is useful for exercising the axiom checker.
    """

    def __init__(self, G, b=None):
        self.G = np.asarray(G, dtype=float)
        self.dim = self.G.shape[0]
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=float)

    def __call__(self, w):
        return self.G @ np.asarray(w, dtype=float) + self.b


class ConstantSif(SifMapping):
    """Constant mapping w -> t with t strictly positive."""

    def __init__(self, t):
        self.t = np.asarray(t, dtype=float)
        self.dim = self.t.shape[0]

    def __call__(self, w):
        return self.t.copy()


class MonotoneNorm:
    """Base class for monotone norms on length-``dim`` vectors."""

    dim: int
    description: str = "norm"

    def __call__(self, w: np.ndarray) -> float:
        raise NotImplementedError


class LoadNorm(MonotoneNorm):
    """Weighted group max norm  w -> max_n sum_k B[n, k] |w_k|.

    B must be nonnegative with at least one positive entry per column,
    which guarantees the norm axioms.  With B the cell-to-service
    assignment matrix this is the per-cell load constraint norm; adding
    rows/entries for protected services yields the muting-augmented norm.
    """

    def __init__(self, B, description="per-cell load max"):
        self.B = np.asarray(B, dtype=float)
        if self.B.ndim != 2:
            raise ValueError("B must be a matrix")
        if np.any(self.B < 0):
            raise ValueError("B must be nonnegative")
        if np.any(self.B.sum(axis=0) <= 0):
            raise ValueError("every column of B needs a positive entry")
        self.dim = self.B.shape[1]
        self.description = description

    def __call__(self, w):
        return float(np.max(self.B @ np.abs(np.asarray(w, dtype=float))))


def max_norm(dim):
    """Plain componentwise max norm (one group per component)."""
    return LoadNorm(np.eye(dim), description="componentwise max")


@dataclass
class FixedPointConfig:
    """Settings for the normalized fixed-point iteration."""

    theta: float = 1.0
    tol: float = 1e-9
    max_iter: int = 100_000
    init: np.ndarray | None = None

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class CevpSolution:
    """Result of a conditional eigenvalue solve."""

    w_star: np.ndarray
    c_star: float
    iterations: int
    residual: float
    converged: bool

    def utilities(self, T: SifMapping) -> np.ndarray:
        return per_service_utilities(self.w_star, T)


def fixed_point_solve(T: SifMapping, norm: MonotoneNorm, cfg: FixedPointConfig) -> CevpSolution:
    """Solve the conditional eigenvalue problem by normalized iterations.

    Iterates w <- (theta / ||T(w)||) T(w) until the max-abs distance
    between successive iterates drops to ``cfg.tol`` or ``cfg.max_iter``
    is reached.  Every iterate after the first satisfies ||w|| = theta by
    construction.  Non-convergence is reported through the ``converged``
    flag rather than raised, so large sweeps never abort.
    """
    K = T.dim
    if norm.dim != K:
        raise ValueError("norm dimension does not match mapping dimension")
    if cfg.init is not None:
        w = np.asarray(cfg.init, dtype=float).copy()
        if w.shape != (K,):
            raise ValueError("init has wrong shape")
        if np.any(w < 0):
            raise ValueError("init must be nonnegative")
    else:
        u = np.ones(K)
        w = (cfg.theta / norm(u)) * u

    residual = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iter + 1):
        t = np.asarray(T(w), dtype=float)
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise ValueError("mapping produced a nonpositive or non-finite value")
        w_next = (cfg.theta / norm(t)) * t
        residual = float(np.max(np.abs(w_next - w)))
        w = w_next
        if residual <= cfg.tol:
            converged = True
            break

    c_star = cfg.theta / norm(np.asarray(T(w), dtype=float))
    return CevpSolution(w_star=w, c_star=float(c_star), iterations=iterations,
                        residual=residual, converged=converged)


def per_service_utilities(w, T: SifMapping) -> np.ndarray:
    """Utilities u_k = w_k / T_k(w)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (T.dim,):
        raise ValueError("allocation dimension does not match mapping")
    return w / np.asarray(T(w), dtype=float)


@dataclass
class AxiomViolation:
    axiom: str
    x: np.ndarray
    y: np.ndarray | None = None
    alpha: float | None = None


@dataclass
class AxiomReport:
    """Outcome of randomized SIF axiom checks."""

    samples: int
    positivity_violations: list = field(default_factory=list)
    monotonicity_violations: list = field(default_factory=list)
    scalability_violations: list = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return (len(self.positivity_violations)
                + len(self.monotonicity_violations)
                + len(self.scalability_violations))

    @property
    def ok(self) -> bool:
        return self.total_violations == 0


def check_sif_axioms(T: SifMapping, sample_count: int = 1000, seed: int = 0,
                     scale: float = 2.0) -> AxiomReport:
    """Randomized check of the SIF axioms; report-only, never raises.

    Draws pairs x <= y of nonnegative vectors and scalars alpha > 1, and
    records every witnessed violation of strict positivity, monotonicity
    (componentwise) or scalability (strict componentwise inequality).
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    report = AxiomReport(samples=sample_count)
    for _ in range(sample_count):
        x = rng.uniform(0.0, scale, T.dim)
        y = x + rng.uniform(0.0, scale, T.dim)
        alpha = 1.0 + rng.uniform(0.1, 3.0)
        tx = np.asarray(T(x), dtype=float)
        ty = np.asarray(T(y), dtype=float)
        tax = np.asarray(T(alpha * x), dtype=float)
        if np.any(tx <= 0) or np.any(ty <= 0):
            report.positivity_violations.append(AxiomViolation("positivity", x, y))
        if np.any(tx > ty):
            report.monotonicity_violations.append(AxiomViolation("monotonicity", x, y))
        if np.any(alpha * tx <= tax):
            report.scalability_violations.append(AxiomViolation("scalability", x, alpha=alpha))
    return report
