"""Fixed-point iterations for standard interference (SI) mappings.

A mapping T: R_+^K -> R_++^K is a standard interference mapping if every
coordinate function is (i) monotone, p >= q implies T(p) >= T(q), and
(ii) scalable, alpha * T(p) > T(alpha * p) for every alpha > 1.  For such
mappings the plain iteration p <- T(p) converges to the unique fixed point
whenever one exists, and the normalized iteration p <- (P / ||T(p)||) T(p)
always converges for any monotone norm and budget P > 0.

This module implements both iterations with convergence/divergence
diagnostics, plus a sampling-based checker for the SI axioms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "IterationStatus",
    "InterferenceMapping",
    "IterationTrace",
    "NormKind",
    "MonotoneNormSpec",
    "SiViolation",
    "SiAxiomReport",
    "iterate_fixed_point",
    "iterate_normalized_fixed_point",
    "check_si_axioms",
    "as_power_vector",
]

# Default stopping rule: relative l2 step size, chosen so that desk-scale
# residual floors sit well below the certificate tolerances.
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
# Powers are noise-normalized (unit noise); iterates of an infeasible
# instance grow without bound and are cut off here.
DEFAULT_DIVERGENCE_CAP = 1e9
# Window for the secondary divergence test: residuals that never decrease
# while the iterate norm keeps growing indicate an empty fixed-point set.
_STAGNATION_WINDOW = 50


class IterationStatus(str, enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class InterferenceMapping:
    """A candidate SI mapping: `eval` takes and returns a positive length-K vector."""

    dimension: int
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return self.eval(p)


@dataclass
class IterationTrace:
    """Record of one fixed-point run: iterates, step residuals and outcome."""

    iterates: list[np.ndarray]
    residuals: np.ndarray  # ||p_{n+1} - p_n||_2, one entry per step
    status: IterationStatus

    @property
    def p(self) -> np.ndarray:
        """Final iterate (the fixed point when status is `converged`)."""
        return self.iterates[-1]

    @property
    def n_iterations(self) -> int:
        return len(self.residuals)


class NormKind(str, enum.Enum):
    L1 = "l1"
    WEIGHTED_LINF = "weighted-linf"


@dataclass(frozen=True)
class MonotoneNormSpec:
    """Monotone norm used by the normalized iteration.

    `weighted-linf` evaluates max_k p_k / w_k, so a budget P encodes the
    per-user caps p_k <= w_k * P.  Weights default to all ones.
    """

    kind: NormKind
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or np.any(w <= 0):
                raise ValueError("norm weights must be a 1-d strictly positive array")
            object.__setattr__(self, "weights", w)

    @classmethod
    def l1(cls) -> "MonotoneNormSpec":
        return cls(NormKind.L1)

    @classmethod
    def linf(cls, weights: np.ndarray | None = None) -> "MonotoneNormSpec":
        return cls(NormKind.WEIGHTED_LINF, weights)

    def __call__(self, p: np.ndarray) -> float:
        p = np.abs(np.asarray(p, dtype=float))
        if self.kind is NormKind.L1:
            return float(p.sum())
        w = self.weights
        if w is not None:
            if w.shape != p.shape:
                raise ValueError("norm weights do not match vector length")
            p = p / w
        return float(p.max())


def as_power_vector(p, dimension: int | None = None) -> np.ndarray:
    """Validate and copy a power vector: 1-d, finite, strictly positive."""
    p = np.array(p, dtype=float)
    if p.ndim != 1:
        raise ValueError("power vector must be one-dimensional")
    if dimension is not None and p.shape[0] != dimension:
        raise ValueError(f"power vector has length {p.shape[0]}, expected {dimension}")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise ValueError("power vector entries must be finite and strictly positive")
    return p


def _check_scalar(name: str, value: float) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive")
    return value


def iterate_fixed_point(
    mapping: InterferenceMapping,
    p0: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    divergence_cap: float = DEFAULT_DIVERGENCE_CAP,
) -> IterationTrace:
    """Run p <- T(p) from p0 until the relative l2 step drops below `tol`.

    Returns `converged` once ||p_{n+1} - p_n||_2 <= tol * ||p_n||_2, in which
    case the final iterate satisfies ||p - T(p)||_2 <= tol * ||p||_2 as well.
    Returns `diverged` if any coordinate exceeds `divergence_cap`, or if the
    residuals stop decreasing over a long window while the iterate norm keeps
    growing (both symptoms of an empty fixed-point set, e.g. infeasible SINR
    targets).  Otherwise returns `max-iterations`.
    """
    p = as_power_vector(p0, mapping.dimension)
    tol = float(tol)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    _check_scalar("divergence_cap", divergence_cap)
    iterates = [p.copy()]
    residuals: list[float] = []
    status = IterationStatus.MAX_ITERATIONS
    for _ in range(int(max_iter)):
        q = np.asarray(mapping.eval(p), dtype=float)
        if q.shape != p.shape:
            raise ValueError("mapping output dimension does not match input")
        r = float(np.linalg.norm(q - p))
        residuals.append(r)
        iterates.append(q.copy())
        if np.any(q > divergence_cap):
            status = IterationStatus.DIVERGED
            break
        if r <= tol * np.linalg.norm(p):
            status = IterationStatus.CONVERGED
            break
        w = _STAGNATION_WINDOW
        if (
            len(residuals) > w
            and residuals[-1] >= residuals[-1 - w] > 0
            and np.linalg.norm(iterates[-1]) > np.linalg.norm(iterates[-1 - w])
        ):
            status = IterationStatus.DIVERGED
            break
        p = q
    return IterationTrace(iterates, np.asarray(residuals), status)


def iterate_normalized_fixed_point(
    mapping: InterferenceMapping,
    norm: MonotoneNormSpec,
    budget: float,
    p0: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> IterationTrace:
    """Run p <- (budget / ||T(p)||) * T(p); never diverges.

    The fixed point p* satisfies ||p*|| = budget exactly and is the least
    element of the solution set of the associated max-min problem.
    """
    p = as_power_vector(p0, mapping.dimension)
    budget = _check_scalar("budget", budget)
    tol = float(tol)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    iterates = [p.copy()]
    residuals: list[float] = []
    status = IterationStatus.MAX_ITERATIONS
    for _ in range(int(max_iter)):
        t = np.asarray(mapping.eval(p), dtype=float)
        if t.shape != p.shape:
            raise ValueError("mapping output dimension does not match input")
        q = (budget / norm(t)) * t
        r = float(np.linalg.norm(q - p))
        residuals.append(r)
        iterates.append(q.copy())
        if r <= tol * np.linalg.norm(p):
            status = IterationStatus.CONVERGED
            break
        p = q
    return IterationTrace(iterates, np.asarray(residuals), status)


@dataclass(frozen=True)
class SiViolation:
    kind: str  # "monotonicity" or "scalability"
    point: np.ndarray
    other: np.ndarray | float  # the comparison point (monotonicity) or alpha
    margin: float  # relative size of the violation


@dataclass
class SiAxiomReport:
    violations: list[SiViolation] = field(default_factory=list)
    comparisons: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_si_axioms(
    mapping: InterferenceMapping,
    samples: int,
    rng_seed: int,
    rel_tol: float = 1e-9,
    low: float = 1e-2,
    high: float = 1e4,
) -> SiAxiomReport:
    """Sample-test the SI axioms; returns a report of violations.

    `samples` counts pairwise comparisons, split evenly between monotonicity
    (ordered pairs p >= q) and scalability (alpha > 1 along rays).  To keep
    the number of mapping evaluations low, points are drawn in coordinatewise
    increasing chains (resp. rays), and all ordered pairs within a chain are
    compared.  Coordinates are drawn log-uniformly from [low, high].
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    K = mapping.dimension
    report = SiAxiomReport()
    n_mono = samples // 2
    n_scal = samples - n_mono
    if samples >= 5000:
        chain_len = 101
    elif samples >= 200:
        chain_len = 51
    else:
        chain_len = max(2, int(np.ceil((1 + np.sqrt(1 + 8 * samples)) / 2)))

    def log_uniform(size):
        return np.exp(rng.uniform(np.log(low), np.log(high), size=size))

    def run_chain(points: list[np.ndarray], budget: int, kind: str) -> int:
        values = [np.asarray(mapping.eval(x), dtype=float) for x in points]
        done = 0
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                if done >= budget:
                    return done
                fi, fj = values[i], values[j]
                if kind == "monotonicity":
                    # points[j] >= points[i], so need f_j >= f_i
                    scale = np.maximum(np.maximum(fi, fj), 1e-300)
                    margin = float(((fi - fj) / scale).max())
                    if margin > rel_tol:
                        report.violations.append(
                            SiViolation(kind, points[j], points[i], margin)
                        )
                else:
                    # points[j] = alpha * points[i]; need alpha * f_i > f_j
                    alpha = float(points[j][0] / points[i][0])
                    scale = np.maximum(alpha * fi, 1e-300)
                    margin = float(((fj - alpha * fi) / scale).max())
                    if margin > rel_tol:
                        report.violations.append(
                            SiViolation(kind, points[i], alpha, margin)
                        )
                done += 1
        return done

    # modest per-step growth keeps the sampled powers in a range where the
    # axiom margins of genuine SI maps dominate floating-point noise
    remaining = n_mono
    while remaining > 0:
        base = log_uniform(K)
        factors = rng.uniform(1.0, 1.1, size=(chain_len - 1, K))
        chain = [base]
        for f in factors:
            chain.append(chain[-1] * f)
        remaining -= run_chain(chain, remaining, "monotonicity")
    remaining = n_scal
    while remaining > 0:
        base = log_uniform(K)
        alphas = np.cumprod(rng.uniform(1.005, 1.1, size=chain_len - 1))
        ray = [base] + [a * base for a in alphas]
        remaining -= run_chain(ray, remaining, "scalability")
    report.comparisons = n_mono + n_scal
    return report
