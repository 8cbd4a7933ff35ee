"""Joint long-term power control and beamforming solvers, plus baselines.

Every solver is a composition of the fixed-point engine with a utility
evaluation: the mapping sent to the engine is

    T(p)_k = gamma_k * p_k / SINR_k(design(p), p),

where design(p) is the MSE-optimal beamformer family of the scenario at
power p (the utility SINR_k is then the maximum over the information-
constrained class, so every coordinate of T is a standard interference
function).  Sum-power targets run the plain iteration and may diverge when
the targets are infeasible; max-min problems run the normalized iteration
with the max-norm budget and always converge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import (
    MRC_LSFD,
    BeamformerDesign,
    design_for_scenario,
    factored_uatf_stats,
    lsfd_optimize,
    mrc,
    per_ap_moments,
    realize_design,
    scale_moments,
    stats_for_design,
)
from .fixed_point import (
    InterferenceMapping,
    IterationStatus,
    IterationTrace,
    MonotoneNormSpec,
    as_power_vector,
    iterate_fixed_point,
    iterate_normalized_fixed_point,
)
from .metrics import UatfStats, coherent_rates, uatf_sinr_all
from .network import CENTRALIZED, DISTRIBUTED, ChannelBatch, CsiView, NetworkInstance, build_csi

__all__ = [
    "SolveResult",
    "ShortTermResult",
    "scenario_mapping",
    "fixed_stats_mapping",
    "solve_sum_power",
    "solve_max_min",
    "solve_power_only_maxmin",
    "solve_short_term_maxmin",
    "solve_lsfd_maxmin",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500


@dataclass
class SolveResult:
    """Outcome of one long-term solve.

    On divergence (infeasible sum-power targets) `p` holds the last iterate
    and the design/stats/rate fields are None.
    """

    method: str
    scenario: str
    trace: IterationTrace
    p: np.ndarray
    design: BeamformerDesign | None = None
    stats: UatfStats | None = None
    sinr: np.ndarray | None = None
    rates: np.ndarray | None = None

    @property
    def converged(self) -> bool:
        return self.trace.status is IterationStatus.CONVERGED

    @property
    def min_rate(self) -> float:
        return float(self.rates.min())


def _gammas(gammas, K) -> np.ndarray:
    g = np.asarray(gammas, dtype=float)
    if g.shape != (K,):
        raise ValueError(f"gammas must have shape ({K},)")
    if np.any(g <= 0):
        raise ValueError("gammas must be strictly positive")
    return g


def scenario_mapping(
    inst: NetworkInstance, csi: CsiView, gammas: np.ndarray
) -> InterferenceMapping:
    """Interference mapping whose evaluation redesigns the beamformers at p."""
    gammas = _gammas(gammas, inst.K)

    def eval_map(p: np.ndarray) -> np.ndarray:
        design = design_for_scenario(csi, inst, p)
        stats = stats_for_design(design, csi, inst)
        return gammas * p / uatf_sinr_all(stats, p)

    return InterferenceMapping(inst.K, eval_map)


def fixed_stats_mapping(stats: UatfStats, gammas: np.ndarray) -> InterferenceMapping:
    """Power-only mapping for frozen beamformers (fixed UatF moments)."""
    K = stats.n_users
    gammas = _gammas(gammas, K)

    def eval_map(p: np.ndarray) -> np.ndarray:
        return gammas * p / uatf_sinr_all(stats, p)

    return InterferenceMapping(K, eval_map)


def _finalize(
    method: str,
    inst: NetworkInstance,
    csi: CsiView,
    trace: IterationTrace,
) -> SolveResult:
    p = trace.p
    if trace.status is not IterationStatus.CONVERGED:
        return SolveResult(method, inst.scenario, trace, p)
    design = design_for_scenario(csi, inst, p)
    stats = stats_for_design(design, csi, inst)
    sinr = uatf_sinr_all(stats, p)
    return SolveResult(
        method, inst.scenario, trace, p, design, stats, sinr, np.log2(1.0 + sinr)
    )


def solve_sum_power(
    inst: NetworkInstance,
    batch: ChannelBatch,
    gammas: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    p0: np.ndarray | None = None,
    divergence_cap: float = 1e9,
) -> SolveResult:
    """Minimize total power subject to per-user UatF SINR targets `gammas`.

    Alternates the scenario-optimal beamformer redesign with the power update
    p_k <- gamma_k p_k / SINR_k, i.e. plain fixed-point iterations on the
    induced mapping.  Infeasible targets yield a `diverged` result rather
    than an exception, with constraints met with equality on convergence.
    """
    csi = build_csi(batch, inst)
    mapping = scenario_mapping(inst, csi, gammas)
    if p0 is None:
        p0 = np.ones(inst.K)
    trace = iterate_fixed_point(
        mapping, as_power_vector(p0, inst.K), tol, max_iter, divergence_cap
    )
    return _finalize("sum-power", inst, csi, trace)


def solve_max_min(
    inst: NetworkInstance,
    batch: ChannelBatch,
    gammas: np.ndarray,
    budget: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    p0: np.ndarray | None = None,
) -> SolveResult:
    """Maximize the minimum weighted UatF SINR under per-user budget `budget`.

    Runs normalized fixed-point iterations (max-norm projection after each
    interference-mapping evaluation); at the fixed point the weighted SINRs
    are balanced and max_k p_k equals the budget exactly.
    """
    csi = build_csi(batch, inst)
    mapping = scenario_mapping(inst, csi, gammas)
    if p0 is None:
        p0 = np.full(inst.K, float(budget))
    trace = iterate_normalized_fixed_point(
        mapping, MonotoneNormSpec.linf(), budget, as_power_vector(p0, inst.K), tol, max_iter
    )
    return _finalize("joint", inst, csi, trace)


def solve_power_only_maxmin(
    inst: NetworkInstance,
    batch: ChannelBatch,
    gammas: np.ndarray,
    budget: float,
    fixed_design: BeamformerDesign | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveResult:
    """Max-min power control with beamformers frozen at full power.

    The default frozen design is the scenario-optimal one at p = budget * 1;
    only the power vector is iterated against its fixed UatF moments.
    """
    csi = build_csi(batch, inst)
    if fixed_design is None:
        fixed_design = design_for_scenario(csi, inst, np.full(inst.K, float(budget)))
    stats = stats_for_design(fixed_design, csi, inst)
    mapping = fixed_stats_mapping(stats, gammas)
    p0 = np.full(inst.K, float(budget))
    trace = iterate_normalized_fixed_point(
        mapping, MonotoneNormSpec.linf(), budget, p0, tol, max_iter
    )
    sinr = uatf_sinr_all(stats, trace.p)
    return SolveResult(
        "power-only",
        inst.scenario,
        trace,
        trace.p,
        fixed_design,
        stats,
        sinr,
        np.log2(1.0 + sinr),
    )


@dataclass
class ShortTermResult:
    """Per-realization max-min solutions and their averaged coherent rates."""

    method: str
    scenario: str
    rates: np.ndarray             # (K,) ergodic rates, instantaneous SINR in the log
    p_per_realization: np.ndarray  # (n_sim, K)
    n_converged: int

    @property
    def min_rate(self) -> float:
        return float(self.rates.min())


def solve_short_term_maxmin(
    inst: NetworkInstance,
    batch: ChannelBatch,
    gammas: np.ndarray,
    budget: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = 200,
) -> ShortTermResult:
    """Per-realization joint max-min for centralized combining.

    Each CSI realization is treated as a single-sample training set, so the
    inner problem (instantaneous SINR with the error-plus-noise covariance in
    the denominator, reduced-subspace MMSE beamformers) is solved by the same
    normalized fixed-point machinery.  Rates average log2(1 + SINR_inst) of
    the per-realization optima over the batch, with the true channels.
    """
    if inst.scenario != CENTRALIZED:
        raise ValueError("short-term baseline is defined for the centralized scenario")
    gammas = _gammas(gammas, inst.K)
    S = batch.n_sim
    rates = np.zeros(inst.K)
    p_all = np.empty((S, inst.K))
    n_converged = 0
    for s in range(S):
        sub = ChannelBatch(batch.h[s : s + 1], batch.seed)
        csi = build_csi(sub, inst)
        mapping = scenario_mapping(inst, csi, gammas)
        trace = iterate_normalized_fixed_point(
            mapping,
            MonotoneNormSpec.linf(),
            budget,
            np.full(inst.K, float(budget)),
            tol,
            max_iter,
        )
        p_s = trace.p
        n_converged += trace.status is IterationStatus.CONVERGED
        design = design_for_scenario(csi, inst, p_s)
        beams = realize_design(design, csi, inst)
        rates += coherent_rates(sub, beams, p_s) / S
        p_all[s] = p_s
    return ShortTermResult("short-term", inst.scenario, rates, p_all, n_converged)


def solve_lsfd_maxmin(
    inst: NetworkInstance,
    batch: ChannelBatch,
    gammas: np.ndarray,
    budget: float,
    tol: float = 1e-6,
    max_rounds: int = 50,
    single_loop: bool = False,
    power_tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveResult:
    """Max-min over powers and large-scale combining weights on top of MRC.

    Block-coordinate version alternates the closed-form weight update with a
    power-only normalized fixed-point solve until the min-rate improves by
    less than `tol` bit/s/Hz (or `max_rounds` is hit).  With
    `single_loop=True` the weight update is folded into every iteration of a
    single normalized fixed-point run instead.
    """
    if inst.scenario != DISTRIBUTED:
        raise ValueError("the LSFD baseline is defined for the distributed scenario")
    gammas = _gammas(gammas, inst.K)
    csi = build_csi(batch, inst)
    moments = per_ap_moments(csi, mrc(csi, inst).per_ap)
    norm = MonotoneNormSpec.linf()
    p0 = np.full(inst.K, float(budget))

    if single_loop:
        def eval_map(p: np.ndarray) -> np.ndarray:
            a = lsfd_optimize(moments, p)
            stats = factored_uatf_stats(scale_moments(moments, a))
            return gammas * p / uatf_sinr_all(stats, p)

        mapping = InterferenceMapping(inst.K, eval_map)
        trace = iterate_normalized_fixed_point(
            mapping, norm, budget, p0, power_tol, max_iter
        )
        p = trace.p
        weights = lsfd_optimize(moments, p)
        stats = factored_uatf_stats(scale_moments(moments, weights))
    else:
        p = p0
        best = -np.inf
        weights = lsfd_optimize(moments, p)
        stats = factored_uatf_stats(scale_moments(moments, weights))
        trace = None
        for _ in range(max_rounds):
            mapping = fixed_stats_mapping(stats, gammas)
            trace = iterate_normalized_fixed_point(
                mapping, norm, budget, p, power_tol, max_iter
            )
            p = trace.p
            weights = lsfd_optimize(moments, p)
            stats = factored_uatf_stats(scale_moments(moments, weights))
            current = float(np.log2(1.0 + uatf_sinr_all(stats, p) / gammas).min())
            if current - best < tol:
                break
            best = current

    sinr = uatf_sinr_all(stats, p)
    design = BeamformerDesign(
        kind=MRC_LSFD,
        power=p.copy(),
        sigma_coeffs=csi.sigma_coeffs(p),
        lsfd_weights=weights,
    )
    return SolveResult(
        "mrc-lsfd", inst.scenario, trace, p, design, stats, sinr, np.log2(1.0 + sinr)
    )
