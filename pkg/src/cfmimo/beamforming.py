"""MSE-optimal receive beamforming designs under information constraints.

All designs are long-term objects: what is optimized (and stored) are the
deterministic parameters of the map from CSI realizations to beamforming
vectors -- per-AP regularization scales, statistical mixing stages for the
team solution, or large-scale combining weights.  Applying a design to a
channel batch yields `RealizedBeamformers`.

Statistics come in two flavors matching the constraint structure:

* `model_uatf_stats` (in `metrics`) for designs computed from the shared
  global CSI: empirical over the batch, masked blocks integrated exactly.
* `factored_uatf_stats` here for per-AP local designs: cross-AP product
  moments factor into products of per-AP means, reflecting that the local
  CSIs are independent across APs.  Under these statistics the team solution
  with batch-averaged coupling matrices is the exact MSE minimizer of its
  class, so duality and optimality checks hold to machine precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .metrics import UatfStats, model_uatf_stats
from .network import CENTRALIZED, DISTRIBUTED, SMALL_CELLS, CsiView, NetworkInstance

__all__ = [
    "MRC_LSFD",
    "NumericalError",
    "BeamformerDesign",
    "RealizedBeamformers",
    "PerApMoments",
    "local_mmse_stage",
    "local_mmse_stages",
    "local_mmse_design",
    "team_mmse_design",
    "centralized_mmse",
    "mrc",
    "lsfd_optimize",
    "realize_design",
    "per_ap_moments",
    "scale_moments",
    "factored_uatf_stats",
    "stats_for_design",
    "design_for_scenario",
]

MRC_LSFD = "mrc-lsfd"


class NumericalError(RuntimeError):
    """A linear system that should be regular failed to solve."""

    def __init__(self, message: str, user_index: int | None = None):
        super().__init__(message)
        self.user_index = user_index


@dataclass
class BeamformerDesign:
    """Long-term parameters of a CSI -> beamformer map.

    `kind` is one of small-cells / distributed / centralized / mrc-lsfd.
    `team_coeffs[l][:, k]` is the statistical stage applied to the local
    regularized-inversion output of AP l for user k (zero when l does not
    serve k); `lsfd_weights[l, k]` scales AP l's maximum-ratio block.
    """

    kind: str
    power: np.ndarray               # the power vector the design was computed for
    sigma_coeffs: np.ndarray        # (L,) per-AP error-plus-noise scale at `power`
    team_coeffs: np.ndarray | None = None   # (L, K, K)
    lsfd_weights: np.ndarray | None = None  # (L, K)


@dataclass
class RealizedBeamformers:
    """Per-realization beamforming vectors, stored per AP: (n_sim, L, N, K)."""

    per_ap: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        s, l, n, k = self.per_ap.shape
        return self.per_ap.reshape(s, l * n, k)

    @property
    def n_sim(self) -> int:
        return self.per_ap.shape[0]


def _check_power(p, n_users: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n_users,):
        raise ValueError(f"power vector must have shape ({n_users},)")
    if np.any(p <= 0) or not np.all(np.isfinite(p)):
        raise ValueError("power vector entries must be finite and strictly positive")
    return p


def local_mmse_stages(csi: CsiView, p: np.ndarray) -> np.ndarray:
    """Regularized local inversion stages for all APs: (n_sim, L, N, K).

    Stage l solves (H_l P H_l^H + sigma_l I) V_l = H_l P^(1/2) per
    realization, with sigma_l the local error-plus-noise scale at p.
    """
    K = csi.h_hat.shape[3]
    p = _check_power(p, K)
    sig = csi.sigma_coeffs(p)
    h = csi.h_hat
    gram = np.einsum("slnk,k,slmk->slnm", h, p, np.conj(h), optimize=True)
    n = h.shape[2]
    idx = np.arange(n)
    gram[:, :, idx, idx] += sig[None, :, None]
    rhs = h * np.sqrt(p)[None, None, None, :]
    return np.linalg.solve(gram, rhs)


def local_mmse_stage(csi: CsiView, p: np.ndarray, ap: int) -> np.ndarray:
    """Stage of a single AP: (n_sim, N, K)."""
    L = csi.h_hat.shape[1]
    if not 0 <= ap < L:
        raise ValueError(f"AP index {ap} out of range [0, {L})")
    return local_mmse_stages(csi, p)[:, ap]


def _trivial_team_coeffs(csi: CsiView) -> np.ndarray:
    L, K = csi.serving_mask.shape
    coeffs = np.zeros((L, K, K), dtype=complex)
    eye = np.eye(K)
    for l in range(L):
        coeffs[l] = eye * csi.serving_mask[l][None, :]
    return coeffs


def local_mmse_design(csi: CsiView, inst: NetworkInstance, p: np.ndarray) -> BeamformerDesign:
    """Per-AP local MMSE without statistical mixing (the small-cells solution)."""
    p = _check_power(p, inst.K)
    return BeamformerDesign(
        kind=SMALL_CELLS,
        power=p.copy(),
        sigma_coeffs=csi.sigma_coeffs(p),
        team_coeffs=_trivial_team_coeffs(csi),
    )


def team_mmse_design(csi: CsiView, inst: NetworkInstance, p: np.ndarray) -> BeamformerDesign:
    """Local team MMSE: statistical stages coupling the serving APs of each user.

    The coupling matrices Pi_l are batch averages of P^(1/2) H_l^H V_l; each
    user's stages solve the linear system

        c_{l,k} + sum_{j in cluster(k), j != l} Pi_j c_{j,k} = e_k

    for all serving APs l, by a dense direct solve with the serving APs
    ordered ascending.
    """
    p = _check_power(p, inst.K)
    V = local_mmse_stages(csi, p)
    K, L = inst.K, inst.L
    # Pi[l] = mean over the batch of P^(1/2) H_l^H V_l  (K x K)
    pi = np.einsum("slnk,slnj->lkj", np.conj(csi.h_hat), V, optimize=True)
    pi *= np.sqrt(p)[None, :, None] / csi.n_sim
    coeffs = np.zeros((L, K, K), dtype=complex)
    eye = np.eye(K, dtype=complex)
    for k in range(K):
        serving = np.sort(csi.clusters[k])
        q = len(serving)
        a = np.zeros((q * K, q * K), dtype=complex)
        rhs = np.tile(eye[:, k], q)
        for i in range(q):
            for j in range(q):
                block = eye if i == j else pi[serving[j]]
                a[i * K : (i + 1) * K, j * K : (j + 1) * K] = block
        try:
            c = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"team coupling system is singular for user {k}", user_index=k
            ) from exc
        for i, l in enumerate(serving):
            coeffs[l, :, k] = c[i * K : (i + 1) * K]
    return BeamformerDesign(
        kind=DISTRIBUTED,
        power=p.copy(),
        sigma_coeffs=csi.sigma_coeffs(p),
        team_coeffs=coeffs,
    )


def _serving_antennas(csi: CsiView, k: int, n: int) -> np.ndarray:
    aps = np.sort(csi.clusters[k])
    return (aps[:, None] * n + np.arange(n)[None, :]).ravel()


def centralized_mmse(csi: CsiView, inst: NetworkInstance, p: np.ndarray) -> RealizedBeamformers:
    """Reduced-subspace MMSE from globally shared CSI.

    For each user the solve is restricted to the serving antennas, with the
    blockwise error-plus-noise scales on the diagonal, then embedded back
    into the full antenna space with zeros.
    """
    p = _check_power(p, inst.K)
    s, L, n, K = csi.h_hat.shape
    sig_ant = np.repeat(csi.sigma_coeffs(p), n)
    h = csi.flat
    b = h * np.sqrt(p)[None, None, :]
    gram_full = b @ np.conj(b).transpose(0, 2, 1)
    v = np.zeros((s, L * n, K), dtype=complex)
    for k in range(K):
        idx = _serving_antennas(csi, k, n)
        gram = gram_full[:, idx[:, None], idx[None, :]].copy()
        d = np.arange(len(idx))
        gram[:, d, d] += sig_ant[idx][None, :]
        rhs = h[:, idx, k] * np.sqrt(p[k])
        v[:, idx, k] = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return RealizedBeamformers(v.reshape(s, L, n, K))


def mrc(csi: CsiView, inst: NetworkInstance) -> RealizedBeamformers:
    """Maximum-ratio combining on the serving blocks: v_k = h_hat_k."""
    return RealizedBeamformers(csi.h_hat.copy())


@dataclass
class PerApMoments:
    """Second-order moments of per-AP effective channels z = h_{l,j}^H w_{l,k}.

    mean[l, j, k]  = E[z]
    var[l, j, k]   = Var(z) plus the masked-gain term beta_{l,j} E||w_{l,k}||^2
    power[l, k]    = E[||w_{l,k}||^2]

    These are the sufficient statistics for any large-scale recombination of
    per-AP beams (team stages, LSFD weights).
    """

    mean: np.ndarray
    var: np.ndarray
    power: np.ndarray


def per_ap_moments(csi: CsiView, per_ap_beams: np.ndarray) -> PerApMoments:
    z = np.einsum("slnj,slnk->sljk", np.conj(csi.h_hat), per_ap_beams, optimize=True)
    mean = z.mean(axis=0)
    var = (np.abs(z) ** 2).mean(axis=0) - np.abs(mean) ** 2
    power = (np.abs(per_ap_beams) ** 2).sum(axis=2).mean(axis=0)
    var = var + csi.unknown_gains[:, :, None] * power[:, None, :]
    return PerApMoments(mean, var, power)


def scale_moments(moments: PerApMoments, weights: np.ndarray) -> PerApMoments:
    """Moments of the beams after scaling AP l's block for user k by weights[l, k]."""
    w = np.asarray(weights)
    return PerApMoments(
        mean=moments.mean * w[:, None, :],
        var=moments.var * (np.abs(w) ** 2)[:, None, :],
        power=moments.power * np.abs(w) ** 2,
    )


def factored_uatf_stats(moments: PerApMoments) -> UatfStats:
    """Assemble UatF moments treating the per-AP effective channels as independent."""
    k_idx = np.arange(moments.mean.shape[1])
    mean_gain = moments.mean[:, k_idx, k_idx].sum(axis=0)
    mean_sum = moments.mean.sum(axis=0)
    cross_gain = moments.var.sum(axis=0) + np.abs(mean_sum) ** 2
    return UatfStats(mean_gain, cross_gain, moments.power.sum(axis=0))


def lsfd_optimize(moments: PerApMoments, p: np.ndarray) -> np.ndarray:
    """Large-scale fading decoding weights maximizing each user's UatF SINR.

    Returns (L, K) complex weights; the SINR of the recombined beamformer
    diag(a_{1,k} I, ..., a_{L,k} I) v_k is a generalized Rayleigh quotient
    with rank-one numerator, maximized (up to scale) by the solve below.
    """
    L, K = moments.power.shape
    p = _check_power(p, K)
    if L == 1:
        return np.ones((1, K), dtype=complex)
    a = np.zeros((L, K), dtype=complex)
    for k in range(K):
        # weights only matter where the user's beam carries power
        sup = np.flatnonzero(moments.power[:, k] > 0)
        if len(sup) == 0:
            continue
        mj = moments.mean[np.ix_(sup, np.arange(K))][:, :, k]
        diag_term = moments.var[sup, :, k] @ p + moments.power[sup, k]
        denom = np.einsum("lj,mj,j->lm", np.conj(mj), mj, p) + np.diag(diag_term)
        b = moments.mean[sup, k, k]
        denom = denom - p[k] * np.outer(np.conj(b), b)
        try:
            a[sup, k] = np.linalg.solve(denom, np.conj(b))
        except np.linalg.LinAlgError:
            warnings.warn(
                f"singular recombination system for user {k}; using pseudo-inverse",
                RuntimeWarning,
            )
            a[sup, k] = np.linalg.pinv(denom) @ np.conj(b)
    return a


def realize_design(design: BeamformerDesign, csi: CsiView, inst: NetworkInstance) -> RealizedBeamformers:
    """Apply a long-term design to every CSI realization of the batch."""
    if design.kind in (SMALL_CELLS, DISTRIBUTED):
        V = local_mmse_stages(csi, design.power)
        per_ap = np.einsum("slnk,lkj->slnj", V, design.team_coeffs, optimize=True)
        return RealizedBeamformers(per_ap)
    if design.kind == CENTRALIZED:
        return centralized_mmse(csi, inst, design.power)
    if design.kind == MRC_LSFD:
        w = design.lsfd_weights
        return RealizedBeamformers(csi.h_hat * w[None, :, None, :])
    raise ValueError(f"unknown design kind {design.kind!r}")


def design_for_scenario(csi: CsiView, inst: NetworkInstance, p: np.ndarray) -> BeamformerDesign:
    """The MSE-optimal design family for the instance's information scenario."""
    if inst.scenario == SMALL_CELLS:
        return local_mmse_design(csi, inst, p)
    if inst.scenario == DISTRIBUTED:
        return team_mmse_design(csi, inst, p)
    if inst.scenario == CENTRALIZED:
        p = _check_power(p, inst.K)
        return BeamformerDesign(
            kind=CENTRALIZED, power=p.copy(), sigma_coeffs=csi.sigma_coeffs(p)
        )
    raise ValueError(f"unknown scenario {inst.scenario!r}")


def stats_for_design(
    design: BeamformerDesign,
    csi: CsiView,
    inst: NetworkInstance,
    beams: RealizedBeamformers | None = None,
) -> UatfStats:
    """Model UatF moments of a design, matching its information structure.

    Per-AP local designs use the factored (independent-APs) moments; globally
    shared designs use the joint masked moments.
    """
    if beams is None:
        beams = realize_design(design, csi, inst)
    if design.kind == CENTRALIZED:
        return model_uatf_stats(csi, beams)
    return factored_uatf_stats(per_ap_moments(csi, beams.per_ap))
