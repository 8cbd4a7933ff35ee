"""Uplink performance metrics from channel batches and realized beamformers.

Two evaluation paths coexist on purpose:

* plain sample averages over the true channels (`estimate_uatf_stats`,
  `empirical_mse`, `coherent_rates`) -- the reporting path.  Under one shared
  batch the use-and-then-forget (UatF) rate never exceeds the coherent rate;
  this ordering is an identity of the empirical measure, not an asymptotic
  statement.
* model averages that integrate the masked (unknown) channel blocks in
  closed form (`model_uatf_stats`) -- the optimization path.  Under this
  measure the regularized designs in `beamforming` are exact MSE minimizers,
  which makes the SINR/MSE duality checks hold to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import ChannelBatch, CsiView

__all__ = [
    "UatfStats",
    "UndefinedBeamformerError",
    "estimate_uatf_stats",
    "model_uatf_stats",
    "uatf_sinr",
    "uatf_sinr_all",
    "uatf_rates",
    "empirical_mse",
    "mse_from_stats",
    "coherent_rates",
    "sinr_target_for_rate",
]


class UndefinedBeamformerError(ValueError):
    """Raised when a beamformer with zero mean power enters a SINR."""


@dataclass(frozen=True)
class UatfStats:
    """Per-user second-order moments of the effective channels.

    mean_gain[k]     = E[h_k^H v_k]
    cross_gain[j, k] = E[|h_j^H v_k|^2]
    beam_power[k]    = E[||v_k||^2]

    SINR, MSE and rates are pure functions of these moments and the power
    vector.  `cross_gain[k, k] - |mean_gain[k]|^2` is the effective-channel
    variance and is nonnegative up to floating-point rounding.
    """

    mean_gain: np.ndarray
    cross_gain: np.ndarray
    beam_power: np.ndarray

    @property
    def n_users(self) -> int:
        return self.mean_gain.shape[0]


def _effective_products(h_flat: np.ndarray, v_flat: np.ndarray) -> np.ndarray:
    """x[s, j, k] = h_j^H v_k for realization s."""
    return np.einsum("smj,smk->sjk", np.conj(h_flat), v_flat, optimize=True)


def estimate_uatf_stats(batch: ChannelBatch, beams) -> UatfStats:
    """Plain sample averages of the UatF moments over the training batch."""
    v = beams.flat
    h = batch.flat
    if h.shape != v.shape:
        raise ValueError("batch and beamformers are not aligned")
    x = _effective_products(h, v)
    k_idx = np.arange(x.shape[1])
    mean_gain = x[:, k_idx, k_idx].mean(axis=0)
    cross_gain = (np.abs(x) ** 2).mean(axis=0)
    beam_power = (np.abs(v) ** 2).sum(axis=1).mean(axis=0)
    return UatfStats(mean_gain, cross_gain, beam_power)


def model_uatf_stats(csi: CsiView, beams) -> UatfStats:
    """UatF moments with masked blocks integrated out in closed form.

    The cross moments add, per masked (AP, user) pair, the known covariance
    contribution beta_{l,j} * E[||v_{l,k}||^2] in place of the unavailable
    realization, so they are exact conditional expectations given the CSI.
    """
    v = beams.flat
    h_hat = csi.flat
    if h_hat.shape != v.shape:
        raise ValueError("CSI view and beamformers are not aligned")
    x = _effective_products(h_hat, v)
    k_idx = np.arange(x.shape[1])
    mean_gain = x[:, k_idx, k_idx].mean(axis=0)
    cross_gain = (np.abs(x) ** 2).mean(axis=0)
    per_ap_power = (np.abs(beams.per_ap) ** 2).sum(axis=2).mean(axis=0)  # (L, K)
    cross_gain = cross_gain + np.einsum(
        "lj,lk->jk", csi.unknown_gains, per_ap_power
    )
    beam_power = per_ap_power.sum(axis=0)
    return UatfStats(mean_gain, cross_gain, beam_power)


def _sinr_terms(stats: UatfStats, p: np.ndarray):
    p = np.asarray(p, dtype=float)
    gain2 = np.abs(stats.mean_gain) ** 2
    num = p * gain2
    den = p @ stats.cross_gain - num + stats.beam_power
    return num, den


def uatf_sinr_all(stats: UatfStats, p: np.ndarray) -> np.ndarray:
    """UatF SINR of every user at power vector p."""
    if np.any(stats.beam_power <= 0):
        raise UndefinedBeamformerError("a beamformer has zero mean power")
    num, den = _sinr_terms(stats, p)
    return num / den

def uatf_sinr(stats: UatfStats, p: np.ndarray, k: int) -> float:
    if stats.beam_power[k] <= 0:
        raise UndefinedBeamformerError(f"beamformer of user {k} has zero mean power")
    num, den = _sinr_terms(stats, p)
    return float(num[k] / den[k])


def uatf_rates(stats: UatfStats, p: np.ndarray) -> np.ndarray:
    """Achievable UatF rates log2(1 + SINR_k) in bit/s/Hz."""
    return np.log2(1.0 + uatf_sinr_all(stats, p))


def mse_from_stats(stats: UatfStats, p: np.ndarray, k: int) -> float:
    """MSE of the unit-signal estimate implied by the stored moments."""
    p = np.asarray(p, dtype=float)
    return float(
        p @ stats.cross_gain[:, k]
        - 2.0 * np.sqrt(p[k]) * stats.mean_gain[k].real
        + 1.0
        + stats.beam_power[k]
    )


def empirical_mse(batch: ChannelBatch, beams, p: np.ndarray, k: int) -> float:
    """Sample-average MSE E[||P^(1/2) H^H v_k - e_k||^2] + E[||v_k||^2]."""
    p = np.asarray(p, dtype=float)
    h = batch.flat
    v = beams.flat[:, :, k]
    x = np.einsum("smj,sm->sj", np.conj(h), v)  # h_j^H v_k per realization
    x = np.sqrt(p)[None, :] * x
    x[:, k] -= 1.0
    return float(
        (np.abs(x) ** 2).sum(axis=1).mean() + (np.abs(v) ** 2).sum(axis=1).mean()
    )


def coherent_rates(batch: ChannelBatch, beams, p: np.ndarray) -> np.ndarray:
    """Ergodic rates with instantaneous SINR inside the log (coherent decoding).

    Realizations where a beamformer vanishes contribute zero rate for that
    user.  Upper-bounds the UatF rates on the same batch.
    """
    p = np.asarray(p, dtype=float)
    v = beams.flat
    x = _effective_products(batch.flat, v)
    k_idx = np.arange(x.shape[1])
    pow_all = p[None, :, None] * np.abs(x) ** 2  # (s, j, k)
    num = pow_all[:, k_idx, k_idx]
    noise = (np.abs(v) ** 2).sum(axis=1)
    den = pow_all.sum(axis=1) - num + noise
    sinr = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return np.log2(1.0 + sinr).mean(axis=0)


def sinr_target_for_rate(rate: float) -> float:
    """SINR required for a UatF rate of `rate` bit/s/Hz."""
    return 2.0**rate - 1.0
