"""Network geometry, large-scale fading, channel batches and masked CSI views.

Conventions: L access points (APs) with N antennas each (M = N*L total), K
single-antenna users.  Large-scale gains beta are noise-normalized, i.e. the
noise power in dBm is already subtracted in the dB domain, so all downstream
SINR expressions use unit noise power and transmit powers in mW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "SMALL_CELLS",
    "DISTRIBUTED",
    "CENTRALIZED",
    "SCENARIOS",
    "NetworkConfig",
    "NetworkInstance",
    "ChannelBatch",
    "CsiView",
    "generate_instance",
    "sample_channels",
    "build_csi",
]

SMALL_CELLS = "small-cells"
DISTRIBUTED = "distributed"
CENTRALIZED = "centralized"
SCENARIOS = (SMALL_CELLS, DISTRIBUTED, CENTRALIZED)


@dataclass(frozen=True)
class NetworkConfig:
    """Simulation parameters; defaults reproduce the reference large-scale setup."""

    K: int = 64              # users
    L: int = 16              # APs (perfect square, placed on a grid)
    N: int = 8               # antennas per AP
    Q: int = 4               # serving cluster size for cell-free scenarios
    area_side: float = 500.0         # m
    pathloss_slope: float = 36.7     # dB per decade of distance
    pathloss_const: float = 30.5     # dB offset at 1 m
    shadow_std: float = 4.0          # dB
    shadow_corr_dist: float = 9.0    # m, user-distance correlation scale
    bandwidth: float = 20e6          # Hz
    noise_figure: float = 7.0        # dB
    height_diff: float = 10.0        # m between AP and user plane
    power_dbm: float = 20.0          # per-user budget
    n_sim: int = 100                 # channel realizations in the training set

    def __post_init__(self):
        if min(self.K, self.L, self.N, self.Q, self.n_sim) < 1:
            raise ValueError("K, L, N, Q and n_sim must all be >= 1")
        if self.Q > self.L:
            raise ValueError("cluster size Q cannot exceed the number of APs")
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")
        if self.shadow_std < 0:
            raise ValueError("shadow_std must be nonnegative")

    @property
    def noise_power_dbm(self) -> float:
        return -174.0 + 10.0 * math.log10(self.bandwidth) + self.noise_figure

    @property
    def power_budget(self) -> float:
        """Per-user budget in mW (noise sits at 0 dB after normalization)."""
        return 10.0 ** (self.power_dbm / 10.0)

    @classmethod
    def paper(cls, **overrides) -> "NetworkConfig":
        return cls(**overrides)

    @classmethod
    def desk(cls, **overrides) -> "NetworkConfig":
        """Small profile for fast experimentation and CI."""
        base = dict(K=16, L=9, N=4, Q=3, n_sim=50)
        base.update(overrides)
        return cls(**base)


@dataclass
class NetworkInstance:
    """One random drop: geometry, noise-normalized gains and serving clusters."""

    ap_positions: np.ndarray    # (L, 2) m
    user_positions: np.ndarray  # (K, 2) m
    beta: np.ndarray            # (L, K) linear, strictly positive
    clusters: np.ndarray        # (K, Q) AP indices, descending beta order
    scenario: str
    n_antennas: int             # N, antennas per AP

    @property
    def L(self) -> int:
        return self.beta.shape[0]

    @property
    def K(self) -> int:
        return self.beta.shape[1]

    @property
    def Q(self) -> int:
        return self.clusters.shape[1]

    @cached_property
    def serving_mask(self) -> np.ndarray:
        """(L, K) boolean; [l, k] is True when AP l serves user k."""
        mask = np.zeros((self.L, self.K), dtype=bool)
        for k in range(self.K):
            mask[self.clusters[k], k] = True
        return mask


@dataclass
class ChannelBatch:
    """Fixed training set of global channel realizations.

    `h` has shape (n_sim, L, N, K); flattening APs and antennas in that order
    gives the (n_sim, M, K) stacked channel matrices.
    """

    h: np.ndarray
    seed: int

    @property
    def n_sim(self) -> int:
        return self.h.shape[0]

    @property
    def flat(self) -> np.ndarray:
        s, l, n, k = self.h.shape
        return self.h.reshape(s, l * n, k)


@dataclass
class CsiView:
    """Channel batch as seen through the information constraint.

    Blocks of non-serving APs are zeroed (the channels are zero-mean, so the
    masked estimate equals the mean).  `unknown_gains[l, k]` holds beta for
    masked blocks and 0 for served ones; together with a power vector it
    yields the per-AP error-plus-noise covariance scale

        sigma_coeffs(p)[l] = 1 + sum_i unknown_gains[l, i] * p_i.
    """

    h_hat: np.ndarray         # (n_sim, L, N, K), masked
    serving_mask: np.ndarray  # (L, K) bool
    unknown_gains: np.ndarray  # (L, K)
    clusters: np.ndarray      # (K, Q)

    @property
    def n_sim(self) -> int:
        return self.h_hat.shape[0]

    @property
    def flat(self) -> np.ndarray:
        s, l, n, k = self.h_hat.shape
        return self.h_hat.reshape(s, l * n, k)

    def sigma_coeffs(self, p: np.ndarray) -> np.ndarray:
        return 1.0 + self.unknown_gains @ np.asarray(p, dtype=float)


def _ap_grid(L: int, area_side: float) -> np.ndarray:
    g = math.isqrt(L)
    if g * g != L:
        raise ValueError("L must be a perfect square for grid placement")
    pitch = area_side / g
    coords = (np.arange(g) + 0.5) * pitch
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()])


def _shadowing_cov(user_positions: np.ndarray, std: float, corr_dist: float) -> np.ndarray:
    delta = np.linalg.norm(
        user_positions[:, None, :] - user_positions[None, :, :], axis=-1
    )
    return std**2 * 2.0 ** (-delta / corr_dist)


def _draw_shadowing(cov: np.ndarray, L: int, rng: np.random.Generator) -> np.ndarray:
    """(L, K) correlated-across-users, independent-across-APs shadowing in dB."""
    K = cov.shape[0]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        chol = np.linalg.cholesky(cov + 1e-10 * np.eye(K))
    return (chol @ rng.standard_normal((K, L))).T


def _clusters_from_beta(beta: np.ndarray, Q: int) -> np.ndarray:
    L, K = beta.shape
    clusters = np.empty((K, Q), dtype=np.int64)
    for k in range(K):
        # descending beta, ties broken by lowest AP index
        order = np.lexsort((np.arange(L), -beta[:, k]))
        clusters[k] = order[:Q]
    return clusters


def generate_instance(cfg: NetworkConfig, seed: int, scenario: str = CENTRALIZED) -> NetworkInstance:
    """Drop a random network: grid APs, uniform users, correlated shadowing.

    Deterministic given (cfg, seed); the scenario only selects the cluster
    size (small cells use Q = 1) and never consumes randomness, so all
    scenarios of one seed share geometry and gains.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}, expected one of {SCENARIOS}")
    rng = np.random.default_rng(seed)
    ap_positions = _ap_grid(cfg.L, cfg.area_side)
    user_positions = rng.uniform(0.0, cfg.area_side, size=(cfg.K, 2))
    horizontal = np.linalg.norm(
        ap_positions[:, None, :] - user_positions[None, :, :], axis=-1
    )
    distance = np.hypot(horizontal, cfg.height_diff)
    if cfg.shadow_std > 0:
        cov = _shadowing_cov(user_positions, cfg.shadow_std, cfg.shadow_corr_dist)
        shadow = _draw_shadowing(cov, cfg.L, rng)
    else:
        shadow = np.zeros((cfg.L, cfg.K))
    beta_db = (
        -cfg.pathloss_slope * np.log10(distance)
        - cfg.pathloss_const
        + shadow
        - cfg.noise_power_dbm
    )
    beta = 10.0 ** (beta_db / 10.0)
    Q = 1 if scenario == SMALL_CELLS else cfg.Q
    clusters = _clusters_from_beta(beta, Q)
    return NetworkInstance(
        ap_positions, user_positions, beta, clusters, scenario, cfg.N
    )


def sample_channels(inst: NetworkInstance, n_sim: int, seed: int) -> ChannelBatch:
    """Draw i.i.d. Rayleigh blocks h_{l,k} ~ CN(0, beta_{l,k} I_N)."""
    if n_sim < 1:
        raise ValueError("n_sim must be >= 1")
    rng = np.random.default_rng(seed)
    L, K = inst.beta.shape
    x = rng.standard_normal((n_sim, L, inst.n_antennas, K, 2))
    h = (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)
    h *= np.sqrt(inst.beta)[None, :, None, :]
    return ChannelBatch(h, seed)


def build_csi(batch: ChannelBatch, inst: NetworkInstance) -> CsiView:
    """Mask non-serving blocks to exactly zero; record masked gains."""
    if batch.h.shape[1] != inst.L or batch.h.shape[3] != inst.K:
        raise ValueError("channel batch dimensions do not match the instance")
    mask = inst.serving_mask
    h_hat = np.where(mask[None, :, None, :], batch.h, 0.0 + 0.0j)
    unknown = np.where(mask, 0.0, inst.beta)
    return CsiView(h_hat, mask, unknown, inst.clusters.copy())
