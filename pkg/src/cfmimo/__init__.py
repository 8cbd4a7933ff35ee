"""Long-term power control and beamforming for large-scale MIMO networks.

Fixed-point and normalized fixed-point iterations on standard interference
mappings, composed with MSE-optimal beamforming designs under per-AP or
shared-CSI information constraints, evaluated on cell-free massive MIMO
network drops.
"""

from .fixed_point import (
    InterferenceMapping,
    IterationStatus,
    IterationTrace,
    MonotoneNormSpec,
    NormKind,
    check_si_axioms,
    iterate_fixed_point,
    iterate_normalized_fixed_point,
)
from .network import (
    CENTRALIZED,
    DISTRIBUTED,
    SCENARIOS,
    SMALL_CELLS,
    ChannelBatch,
    CsiView,
    NetworkConfig,
    NetworkInstance,
    build_csi,
    generate_instance,
    sample_channels,
)
from .metrics import (
    UatfStats,
    UndefinedBeamformerError,
    coherent_rates,
    empirical_mse,
    estimate_uatf_stats,
    model_uatf_stats,
    mse_from_stats,
    sinr_target_for_rate,
    uatf_rates,
    uatf_sinr,
    uatf_sinr_all,
)
from .beamforming import (
    MRC_LSFD,
    BeamformerDesign,
    NumericalError,
    RealizedBeamformers,
    centralized_mmse,
    design_for_scenario,
    factored_uatf_stats,
    local_mmse_design,
    local_mmse_stage,
    local_mmse_stages,
    lsfd_optimize,
    mrc,
    per_ap_moments,
    realize_design,
    stats_for_design,
    team_mmse_design,
)

__version__ = "0.1.0"
