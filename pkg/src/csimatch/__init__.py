"""Overhead-aware CSI-T selection for FDD MIMO interference networks via many-to-many stable matching."""

from .harness import (
    SCHEMES,
    ExperimentConfig,
    ExperimentResult,
    greedy_centralized_selection,
    run_experiment,
    run_scheme,
)
from .matching import (
    Matching,
    PreferenceTable,
    QuotaConfig,
    SharingSet,
    beta_bounds,
    brute_force_stable_matchings,
    choose,
    compute_quota,
    is_stable,
    matching_to_sharing_set,
    phi_rx,
    phi_tx,
    preference_table,
    run_deferred_acceptance,
    target_prelog,
)
from .network import (
    ChannelSet,
    NetworkInstance,
    SystemConfig,
    deployment_streams,
    draw_channels,
    generate_deployment,
    nominal_snr,
)
from .overhead import InfeasibleCoherenceBlockError, OverheadReport, csi_overhead, prelog
from .precoding import (
    PrecoderSet,
    RateVector,
    eigen_precoders,
    interference_covariance,
    spectral_efficiency,
    wmmse_precoders,
)

__version__ = "0.1.0"
