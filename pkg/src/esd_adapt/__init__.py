"""Channel adaptation for two-qubit entanglement: Kraus channels, local filters,
entanglement diagnostics and filter optimisation."""

from .adaptation import (
    FilterOutcome,
    LocalFilter,
    PipelineSpec,
    apply_filter,
    damping_spec,
    filter_bound,
    loss_concurrence,
    loss_pipeline_state,
    loss_separability_threshold,
    loss_spec,
    post_channel_filter_limit,
    run_pipeline,
    swapped_loss_state,
)
from .channels import KrausChannel, amplitude_damping, apply, compose, depolarizing, replace_channel, validate
from .entanglement import EntanglementReport, concurrence, is_entangled, min_pt_eigenvalue, partial_transpose_A
from .states import BellKind, Side, TwoQubitState, bell, embed, werner

__version__ = "0.1.0"
