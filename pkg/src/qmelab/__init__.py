"""Kernel mean embeddings and their quantum counterpart on a simulated Fock space."""

from .cost_model import ScalingReport, compare_paths, scaling_fit
from .errors import (
    DimensionMismatch,
    InvalidSample,
    OverlapTooSmall,
    QmeError,
    TruncationError,
)
from .fock_sim import (
    PureState,
    TruncationPolicy,
    coherent_feature,
    inner,
    min_truncation_dim,
    qme_state,
    superpose,
)
from .kernel_core import KernelSpec, embedding_norm, eval_kernel, gram, mean_inner, mmd_biased_sq
from .ledger import CostLedger
from .qme_pipeline import (
    KXYEstimate,
    MMDEstimate,
    NormEstimate,
    QmePipelineConfig,
    Reference,
    estimate_K,
    estimate_mmd_sq,
    estimate_norm_via_reference,
)
from .swap_sim import ShotEstimate, recover_inner_positive, run_swap_shots, swap_probabilities

__version__ = "0.1.0"
