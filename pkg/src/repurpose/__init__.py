"""Restructure trained neural networks for low-communication parallel inference.

Workflow: load a model, describe how many neurons each worker should own per
layer boundary, then let :func:`repurpose_model` permute the neurons and prune
the cross-worker weights.  The result can be certified (:func:`error_certificate`),
executed shard-by-shard (:func:`shard_model` / :func:`distributed_forward`) and
timed on an analytic platform model (:func:`simulate`).
"""

from .assignment import (
    AssignmentResult,
    CostMatrix,
    RepurposeConfig,
    assign_neurons,
    asymptotic_estimate,
    brute_force_assign,
    build_cost_matrix,
    column_cost,
    count_assignments,
    munkres,
)
from .errors import (
    CertificateError,
    DimensionMismatch,
    EnumerationCapExceeded,
    InfeasibleError,
    InputError,
    RepurposeError,
    VerificationError,
)
from .io import load_model, save_model
from .model import (
    Activation,
    ConvLayer,
    DenseLayer,
    ForwardTrace,
    SequentialModel,
    forward,
)
from .partition import (
    PartitionSpec,
    Permutation,
    apply_permutation,
    build_mask,
    cross_edge_count,
)
from .pipeline import (
    ErrorCertificate,
    RepurposedModel,
    calibrate_eta2,
    direct_sparsify,
    error_certificate,
    hard_threshold_matrix,
    load_repurposed,
    repurpose_conv,
    repurpose_model,
    save_repurposed,
)
from .sharding import (
    CommLog,
    DistributedRun,
    ShardedModel,
    distributed_forward,
    equivalence_check,
    shard_model,
)
from .simulator import (
    PlatformConfig,
    SimReport,
    Workload,
    naive_average_accuracy,
    simulate,
    speedup_report,
    theoretical_comm_per_node,
)

__version__ = "0.1.0"
