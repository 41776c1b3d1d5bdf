"""Online no-substitution k-clustering: clusterers, cost oracles, instance generators and a trial harness."""

from .core import (
    SQUARED_EUCLIDEAN,
    ConfigError,
    CostKind,
    CostModel,
    Dataset,
    DatasetFormatError,
    OrderKind,
    ProtocolError,
    ResourceLimitError,
    Rng,
    StreamOrder,
    check_triangle_constant,
    distance,
    uniform_permutation,
)
from .cost import (
    Assignment,
    OptResult,
    assign,
    best_single_center_cost,
    brute_force_opt,
    clustering_cost,
    expected_random_center_cost,
    mean_center_cost,
)
from .offline import (
    OfflineConfig,
    kmeanspp_seed,
    lloyd_refine,
    offline_cluster,
)
from .online import (
    Decision,
    DoublingClusterer,
    FFTClusterer,
    FirstPointClusterer,
    MaxDistanceClusterer,
    OnlineClusterer,
    OnlineTrace,
    RandomIndexClusterer,
    Reason,
    TakeAllClusterer,
    ThreePhaseClusterer,
    farthest_first_traversal,
    run_stream,
    run_stream_blocked,
)
from .instances import (
    GeneratedInstance,
    gen_geometric_groups,
    gen_increasing_gaps,
    gen_k_maximal_series,
    gen_separated_blobs,
    generate,
    validate_increasing_gaps,
    validate_k_maximal_series,
)
from .harness import (
    AlgorithmSpec,
    Baseline,
    BaselineKind,
    ExperimentConfig,
    ExperimentReport,
    TrialResult,
    compute_baseline,
    harmonic_number,
    harmonic_reference,
    run_experiment,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "SQUARED_EUCLIDEAN",
    "ConfigError",
    "CostKind",
    "CostModel",
    "Dataset",
    "DatasetFormatError",
    "OrderKind",
    "ProtocolError",
    "ResourceLimitError",
    "Rng",
    "StreamOrder",
    "check_triangle_constant",
    "distance",
    "uniform_permutation",
    "Assignment",
    "OptResult",
    "assign",
    "best_single_center_cost",
    "brute_force_opt",
    "clustering_cost",
    "expected_random_center_cost",
    "mean_center_cost",
    "OfflineConfig",
    "kmeanspp_seed",
    "lloyd_refine",
    "offline_cluster",
    "Decision",
    "DoublingClusterer",
    "FFTClusterer",
    "FirstPointClusterer",
    "MaxDistanceClusterer",
    "OnlineClusterer",
    "OnlineTrace",
    "RandomIndexClusterer",
    "Reason",
    "TakeAllClusterer",
    "ThreePhaseClusterer",
    "farthest_first_traversal",
    "run_stream",
    "run_stream_blocked",
    "GeneratedInstance",
    "gen_geometric_groups",
    "gen_increasing_gaps",
    "gen_k_maximal_series",
    "gen_separated_blobs",
    "generate",
    "validate_increasing_gaps",
    "validate_k_maximal_series",
    "AlgorithmSpec",
    "Baseline",
    "BaselineKind",
    "ExperimentConfig",
    "ExperimentReport",
    "TrialResult",
    "compute_baseline",
    "harmonic_number",
    "harmonic_reference",
    "run_experiment",
    "run_trial",
]
