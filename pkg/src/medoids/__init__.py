"""k-medoids clustering: exact PAM, FastPAM1, and a bandit-based adaptive
solver behind one instrumented distance oracle."""

from .bandit import (
    ArmStats,
    SearchConfig,
    adaptive_search,
    confidence_radius,
    estimate_sigmas,
)
from .banditpam import banditpam_build, banditpam_swap_once, fit
from .core import (
    ClusterState,
    ConfigError,
    D2_SENTINEL,
    Dataset,
    DistanceOracle,
    FitResult,
    Metric,
    TrajectoryEvent,
    apply_add,
    apply_swap,
    init_state,
    total_loss,
)
from .exact import (
    pam_build,
    pam_swap_once_fastpam1,
    pam_swap_once_naive,
    run_pam,
    voronoi_iteration,
)
from .harness import (
    ExperimentRecord,
    SyntheticSpec,
    generate,
    load_trees,
    load_vectors_csv,
)
from .metrics import TreeNode, cosine, l1, l2, parse_tree, tree_edit_distance

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ArmStats",
    "SearchConfig",
    "adaptive_search",
    "confidence_radius",
    "estimate_sigmas",
    "banditpam_build",
    "banditpam_swap_once",
    "fit",
    "ClusterState",
    "ConfigError",
    "D2_SENTINEL",
    "Dataset",
    "DistanceOracle",
    "FitResult",
    "Metric",
    "TrajectoryEvent",
    "apply_add",
    "apply_swap",
    "init_state",
    "total_loss",
    "pam_build",
    "pam_swap_once_fastpam1",
    "pam_swap_once_naive",
    "run_pam",
    "voronoi_iteration",
    "ExperimentRecord",
    "SyntheticSpec",
    "generate",
    "load_trees",
    "load_vectors_csv",
    "TreeNode",
    "cosine",
    "l1",
    "l2",
    "parse_tree",
    "tree_edit_distance",
]
