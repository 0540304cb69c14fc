"""Graph-degree-based unsupervised anomaly detection.

A sample's degree in a fully connected RBF-kernel similarity graph is a
normality score: populated, dense regions accumulate high degree while
isolated samples do not. This package computes that score with a blocked
kernel sweep, ships the classic k-nn / density-ratio / cluster-distance
baselines, evaluates rankings with tie-aware ROC/AUC, and includes
independent spectral and discrepancy oracles that cross-check the degree
computation.
"""

__version__ = "0.1.0"

from .baselines import (
    Clustering,
    NeighborTable,
    kmeans,
    knn_score,
    knn_table,
    kthnn_score,
    ldcof_score,
    lof_score,
)
from .data import (
    Dataset,
    RawTable,
    Standardization,
    as_dataset,
    load_csv,
    make_toy_fig2,
    standardize,
    write_csv,
)
from .errors import GdbaError
from .evaluation import (
    AucResult,
    ComparisonReport,
    DetectorSpec,
    RocCurve,
    SweepReport,
    auc,
    compare,
    roc_curve,
    sigma_sweep,
)
from .kernel import (
    DegreeVector,
    KernelMatrix,
    KernelParams,
    degree,
    kernel_matrix,
    rbf_entry,
)
from .oracles import (
    EigenSystem,
    IdentityCheck,
    mmd2_empirical,
    mmd2_single,
    rayleigh_quotient,
    run_identity_suite,
    spectral_degree,
    symmetric_eigen,
)
from .scoring import ScoreVector, gdba_score, read_scores_csv, write_scores_csv

__all__ = [
    "AucResult",
    "Clustering",
    "ComparisonReport",
    "Dataset",
    "DegreeVector",
    "DetectorSpec",
    "EigenSystem",
    "GdbaError",
    "IdentityCheck",
    "KernelMatrix",
    "KernelParams",
    "NeighborTable",
    "RawTable",
    "RocCurve",
    "ScoreVector",
    "Standardization",
    "SweepReport",
    "__version__",
    "as_dataset",
    "auc",
    "compare",
    "degree",
    "gdba_score",
    "kernel_matrix",
    "kmeans",
    "knn_score",
    "knn_table",
    "kthnn_score",
    "ldcof_score",
    "load_csv",
    "lof_score",
    "make_toy_fig2",
    "mmd2_empirical",
    "mmd2_single",
    "rayleigh_quotient",
    "rbf_entry",
    "read_scores_csv",
    "roc_curve",
    "run_identity_suite",
    "sigma_sweep",
    "spectral_degree",
    "standardize",
    "symmetric_eigen",
    "write_csv",
    "write_scores_csv",
]
