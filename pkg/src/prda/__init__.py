"""Progressive domain augmentation for unsupervised domain adaptation.

Operates on pre-extracted feature vectors: multiple-subspace generation
per domain, chordal-metric matching and closed-form alignment of the
subspaces, convex interpolation of virtual intermediate domains, and a
progressive pseudo-label augmentation loop around a softmax classifier.
"""

from .classifier import SoftmaxClassifier, gradient_check
from .data import (
    Dataset,
    ShiftSpec,
    divergence_probe,
    domain_probe_scores,
    load_dataset,
    save_dataset,
    synth_domain_pair,
)
from .exceptions import (
    ConfigError,
    DataError,
    DegenerateInput,
    ParseError,
    PrdaError,
    ShapeError,
    SingleClassError,
)
from .grassmann import (
    AlignedPair,
    Matching,
    chordal_distance,
    compute_alignment,
    match_subspaces,
    project,
)
from .linalg import (
    Basis,
    frobenius_distance,
    pca_top_k,
    reconstruction_error,
    reconstruction_errors,
)
from .mixup import (
    DEFAULT_LAMBDA_SCHEDULE,
    VirtualDomain,
    check_lambda_schedule,
    generate_virtual_domain,
    mixup_pair,
)
from .pipeline import (
    AdaptationResult,
    ProgressiveDomainAugmentation,
    RoundReport,
    SubspaceAlignmentBaseline,
    evaluate,
)
from .subspaces import (
    CollectionStats,
    SubspaceCollection,
    collection_stats,
    generate_subspaces,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationResult",
    "AlignedPair",
    "Basis",
    "CollectionStats",
    "ConfigError",
    "DataError",
    "Dataset",
    "DEFAULT_LAMBDA_SCHEDULE",
    "DegenerateInput",
    "Matching",
    "ParseError",
    "PrdaError",
    "ProgressiveDomainAugmentation",
    "RoundReport",
    "ShapeError",
    "ShiftSpec",
    "SingleClassError",
    "SoftmaxClassifier",
    "SubspaceAlignmentBaseline",
    "SubspaceCollection",
    "VirtualDomain",
    "check_lambda_schedule",
    "chordal_distance",
    "collection_stats",
    "compute_alignment",
    "divergence_probe",
    "domain_probe_scores",
    "evaluate",
    "frobenius_distance",
    "generate_subspaces",
    "generate_virtual_domain",
    "gradient_check",
    "load_dataset",
    "match_subspaces",
    "mixup_pair",
    "pca_top_k",
    "project",
    "reconstruction_error",
    "reconstruction_errors",
    "save_dataset",
    "synth_domain_pair",
]
