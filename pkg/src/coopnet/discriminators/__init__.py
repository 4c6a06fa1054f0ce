from coopnet.discriminators.adjacency import (
    FEATURE_NAMES,
    AdjacencyModel,
    adjacency_features,
    predict_adjacency,
    score_adjacency,
    train_adjacency,
)
from coopnet.discriminators.discourse import (
    NormalizationSpec,
    OutOfRange,
    RoleRules,
    f_n,
    label_roles_heuristic,
    score_coverage,
    score_ordering,
)
from coopnet.discriminators.factuality import EvidenceSpanSet, extract_spans, score_factuality
from coopnet.discriminators.scores import (
    EPS,
    OBJECTIVES,
    DegenerateData,
    DiscriminatorScore,
    EmptyRoles,
    FeatureMismatch,
    MissingExternalProbs,
    MissingRoles,
    MissingSaliency,
    ScoringError,
    clamped_log,
)

__all__ = [
    "EPS",
    "FEATURE_NAMES",
    "OBJECTIVES",
    "AdjacencyModel",
    "DegenerateData",
    "DiscriminatorScore",
    "EmptyRoles",
    "EvidenceSpanSet",
    "FeatureMismatch",
    "MissingExternalProbs",
    "MissingRoles",
    "MissingSaliency",
    "NormalizationSpec",
    "OutOfRange",
    "RoleRules",
    "ScoringError",
    "adjacency_features",
    "clamped_log",
    "extract_spans",
    "f_n",
    "label_roles_heuristic",
    "predict_adjacency",
    "score_adjacency",
    "score_coverage",
    "score_factuality",
    "score_ordering",
    "train_adjacency",
]
