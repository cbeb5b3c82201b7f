"""Gender-fairness audits for facial expression classifiers."""

from ._fairscope import (
    FairscopeError,
    __version__,
    aggregate_stats,
    apply_augmentation,
    canonical_manifest,
    class_metrics,
    decode,
    featurize,
    fuse_label,
    gaps,
    ingest,
    kmeans,
    load_metrics,
    make_split,
    plan_augmentation,
    rank,
    reconstruct_counts,
    select_keyframes,
    softmax,
    table_from_records,
    verify_claims,
    verify_paper,
)

__all__ = [
    "FairscopeError",
    "__version__",
    "aggregate_stats",
    "apply_augmentation",
    "canonical_manifest",
    "class_metrics",
    "decode",
    "featurize",
    "fuse_label",
    "gaps",
    "ingest",
    "kmeans",
    "load_metrics",
    "make_split",
    "plan_augmentation",
    "rank",
    "reconstruct_counts",
    "select_keyframes",
    "softmax",
    "table_from_records",
    "verify_claims",
    "verify_paper",
]
