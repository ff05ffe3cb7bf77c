"""Gated multi-modal fusion hashing with exact Hamming retrieval."""

from ._core import (
    CodeMatrix,
    DatasetSplit,
    EmbeddingSet,
    EvaluationError,
    FormatError,
    Model,
    NumericError,
    average_precision,
    binarize,
    finite_diff_check,
    gate_forward,
    generate_synthetic,
    hash_forward,
    mean_average_precision,
    rank_all,
    search_topk,
    train,
)

__all__ = [
    "CodeMatrix",
    "DatasetSplit",
    "EmbeddingSet",
    "EvaluationError",
    "FormatError",
    "Model",
    "NumericError",
    "average_precision",
    "binarize",
    "finite_diff_check",
    "gate_forward",
    "generate_synthetic",
    "hash_forward",
    "mean_average_precision",
    "rank_all",
    "search_topk",
    "train",
]
