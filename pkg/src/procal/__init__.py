"""Rotation-based condensation perturbation (P2RoCAl) for static datasets and
data streams, with the DC and RP baselines, reconstruction attacks and a
kNN utility harness."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .dataset import Dataset, NormalizationParams, Record, column_stats, emit_csv, load_csv, zscore_normalize
from .grouping import GroupingConfig, Grouping, group_by_kmeans, group_by_size, pairwise_distance
from .perturb import PerturbConfig, PerturbedDataset, perturb_static, perturbation_displacement
from .spectral import apply_rotation, covariance_from_stats, eigendecompose, shuffle_columns
from .stream import StreamConfig, open_stream
from .baselines import (CondensationConfig, RandomRotationConfig, perturb_condensation,
                        perturb_random_rotation)
from .attacks import (AttackReport, fast_ica, ica_attack, known_io_attack,
                      naive_inference_metric, run_attacks, sample_known_pairs)
from .utility import CVConfig, cross_validate, knn_classify, utility_comparison

__all__ = [
    "BACKEND", "Dataset", "NormalizationParams", "Record", "column_stats", "emit_csv", "load_csv",
    "zscore_normalize", "GroupingConfig", "Grouping", "group_by_kmeans", "group_by_size",
    "pairwise_distance", "PerturbConfig", "PerturbedDataset", "perturb_static",
    "perturbation_displacement", "apply_rotation", "covariance_from_stats", "eigendecompose",
    "shuffle_columns", "StreamConfig", "open_stream", "CondensationConfig",
    "RandomRotationConfig", "perturb_condensation", "perturb_random_rotation", "AttackReport",
    "fast_ica", "ica_attack", "known_io_attack", "naive_inference_metric", "run_attacks",
    "sample_known_pairs", "CVConfig", "cross_validate", "knn_classify", "utility_comparison",
]
