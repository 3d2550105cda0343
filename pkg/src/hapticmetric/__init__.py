"""Spectral texture features and boosted Mahalanobis metric learning.

Pipeline: 3-axis acceleration recordings are reduced to a single
magnitude spectrum, summarized by a constant-Q Gaussian filter bank into
compact energy features, and compared under a distance matrix learned by
boosting rank-one updates from class-labeled triplets.
"""

from ._kernels import USING_NUMBA
from .boostmetric import (
    EmbeddingTransform,
    MahalanobisModel,
    TrainConfig,
    Triplet,
    distance,
    embedding_transform,
    generate_triplets,
    load_model,
    margin,
    pairwise_distances,
    save_model,
    train_metric,
)
from .dataio import (
    Dataset,
    SynthSpec,
    load_dataset,
    load_synth_spec,
    read_features_csv,
    save_dataset,
    synth_corpus,
    write_features_csv,
)
from .evaluation import (
    ConfusionMatrix,
    DissimilarityMatrix,
    accuracy,
    discrimination_error,
    dissimilarity_index,
    dissimilarity_matrix,
    gaussian_nb,
    knn_classify,
)
from .filterbank import (
    FeatureVector,
    FilterBank,
    FilterBankConfig,
    build_filter_bank,
    extract_features,
)
from .signals import Signal, Spectrum, dft321_magnitude, truncate_spectrum

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "ConfusionMatrix",
    "Dataset",
    "DissimilarityMatrix",
    "EmbeddingTransform",
    "FeatureVector",
    "FilterBank",
    "FilterBankConfig",
    "MahalanobisModel",
    "Signal",
    "Spectrum",
    "SynthSpec",
    "TrainConfig",
    "Triplet",
    "accuracy",
    "build_filter_bank",
    "dft321_magnitude",
    "discrimination_error",
    "dissimilarity_index",
    "dissimilarity_matrix",
    "distance",
    "embedding_transform",
    "extract_features",
    "gaussian_nb",
    "generate_triplets",
    "knn_classify",
    "load_dataset",
    "load_model",
    "load_synth_spec",
    "margin",
    "pairwise_distances",
    "read_features_csv",
    "save_dataset",
    "save_model",
    "synth_corpus",
    "train_metric",
    "truncate_spectrum",
    "write_features_csv",
]
