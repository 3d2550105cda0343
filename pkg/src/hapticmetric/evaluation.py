"""Classifiers and separability metrics over feature sets.

All distances are the squared form used by the metric module; metric
arguments accept None (Euclidean), a MahalanobisModel, or a PSD matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boostmetric import pairwise_distances

# Per-dimension Gaussian variances are floored to keep log-likelihoods finite
# for constant features.
_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts[t, p] = test samples of true class t predicted as class p."""

    counts: np.ndarray
    class_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        c = len(self.class_ids)
        if counts.shape != (c, c):
            raise ValueError("counts must be square and match class_ids")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_ids", tuple(self.class_ids))

    @classmethod
    def from_predictions(
        cls,
        true_labels: Sequence[str],
        predicted_labels: Sequence[str],
        class_ids: Sequence[str] | None = None,
    ) -> "ConfusionMatrix":
        if class_ids is None:
            class_ids = sorted(set(true_labels) | set(predicted_labels))
        index = {label: pos for pos, label in enumerate(class_ids)}
        counts = np.zeros((len(class_ids), len(class_ids)), dtype=np.int64)
        for t, p in zip(true_labels, predicted_labels, strict=True):
            counts[index[t], index[p]] += 1
        return cls(counts=counts, class_ids=tuple(class_ids))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + list(self.class_ids))
            for label, row in zip(self.class_ids, self.counts):
                writer.writerow([label] + [int(c) for c in row])


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Pairwise separability probabilities p[b, c] in [0, 1]; diagonal unused."""

    p: np.ndarray
    class_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=np.float64)
        c = len(self.class_ids)
        if p.shape != (c, c):
            raise ValueError("p must be square and match class_ids")
        off = ~np.eye(c, dtype=bool)
        if np.any(p[off] < 0) or np.any(p[off] > 1):
            raise ValueError("off-diagonal entries must lie in [0, 1]")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "class_ids", tuple(self.class_ids))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + list(self.class_ids))
            for label, row in zip(self.class_ids, self.p):
                writer.writerow([label] + [f"{v:.12g}" for v in row])


def knn_classify(
    train_features: np.ndarray,
    train_labels: Sequence[str],
    test_features: np.ndarray,
    k: int = 3,
    metric=None,
) -> list[str]:
    """Majority vote among the k nearest training points.

    Vote ties break toward the tied class with the smallest summed
    distance inside the neighborhood, then toward the smaller class id.
    """
    train_features = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    train_labels = list(train_labels)
    if train_features.shape[0] == 0:
        raise ValueError("empty training set")
    if len(train_labels) != train_features.shape[0]:
        raise ValueError("train labels and features disagree in length")
    if not 1 <= k <= train_features.shape[0]:
        raise ValueError("k must satisfy 1 <= k <= len(train)")
    dists = pairwise_distances(test_features, train_features, metric)
    neighbor_idx = np.argsort(dists, axis=1, kind="stable")[:, :k]
    predictions = []
    for row, neighbors in enumerate(neighbor_idx):
        votes: dict[str, int] = {}
        summed: dict[str, float] = {}
        for n in neighbors:
            label = train_labels[n]
            votes[label] = votes.get(label, 0) + 1
            summed[label] = summed.get(label, 0.0) + float(dists[row, n])
        best = max(votes.values())
        tied = [label for label, v in votes.items() if v == best]
        tied.sort(key=lambda label: (summed[label], label))
        predictions.append(tied[0])
    return predictions


def gaussian_nb(
    train_features: np.ndarray,
    train_labels: Sequence[str],
    test_features: np.ndarray,
) -> list[str]:
    """Per-class per-dimension Gaussian likelihoods, argmax log-posterior.

    Priors follow class counts (uniform when the classes are balanced);
    posterior ties go to the smaller class id.
    """
    train_features = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    test_features = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    train_labels = list(train_labels)
    class_ids = sorted(set(train_labels))
    means, variances, priors = [], [], []
    labels_arr = np.asarray(train_labels)
    for label in class_ids:
        rows = train_features[labels_arr == label]
        if rows.shape[0] < 2:
            raise ValueError(f"class {label!r} needs >= 2 samples for a variance")
        means.append(rows.mean(axis=0))
        variances.append(np.maximum(rows.var(axis=0), _VARIANCE_FLOOR))
        priors.append(rows.shape[0] / train_features.shape[0])
    means = np.asarray(means)
    variances = np.asarray(variances)
    log_priors = np.log(np.asarray(priors))
    # (n_test, n_classes) joint log-likelihoods
    delta = test_features[:, None, :] - means[None, :, :]
    log_like = -0.5 * np.sum(
        np.log(2.0 * np.pi * variances)[None, :, :] + delta**2 / variances[None, :, :],
        axis=2,
    )
    winners = np.argmax(log_like + log_priors[None, :], axis=1)
    return [class_ids[w] for w in winners]


def accuracy(confusion: ConfusionMatrix) -> float:
    """Fraction of correctly classified samples."""
    total = int(confusion.counts.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(confusion.counts)) / total


def dissimilarity_index(
    features_b: np.ndarray, features_c: np.ndarray, metric=None
) -> float:
    """Fraction of (anchor, positive, impostor) triples that separate b from c.

    Over all ordered pairs (i, j) of distinct class-b samples and every
    class-c sample k, counts the triples with strictly
    d(x_i, x_j) < d(x_i, x_k); ties count against separability.
    """
    features_b = np.atleast_2d(np.asarray(features_b, dtype=np.float64))
    features_c = np.atleast_2d(np.asarray(features_c, dtype=np.float64))
    n_b, n_c = features_b.shape[0], features_c.shape[0]
    if n_b < 2:
        raise ValueError("class b needs at least 2 samples")
    if n_c < 1:
        raise ValueError("class c needs at least 1 sample")
    within = pairwise_distances(features_b, features_b, metric)
    across = pairwise_distances(features_b, features_c, metric)
    satisfied = 0
    for i in range(n_b):
        inter_sorted = np.sort(across[i])
        # for each j != i: count of impostors k with d(i,j) < d(i,k)
        below = n_c - np.searchsorted(inter_sorted, within[i], side="right")
        satisfied += int(below.sum() - below[i])
    return satisfied / (n_b * (n_b - 1) * n_c)


def dissimilarity_matrix(
    features: np.ndarray, labels: Sequence[str], metric=None
) -> DissimilarityMatrix:
    """Dissimilarity index for every ordered class pair."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels_arr = np.asarray(list(labels))
    class_ids = sorted(set(labels))
    if len(class_ids) < 2:
        raise ValueError("need at least 2 classes")
    groups = {label: features[labels_arr == label] for label in class_ids}
    p = np.zeros((len(class_ids), len(class_ids)))
    for b, label_b in enumerate(class_ids):
        for c, label_c in enumerate(class_ids):
            if b == c:
                continue
            p[b, c] = dissimilarity_index(groups[label_b], groups[label_c], metric)
    return DissimilarityMatrix(p=p, class_ids=tuple(class_ids))


def discrimination_error(dissimilarity: DissimilarityMatrix) -> float:
    """Mean of (1 - p) over ordered class pairs, in percent."""
    n = len(dissimilarity.class_ids)
    if n < 2:
        raise ValueError("need at least 2 classes")
    off = ~np.eye(n, dtype=bool)
    return float(np.mean(1.0 - dissimilarity.p[off]) * 100.0)
