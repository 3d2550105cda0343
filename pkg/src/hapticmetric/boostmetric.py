"""Boosted Mahalanobis metric learning from class-labeled triplets.

A positive semidefinite distance matrix is grown as a non-negative
combination of rank-one trace-one terms.  Each round reweights the
training triplets by an exponential loss, extracts the best rank-one
direction from the weighted constraint matrix (column generation), and
takes a convex line-search step along it.  PSD-ness holds by
construction, so no projection or SDP solver is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels

# Power iteration settings for the rank-one direction extraction.
_EIG_TOL = 1e-10
_EIG_MAX_ITER = 10_000


class Triplet(NamedTuple):
    """Indices (anchor, same-class positive, other-class impostor)."""

    i: int
    j: int
    k: int


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs; the defaults mirror the reference protocol."""

    regularizer: float = 1e-7
    max_iterations: int = 3000
    convergence_tol: float = 1e-8
    line_search_tol: float = 1e-9
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.regularizer) and self.regularizer >= 0):
            raise ValueError("regularizer must be non-negative")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ValueError("max_iterations must be a non-negative integer")
        if not (self.convergence_tol > 0 and self.line_search_tol > 0):
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))


@dataclass
class MahalanobisModel:
    """Learned PSD matrix as a weighted sum of rank-one trace-one terms.

    weights: (K,) non-negative step sizes.
    directions: (K, dim) unit vectors; term k contributes
        weights[k] * outer(directions[k], directions[k]).
    matrix: dense (dim, dim) sum of the terms.
    loss_history: objective value before training and after each round.
    """

    weights: np.ndarray
    directions: np.ndarray
    matrix: np.ndarray
    dim: int
    loss_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.directions = np.asarray(self.directions, dtype=np.float64).reshape(
            self.weights.size, self.dim
        )
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.loss_history = np.asarray(self.loss_history, dtype=np.float64).reshape(-1)

    @property
    def n_terms(self) -> int:
        return self.weights.size

    def validate(self, rng_seed: int = 0) -> None:
        """Raise if any structural invariant is violated."""
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError("dense matrix shape does not match dim")
        if np.any(self.weights < 0):
            raise ValueError("term weights must be non-negative")
        if self.n_terms:
            norms = np.linalg.norm(self.directions, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-9):
                raise ValueError("term directions must be unit vectors")
        if not np.allclose(self.matrix, self.matrix.T, rtol=0, atol=1e-9):
            raise ValueError("dense matrix must be symmetric")
        trace = float(np.trace(self.matrix))
        total = float(self.weights.sum())
        if abs(trace - total) > 1e-9 * max(1.0, abs(total)):
            raise ValueError("trace must equal the sum of term weights")
        rng = np.random.default_rng(rng_seed)
        for _ in range(16):
            probe = rng.standard_normal(self.dim)
            quad = float(probe @ self.matrix @ probe)
            if quad < -1e-9 * float(probe @ probe):
                raise ValueError("dense matrix failed a PSD probe")
        if np.any(np.diff(self.loss_history) > 1e-12):
            raise ValueError("loss history must be non-increasing")


@dataclass(frozen=True)
class EmbeddingTransform:
    """Linear projector L with model.matrix ~= L L^T (x -> L^T x)."""

    projection: np.ndarray

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Project row vectors into the embedded space."""
        return np.atleast_2d(np.asarray(points, dtype=np.float64)) @ self.projection


def _as_features(features: np.ndarray) -> np.ndarray:
    feats = np.ascontiguousarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise ValueError("features must be a 2-D (n_samples, dim) array")
    if not np.all(np.isfinite(feats)):
        raise ValueError("features contain non-finite values")
    return feats


def _metric_matrix(metric) -> np.ndarray | None:
    """Normalize a metric argument: None = squared Euclidean."""
    if metric is None:
        return None
    if isinstance(metric, MahalanobisModel):
        return metric.matrix
    return np.asarray(metric, dtype=np.float64)


def generate_triplets(
    features: np.ndarray,
    labels: Sequence[str],
    impostors_per_pair: int = 1,
    rng_seed: int = 0,
) -> list[Triplet]:
    """Build the triplet constraint set from a labeled feature matrix.

    Every ordered same-class pair (i, j), i != j, contributes
    ``impostors_per_pair`` triplets whose third element is drawn uniformly
    without replacement from the other classes.  Deterministic given the
    seed; classes are visited in sorted label order.
    """
    feats = _as_features(features)
    labels = list(labels)
    if len(labels) != feats.shape[0]:
        raise ValueError("labels and features disagree in length")
    if impostors_per_pair < 1:
        raise ValueError("impostors_per_pair must be >= 1")
    by_class: dict[str, list[int]] = {}
    for idx, label in enumerate(labels):
        by_class.setdefault(label, []).append(idx)
    if len(by_class) < 2:
        raise ValueError("need at least 2 classes to form triplets")
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    all_indices = np.arange(len(labels))
    triplets: list[Triplet] = []
    for label in sorted(by_class):
        members = by_class[label]
        if len(members) < 2:
            raise ValueError(f"class {label!r} has fewer than 2 samples")
        impostors = all_indices[np.asarray([labels[t] != label for t in all_indices])]
        if impostors_per_pair > impostors.size:
            raise ValueError(
                f"impostors_per_pair={impostors_per_pair} exceeds the "
                f"{impostors.size} samples outside class {label!r}"
            )
        for i in members:
            for j in members:
                if i == j:
                    continue
                picks = rng.choice(impostors, size=impostors_per_pair, replace=False)
                triplets.extend(Triplet(int(i), int(j), int(k)) for k in picks)
    return triplets


def distance(x: np.ndarray, y: np.ndarray, model: MahalanobisModel) -> float:
    """Squared Mahalanobis form (x - y)^T M (x - y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.shape != (model.dim,):
        raise ValueError("point dimensions do not match the model")
    d = x - y
    return float(d @ model.matrix @ d)


def margin(triplet: Triplet, features: np.ndarray, model: MahalanobisModel) -> float:
    """Impostor distance minus same-class distance; positive = satisfied."""
    feats = _as_features(features)
    if feats.shape[1] != model.dim:
        raise ValueError("feature dimension does not match the model")
    i, j, k = triplet
    return distance(feats[i], feats[k], model) - distance(feats[i], feats[j], model)


def pairwise_distances(a: np.ndarray, b: np.ndarray, metric=None) -> np.ndarray:
    """Squared distances between row sets, (len(a), len(b)).

    metric may be None (Euclidean), a MahalanobisModel, or a PSD matrix.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch between point sets")
    matrix = _metric_matrix(metric)
    if matrix is None:
        am, bm = a, b
    else:
        if matrix.shape != (a.shape[1], a.shape[1]):
            raise ValueError("metric matrix dimension does not match the points")
        am, bm = a @ matrix, b @ matrix
    sq_a = np.einsum("ij,ij->i", am, a)
    sq_b = np.einsum("ij,ij->i", bm, b)
    out = sq_a[:, None] + sq_b[None, :] - 2.0 * (am @ b.T)
    return np.maximum(out, 0.0)


def leading_eigenvector(
    matrix: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Largest-algebraic eigenpair of a symmetric (possibly indefinite) matrix.

    Power iteration on matrix + c*I with c the Gershgorin bound
    (max absolute row sum), which makes the shifted matrix PSD and its
    dominant eigenvector the wanted one.  The start vector comes from the
    supplied generator, so results are reproducible; the sign is fixed by
    making the largest-magnitude component positive.
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    shift = float(np.abs(matrix).sum(axis=1).max())
    if shift == 0.0:
        vec = np.zeros(n)
        vec[0] = 1.0
        return vec, 0.0
    shifted = matrix + shift * np.eye(n)
    start = rng.standard_normal(n)
    vec = _kernels.power_iteration(shifted, start, _EIG_TOL, _EIG_MAX_ITER)
    pivot = int(np.argmax(np.abs(vec)))
    if vec[pivot] < 0:
        vec = -vec
    value = float(vec @ matrix @ vec)
    return vec, value


def _neg_exp_logsum(margins: np.ndarray) -> float:
    """log sum_r exp(-margin_r), stabilized."""
    shifted = -margins
    peak = shifted.max()
    return float(peak + np.log(np.exp(shifted - peak).sum()))


def train_metric(
    triplets: Sequence[Triplet] | np.ndarray,
    features: np.ndarray,
    config: TrainConfig = TrainConfig(),
) -> MahalanobisModel:
    """Learn a PSD Mahalanobis matrix by stagewise exponential-loss boosting.

    Per round: softmax-reweight the triplets by their current margins,
    form the weighted constraint matrix, take its leading algebraic
    eigenvector as the new rank-one term, and pick the step size by
    bisection on the convex step objective.  Stops early when the best
    achievable eigenvalue no longer beats the regularizer by
    ``convergence_tol`` (no improving base learner remains).
    """
    feats = _as_features(features)
    idx = np.asarray(triplets, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != 3 or idx.shape[0] == 0:
        raise ValueError("triplets must be a non-empty sequence of (i, j, k)")
    if idx.min() < 0 or idx.max() >= feats.shape[0]:
        raise ValueError("triplet index out of range")
    dim = feats.shape[1]
    diff_far = np.ascontiguousarray(feats[idx[:, 0]] - feats[idx[:, 2]])
    diff_near = np.ascontiguousarray(feats[idx[:, 0]] - feats[idx[:, 1]])

    rng = np.random.Generator(np.random.PCG64(config.rng_seed))
    margins = np.zeros(idx.shape[0])
    weights: list[float] = []
    directions: list[np.ndarray] = []
    matrix = np.zeros((dim, dim))
    losses = [_neg_exp_logsum(margins)]

    for _ in range(config.max_iterations):
        triplet_weights = _kernels.softmax_neg(margins)
        constraint = _kernels.weighted_gram_diff(diff_far, diff_near, triplet_weights)
        direction, eig_value = leading_eigenvector(constraint, rng)
        if eig_value <= config.regularizer + config.convergence_tol:
            break
        responses = _kernels.triplet_responses(diff_far, diff_near, direction)
        # Bisect in units of the response scale so the bracket tolerance is
        # meaningful regardless of the feature magnitude (raw spectral
        # energies can make the optimal step arbitrarily small).
        scale = float(np.abs(responses).max())
        if scale == 0.0:
            break
        step = (
            _kernels.line_search_step(
                margins,
                responses / scale,
                config.regularizer / scale,
                config.line_search_tol,
            )
            / scale
        )
        if step <= 0.0:
            break
        weights.append(step)
        directions.append(direction)
        matrix += step * np.outer(direction, direction)
        margins = margins + step * responses
        losses.append(_neg_exp_logsum(margins) + config.regularizer * sum(weights))

    return MahalanobisModel(
        weights=np.asarray(weights),
        directions=np.asarray(directions).reshape(len(weights), dim),
        matrix=matrix,
        dim=dim,
        loss_history=np.asarray(losses),
    )


def embedding_transform(
    model: MahalanobisModel, eigen_truncation_tol: float = 0.0
) -> EmbeddingTransform:
    """Factor the model into a projector L with ||L^T x - L^T y||^2 = d(x, y).

    Eigenvalues below ``eigen_truncation_tol * lambda_max`` are dropped
    (at tol 0 only the negative rounding artifacts go).
    """
    if eigen_truncation_tol < 0:
        raise ValueError("eigen_truncation_tol must be non-negative")
    values, vectors = np.linalg.eigh(model.matrix)
    if model.n_terms == 0 or values[-1] <= 0:
        raise ValueError("cannot embed an all-zero model")
    threshold = eigen_truncation_tol * values[-1]
    keep = np.flatnonzero(values >= threshold)[::-1]
    projection = vectors[:, keep] * np.sqrt(values[keep])
    return EmbeddingTransform(projection=projection)


# ---------------------------------------------------------------------------
# model persistence (text format)


def save_model(model: MahalanobisModel, path) -> None:
    """Write a model file.

    Line 1 ``dim=<N>``, line 2 ``terms=<K>``, then K lines ``w;z1,...,zN``,
    then the dense matrix row-major as N comma-separated lines, then
    ``loss_history=`` comma-separated.  Floats carry 17 significant digits
    so a load/save round trip is exact.
    """
    lines = [f"dim={model.dim}", f"terms={model.n_terms}"]
    for w, z in zip(model.weights, model.directions):
        lines.append(f"{w:.17g};" + ",".join(f"{c:.17g}" for c in z))
    for row in model.matrix:
        lines.append(",".join(f"{c:.17g}" for c in row))
    lines.append("loss_history=" + ",".join(f"{c:.17g}" for c in model.loss_history))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MahalanobisModel:
    """Read a model file written by save_model."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [line.rstrip("\n") for line in fh]
    try:
        dim = int(lines[0].removeprefix("dim="))
        n_terms = int(lines[1].removeprefix("terms="))
        weights = np.empty(n_terms)
        directions = np.empty((n_terms, dim))
        for t in range(n_terms):
            w_part, z_part = lines[2 + t].split(";")
            weights[t] = float(w_part)
            directions[t] = [float(c) for c in z_part.split(",")]
        matrix = np.array(
            [
                [float(c) for c in lines[2 + n_terms + r].split(",")]
                for r in range(dim)
            ]
        )
        loss_part = lines[2 + n_terms + dim].removeprefix("loss_history=")
        losses = np.array([float(c) for c in loss_part.split(",")] if loss_part else [])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc
    if matrix.shape != (dim, dim) or not np.all(np.isfinite(matrix)):
        raise ValueError(f"malformed model file {path}: bad dense matrix")
    return MahalanobisModel(
        weights=weights,
        directions=directions,
        matrix=matrix,
        dim=dim,
        loss_history=losses,
    )
