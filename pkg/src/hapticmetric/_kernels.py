"""Hot numeric kernels for metric training, in two lanes.

Every kernel has a pure-numpy implementation and a numba ``@njit``
twin.  The numba lane is selected by default whenever numba imports
cleanly; set ``HAPTICMETRIC_DISABLE_NUMBA=1`` (read once at import time)
to force the numpy lane.  Both lanes stay importable so
``benchmarks/bench_kernels.py`` can compare them in one process.

Array arguments are contiguous float64; kernels never mutate inputs.
"""

from __future__ import annotations

import math
import os

import numpy as np

_DISABLE = os.environ.get("HAPTICMETRIC_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not _DISABLE

# Doubling the line-search bracket stops here; reaching the cap means the
# regularizer is below every triplet response and the objective decreases
# for every probed step, so the last verified step is taken.
_MAX_DOUBLINGS = 64


# ---------------------------------------------------------------------------
# numpy lane


def softmax_neg_numpy(margins: np.ndarray) -> np.ndarray:
    """Normalized triplet weights exp(-margin_r) / sum_s exp(-margin_s)."""
    shifted = -margins - (-margins).max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def weighted_gram_diff_numpy(
    diff_far: np.ndarray, diff_near: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """sum_r w_r (far_r far_r^T - near_r near_r^T), symmetric (N, N)."""
    far_w = diff_far * weights[:, None]
    near_w = diff_near * weights[:, None]
    return far_w.T @ diff_far - near_w.T @ diff_near


def triplet_responses_numpy(
    diff_far: np.ndarray, diff_near: np.ndarray, direction: np.ndarray
) -> np.ndarray:
    """Per-triplet margin change per unit step along direction z: (z.far)^2 - (z.near)^2."""
    return (diff_far @ direction) ** 2 - (diff_near @ direction) ** 2


def step_objective_numpy(
    margins: np.ndarray, responses: np.ndarray, step: float, regularizer: float
) -> float:
    """g(w) = log sum_r exp(-(margin_r + w resp_r)) + regularizer * w."""
    shifted = -(margins + step * responses)
    peak = shifted.max()
    return float(peak + np.log(np.exp(shifted - peak).sum()) + regularizer * step)


def step_gradient_numpy(
    margins: np.ndarray, responses: np.ndarray, step: float, regularizer: float
) -> float:
    """g'(w): regularizer minus the softmax-weighted mean response."""
    shifted = -(margins + step * responses)
    weights = np.exp(shifted - shifted.max())
    return float(regularizer - (weights @ responses) / weights.sum())


def line_search_step_numpy(
    margins: np.ndarray, responses: np.ndarray, regularizer: float, tol: float
) -> float:
    """Minimize the convex step objective over w >= 0 by bisection on g'."""
    if step_gradient_numpy(margins, responses, 0.0, regularizer) >= 0.0:
        return 0.0
    lo = 0.0
    hi = 1.0
    bracketed = False
    for _ in range(_MAX_DOUBLINGS):
        if step_gradient_numpy(margins, responses, hi, regularizer) > 0.0:
            bracketed = True
            break
        lo = hi  # gradient verified non-positive here
        hi *= 2.0
    if not bracketed:
        # The objective keeps descending past every probed step; return the
        # largest step with a verified non-positive gradient.
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if step_gradient_numpy(margins, responses, mid, regularizer) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def power_iteration_numpy(
    matrix: np.ndarray, start: np.ndarray, tol: float, max_iter: int
) -> np.ndarray:
    """Dominant eigenvector of a PSD matrix by plain power iteration."""
    vec = start / np.linalg.norm(start)
    for _ in range(max_iter):
        nxt = matrix @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return vec
        nxt = nxt / norm
        delta = np.abs(nxt - vec).max()
        vec = nxt
        if delta <= tol:
            break
    return vec


# ---------------------------------------------------------------------------
# numba lane

if HAVE_NUMBA:

    @njit(cache=True)
    def softmax_neg_numba(margins):
        n = margins.size
        peak = -margins[0]
        for r in range(1, n):
            if -margins[r] > peak:
                peak = -margins[r]
        weights = np.empty(n)
        total = 0.0
        for r in range(n):
            w = math.exp(-margins[r] - peak)
            weights[r] = w
            total += w
        for r in range(n):
            weights[r] /= total
        return weights

    @njit(cache=True)
    def weighted_gram_diff_numba(diff_far, diff_near, weights):
        n_triplets, dim = diff_far.shape
        out = np.zeros((dim, dim))
        for r in range(n_triplets):
            w = weights[r]
            for a in range(dim):
                far_a = w * diff_far[r, a]
                near_a = w * diff_near[r, a]
                for b in range(dim):
                    out[a, b] += far_a * diff_far[r, b] - near_a * diff_near[r, b]
        return out

    @njit(cache=True)
    def triplet_responses_numba(diff_far, diff_near, direction):
        n_triplets, dim = diff_far.shape
        out = np.empty(n_triplets)
        for r in range(n_triplets):
            far = 0.0
            near = 0.0
            for a in range(dim):
                far += diff_far[r, a] * direction[a]
                near += diff_near[r, a] * direction[a]
            out[r] = far * far - near * near
        return out

    @njit(cache=True)
    def step_objective_numba(margins, responses, step, regularizer):
        n = margins.size
        peak = -(margins[0] + step * responses[0])
        for r in range(1, n):
            t = -(margins[r] + step * responses[r])
            if t > peak:
                peak = t
        total = 0.0
        for r in range(n):
            total += math.exp(-(margins[r] + step * responses[r]) - peak)
        return peak + math.log(total) + regularizer * step

    @njit(cache=True)
    def step_gradient_numba(margins, responses, step, regularizer):
        n = margins.size
        peak = -(margins[0] + step * responses[0])
        for r in range(1, n):
            t = -(margins[r] + step * responses[r])
            if t > peak:
                peak = t
        total = 0.0
        weighted = 0.0
        for r in range(n):
            w = math.exp(-(margins[r] + step * responses[r]) - peak)
            total += w
            weighted += w * responses[r]
        return regularizer - weighted / total

    @njit(cache=True)
    def line_search_step_numba(margins, responses, regularizer, tol):
        if step_gradient_numba(margins, responses, 0.0, regularizer) >= 0.0:
            return 0.0
        lo = 0.0
        hi = 1.0
        bracketed = False
        for _ in range(_MAX_DOUBLINGS):
            if step_gradient_numba(margins, responses, hi, regularizer) > 0.0:
                bracketed = True
                break
            lo = hi
            hi *= 2.0
        if not bracketed:
            return lo
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if step_gradient_numba(margins, responses, mid, regularizer) > 0.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    @njit(cache=True)
    def power_iteration_numba(matrix, start, tol, max_iter):
        vec = start / np.linalg.norm(start)
        for _ in range(max_iter):
            nxt = matrix @ vec
            norm = np.linalg.norm(nxt)
            if norm == 0.0:
                return vec
            nxt = nxt / norm
            delta = 0.0
            for i in range(vec.size):
                d = abs(nxt[i] - vec[i])
                if d > delta:
                    delta = d
            vec = nxt
            if delta <= tol:
                break
        return vec

else:
    softmax_neg_numba = None
    weighted_gram_diff_numba = None
    triplet_responses_numba = None
    step_objective_numba = None
    step_gradient_numba = None
    line_search_step_numba = None
    power_iteration_numba = None


if USING_NUMBA:
    softmax_neg = softmax_neg_numba
    weighted_gram_diff = weighted_gram_diff_numba
    triplet_responses = triplet_responses_numba
    step_objective = step_objective_numba
    step_gradient = step_gradient_numba
    line_search_step = line_search_step_numba
    power_iteration = power_iteration_numba
else:
    softmax_neg = softmax_neg_numpy
    weighted_gram_diff = weighted_gram_diff_numpy
    triplet_responses = triplet_responses_numpy
    step_objective = step_objective_numpy
    step_gradient = step_gradient_numpy
    line_search_step = line_search_step_numpy
    power_iteration = power_iteration_numpy
