"""Timing comparison of the numba and numpy kernel lanes.

Runs each hot kernel on a realistic training-sized problem, reports
per-call times and the max deviation between lanes, then times a short
end-to-end metric training in whichever lane is active.

Usage: python benchmarks/bench_kernels.py [--triplets 6210] [--dim 11]
       [--repeats 200]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hapticmetric import _kernels
from hapticmetric.boostmetric import TrainConfig, train_metric


def _timeit(fn, args, repeats):
    fn(*args)  # warm-up (numba compiles on first call)
    start = time.perf_counter()
    for _ in range(repeats):
        result = fn(*args)
    return (time.perf_counter() - start) / repeats, result


def bench_kernels(n_triplets: int, dim: int, repeats: int) -> None:
    rng = np.random.default_rng(7)
    diff_far = rng.normal(size=(n_triplets, dim))
    diff_near = rng.normal(size=(n_triplets, dim))
    margins = rng.normal(size=n_triplets) ** 2
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    responses = _kernels.triplet_responses_numpy(diff_far, diff_near, direction)
    sym = rng.normal(size=(dim, dim))
    sym = sym + sym.T
    shifted = sym + np.abs(sym).sum(axis=1).max() * np.eye(dim)
    start_vec = rng.normal(size=dim)

    cases = [
        ("softmax_neg", (margins,)),
        ("weighted_gram_diff", (diff_far, diff_near, np.full(n_triplets, 1.0 / n_triplets))),
        ("triplet_responses", (diff_far, diff_near, direction)),
        ("step_gradient", (margins, responses, 0.5, 1e-7)),
        ("line_search_step", (margins, responses, 1e-7, 1e-9)),
        ("power_iteration", (shifted, start_vec, 1e-10, 10_000)),
    ]

    print(f"{'kernel':<20}{'numpy [us]':>12}{'numba [us]':>12}{'speedup':>9}{'max|diff|':>12}")
    for name, args in cases:
        np_fn = getattr(_kernels, f"{name}_numpy")
        nb_fn = getattr(_kernels, f"{name}_numba")
        t_np, r_np = _timeit(np_fn, args, repeats)
        if nb_fn is None:
            print(f"{name:<20}{t_np * 1e6:>12.1f}{'n/a':>12}{'':>9}{'':>12}")
            continue
        t_nb, r_nb = _timeit(nb_fn, args, repeats)
        diff = float(np.max(np.abs(np.asarray(r_np) - np.asarray(r_nb))))
        print(
            f"{name:<20}{t_np * 1e6:>12.1f}{t_nb * 1e6:>12.1f}"
            f"{t_np / t_nb:>9.2f}{diff:>12.2e}"
        )


_LANE_KERNELS = (
    "softmax_neg",
    "weighted_gram_diff",
    "triplet_responses",
    "step_objective",
    "step_gradient",
    "line_search_step",
    "power_iteration",
)


def _bind_lane(lane: str) -> None:
    for name in _LANE_KERNELS:
        setattr(_kernels, name, getattr(_kernels, f"{name}_{lane}"))


def bench_training(n_triplets: int, dim: int) -> None:
    rng = np.random.default_rng(11)
    n_per = 12
    centers = rng.normal(scale=4.0, size=(6, dim))
    features = np.vstack([c + rng.normal(size=(n_per, dim)) for c in centers])
    labels = np.repeat(np.arange(6), n_per)
    triplets = []
    for c in range(6):
        members = np.flatnonzero(labels == c)
        others = np.flatnonzero(labels != c)
        for i in members:
            for j in members:
                if i != j:
                    triplets.append((i, j, rng.choice(others)))
    triplets = np.asarray(triplets[:n_triplets])
    config = TrainConfig(max_iterations=100)
    lanes = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    default = "numba" if _kernels.USING_NUMBA else "numpy"
    print()
    try:
        for lane in lanes:
            _bind_lane(lane)
            train_metric(triplets[:50], features, TrainConfig(max_iterations=5))
            start = time.perf_counter()
            model = train_metric(triplets, features, config)
            elapsed = time.perf_counter() - start
            print(
                f"train_metric ({lane} lane): {model.n_terms} rounds on "
                f"{len(triplets)} triplets: {elapsed:.3f} s"
            )
    finally:
        _bind_lane(default)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--triplets", type=int, default=6210)
    parser.add_argument("--dim", type=int, default=11)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    print(
        f"active lane: {'numba' if _kernels.USING_NUMBA else 'numpy'} "
        f"(numba available: {_kernels.HAVE_NUMBA})"
    )
    bench_kernels(args.triplets, args.dim, args.repeats)
    bench_training(args.triplets, args.dim)


if __name__ == "__main__":
    main()
