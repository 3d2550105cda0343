"""Constant-Q Gaussian filter bank and spectral energy features.

The bank covers [0, f_max] with N unit-peak Gaussian windows whose center
frequencies and bandwidths grow geometrically by a fixed ratio alpha, so
the center/bandwidth quotient (the Q factor) is the same for every window.
A feature vector is the spectral energy collected by each window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signals import Spectrum

# Gaussian passband decays to 10% of its peak at zero frequency:
# exp(-fc1^2 / (2 sigma1^2)) = 0.1  =>  sigma1 = fc1 / sqrt(2 ln 10).
_PASSBAND_DECAY = math.sqrt(2.0 * math.log(10.0))


@dataclass(frozen=True)
class FilterBankConfig:
    """Bank shape: number of windows, geometric ratio, upper frequency."""

    n_bins: int
    alpha: float
    f_max: float

    def __post_init__(self) -> None:
        if int(self.n_bins) != self.n_bins or self.n_bins < 2:
            raise ValueError("n_bins must be an integer >= 2")
        if not (np.isfinite(self.alpha) and self.alpha >= 1.0):
            raise ValueError("alpha must be >= 1")
        if not (np.isfinite(self.f_max) and self.f_max > 0):
            raise ValueError("f_max must be positive")
        object.__setattr__(self, "n_bins", int(self.n_bins))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "f_max", float(self.f_max))


@dataclass(frozen=True)
class FilterBank:
    """Per-window Gaussian parameters plus derived bin boundaries."""

    centers: np.ndarray
    sigmas: np.ndarray
    edges: np.ndarray
    config: FilterBankConfig

    def __post_init__(self) -> None:
        for name in ("centers", "sigmas", "edges"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return self.centers.size

    @property
    def f_max(self) -> float:
        return self.config.f_max

    def weights(self, frequencies: np.ndarray) -> np.ndarray:
        """Unit-peak Gaussian window values, shape (n_bins, len(frequencies))."""
        deltas = frequencies[None, :] - self.centers[:, None]
        return np.exp(-(deltas**2) / (2.0 * self.sigmas[:, None] ** 2))


@dataclass(frozen=True)
class FeatureVector:
    """Spectral energies collected per window, optionally class-labeled."""

    energies: np.ndarray
    label: str | None = None

    def __post_init__(self) -> None:
        energies = np.asarray(self.energies, dtype=np.float64).copy()
        if energies.ndim != 1:
            raise ValueError("energies must be 1-D")
        if not np.all(np.isfinite(energies)):
            raise ValueError("energies contain non-finite values")
        if np.any(energies < 0):
            raise ValueError("energies must be non-negative")
        energies.flags.writeable = False
        object.__setattr__(self, "energies", energies)

    def __len__(self) -> int:
        return self.energies.size


def build_filter_bank(config: FilterBankConfig) -> FilterBank:
    """Construct the Gaussian windows for the given configuration.

    The last window is pinned to f_max.  For alpha > 1, centers and sigmas
    follow the geometric progression fc_j = alpha^(j-1) fc_1 with
    fc_1 = f_max / alpha^(N-1), and sigma_1 set by the 10%-at-DC decay
    condition.  Interior bin edges are the geometric means of adjacent
    centers.  For alpha = 1 the geometric rule would collapse every center
    onto f_max, so the bank degenerates to N regularly spaced windows of
    constant bandwidth with arithmetic-midpoint edges.
    """
    n, alpha, f_max = config.n_bins, config.alpha, config.f_max
    if alpha > 1.0:
        # f_max / alpha^(N-1-j) keeps the last center exactly at f_max.
        centers = f_max / alpha ** np.arange(n - 1, -1, -1, dtype=np.float64)
        inner = np.sqrt(centers[:-1] * centers[1:])
    else:
        centers = f_max * (np.arange(1, n + 1, dtype=np.float64) / n)
        inner = 0.5 * (centers[:-1] + centers[1:])
    sigmas = centers / _PASSBAND_DECAY if alpha > 1.0 else np.full(
        n, centers[0] / _PASSBAND_DECAY
    )
    edges = np.concatenate(([0.0], inner, [f_max]))
    return FilterBank(centers=centers, sigmas=sigmas, edges=edges, config=config)


def extract_features(
    spectrum: Spectrum,
    bank: FilterBank,
    mode: str = "full",
    label: str | None = None,
) -> FeatureVector:
    """Collect per-window spectral energy from a truncated spectrum.

    Each component is sum_w W_j(w) |Y(w)|^2 df over the window's
    integration support.  Mode "full" integrates every bin in
    [0, f_max]; mode "bounded" restricts window j to its own bin
    [edges[j-1], edges[j]), discarding the overlap into neighbours.
    """
    if mode not in ("full", "bounded"):
        raise ValueError(f"unknown integration mode: {mode!r}")
    if abs(spectrum.f_max - bank.f_max) > spectrum.freq_resolution:
        raise ValueError(
            f"spectrum f_max={spectrum.f_max} does not match bank "
            f"f_max={bank.f_max} within one frequency step"
        )
    freqs = spectrum.frequencies
    power = spectrum.magnitudes**2
    df = spectrum.freq_resolution
    weights = bank.weights(freqs)
    if mode == "full":
        energies = weights @ power * df
    else:
        # Half-open bins [e_{j-1}, e_j); the last bin also takes f_max itself.
        splits = np.searchsorted(freqs, bank.edges[1:-1], side="left")
        bounds = np.concatenate(([0], splits, [freqs.size]))
        energies = np.array(
            [
                weights[j, bounds[j] : bounds[j + 1]] @ power[bounds[j] : bounds[j + 1]] * df
                for j in range(bank.n_bins)
            ]
        )
    return FeatureVector(energies=energies, label=label)
