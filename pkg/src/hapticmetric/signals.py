"""3-axis acceleration signals and their spectral reduction.

A recording is reduced to a single magnitude spectrum by combining the
per-axis DFT magnitudes energy-preservingly (the DFT321 reduction), then
truncated to the frequency range that carries vibrotactile information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _bin_count(f_max: float, freq_resolution: float) -> int:
    """Number of DFT bins covering [0, f_max] at the given resolution.

    floor(f_max / freq_resolution) + 1, guarded against the ratio landing
    a few ulps below an integer.
    """
    ratio = f_max / freq_resolution
    return int(math.floor(ratio * (1.0 + 1e-12) + 1e-12)) + 1


@dataclass(frozen=True)
class Signal:
    """Raw 3-axis acceleration trace.

    samples: (n, 3) array of (ax, ay, az) triples, unit-agnostic.
    sample_rate: sampling frequency in Hz.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ValueError("samples must have shape (n, 3)")
        if samples.shape[0] < 2:
            raise ValueError("signal too short: need at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains non-finite sample values")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError("sample_rate must be a positive finite number")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class Spectrum:
    """Single combined magnitude spectrum on a uniform frequency grid.

    magnitudes: non-negative magnitude per bin, bin k at frequency
    k * freq_resolution.  f_max is the upper frequency bound the spectrum
    covers; bin count equals floor(f_max / freq_resolution) + 1.
    """

    magnitudes: np.ndarray
    freq_resolution: float
    f_max: float

    def __post_init__(self) -> None:
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 1 or mags.size == 0:
            raise ValueError("magnitudes must be a non-empty 1-D array")
        if not np.all(np.isfinite(mags)):
            raise ValueError("magnitudes contain non-finite values")
        if np.any(mags < 0):
            raise ValueError("magnitudes must be non-negative")
        if not (np.isfinite(self.freq_resolution) and self.freq_resolution > 0):
            raise ValueError("freq_resolution must be positive")
        if not (np.isfinite(self.f_max) and self.f_max > 0):
            raise ValueError("f_max must be positive")
        expected = _bin_count(self.f_max, self.freq_resolution)
        if mags.size != expected:
            raise ValueError(
                f"bin count {mags.size} inconsistent with f_max={self.f_max} "
                f"at resolution {self.freq_resolution} (expected {expected})"
            )
        mags = mags.copy()
        mags.flags.writeable = False
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "freq_resolution", float(self.freq_resolution))
        object.__setattr__(self, "f_max", float(self.f_max))

    def __len__(self) -> int:
        return self.magnitudes.size

    @property
    def frequencies(self) -> np.ndarray:
        """Frequency of each bin in Hz."""
        return np.arange(len(self)) * self.freq_resolution

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.magnitudes**2))


def dft321_magnitude(signal: Signal) -> Spectrum:
    """Reduce a 3-axis signal to one magnitude spectrum.

    Per discrete frequency k the combined magnitude is
    sqrt(|X(k)|^2 + |Y(k)|^2 + |Z(k)|^2) over the per-axis DFTs; only
    non-negative frequencies up to Nyquist are retained.  The combination
    preserves per-bin spectral energy, which is all the downstream
    energy features consume (no phase reconstruction).
    """
    transforms = np.fft.rfft(signal.samples, axis=0)
    magnitudes = np.sqrt(np.sum(np.abs(transforms) ** 2, axis=1))
    freq_resolution = signal.sample_rate / len(signal)
    f_max = (magnitudes.size - 1) * freq_resolution
    return Spectrum(magnitudes=magnitudes, freq_resolution=freq_resolution, f_max=f_max)


def truncate_spectrum(spectrum: Spectrum, f_max: float) -> Spectrum:
    """Retain the bins with frequency <= f_max.

    f_max must be positive and must not exceed the spectrum's current
    upper frequency bound.
    """
    if not (np.isfinite(f_max) and f_max > 0):
        raise ValueError("f_max must be positive")
    if f_max > spectrum.f_max * (1.0 + 1e-12):
        raise ValueError(
            f"f_max={f_max} exceeds the spectrum's upper frequency {spectrum.f_max}"
        )
    n_keep = _bin_count(f_max, spectrum.freq_resolution)
    return Spectrum(
        magnitudes=spectrum.magnitudes[:n_keep],
        freq_resolution=spectrum.freq_resolution,
        f_max=f_max,
    )
