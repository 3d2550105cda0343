import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hapticmetric as hm


def _signal_from_seed(seed: int) -> hm.Signal:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 300))
    return hm.Signal(rng.normal(size=(n, 3)), float(rng.uniform(10.0, 20000.0)))


class TestSignalValidation:
    def test_rejects_single_sample(self):
        with pytest.raises(ValueError, match="too short"):
            hm.Signal(np.zeros((1, 3)), 100.0)

    def test_rejects_non_finite(self):
        samples = np.zeros((4, 3))
        samples[2, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            hm.Signal(samples, 100.0)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError, match="sample_rate"):
            hm.Signal(np.zeros((4, 3)), 0.0)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            hm.Signal(np.zeros((4, 2)), 100.0)

    def test_samples_are_immutable(self):
        signal = hm.Signal(np.zeros((4, 3)), 100.0)
        with pytest.raises(ValueError):
            signal.samples[0, 0] = 1.0


class TestDft321Magnitude:
    def test_two_zero_axes_reduce_to_single_axis_dft(self):
        rng = np.random.default_rng(1)
        samples = np.zeros((128, 3))
        samples[:, 0] = rng.normal(size=128)
        spectrum = hm.dft321_magnitude(hm.Signal(samples, 1000.0))
        expected = np.abs(np.fft.rfft(samples[:, 0]))
        np.testing.assert_allclose(spectrum.magnitudes, expected, rtol=1e-12)

    def test_identical_sinusoid_on_all_axes_scales_by_sqrt3(self):
        fs = 1000.0
        t = np.arange(256) / fs
        tone = 0.7 * np.sin(2 * np.pi * 125.0 * t)
        samples = np.stack([tone, tone, tone], axis=1)
        spectrum = hm.dft321_magnitude(hm.Signal(samples, fs))
        single = np.abs(np.fft.rfft(tone))
        np.testing.assert_allclose(
            spectrum.magnitudes, np.sqrt(3.0) * single, rtol=1e-9, atol=1e-9
        )

    def test_zero_signal_gives_zero_magnitudes(self):
        spectrum = hm.dft321_magnitude(hm.Signal(np.zeros((50, 3)), 2000.0))
        assert np.all(spectrum.magnitudes == 0.0)

    def test_grid_metadata(self):
        spectrum = hm.dft321_magnitude(hm.Signal(np.ones((100, 3)), 1000.0))
        assert spectrum.freq_resolution == 10.0
        assert len(spectrum) == 51
        assert spectrum.f_max == 500.0
        np.testing.assert_allclose(spectrum.frequencies[:3], [0.0, 10.0, 20.0])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_energy_combines_across_axes(self, seed):
        signal = _signal_from_seed(seed)
        spectrum = hm.dft321_magnitude(signal)
        per_axis = np.sum(np.abs(np.fft.rfft(signal.samples, axis=0)) ** 2, axis=1)
        np.testing.assert_allclose(spectrum.magnitudes**2, per_axis, rtol=1e-9)

    def test_deterministic_bit_for_bit(self):
        signal = _signal_from_seed(77)
        first = hm.dft321_magnitude(signal)
        second = hm.dft321_magnitude(signal)
        assert np.array_equal(first.magnitudes, second.magnitudes)


class TestTruncateSpectrum:
    def test_nyquist_is_identity_on_bins(self):
        signal = _signal_from_seed(3)
        spectrum = hm.dft321_magnitude(signal)
        same = hm.truncate_spectrum(spectrum, spectrum.f_max)
        assert np.array_equal(same.magnitudes, spectrum.magnitudes)

    def test_one_khz_cut_of_ten_khz_second(self):
        signal = hm.Signal(np.random.default_rng(0).normal(size=(10000, 3)), 10000.0)
        cut = hm.truncate_spectrum(hm.dft321_magnitude(signal), 1000.0)
        assert len(cut) == 1001
        assert cut.freq_resolution == 1.0

    def test_half_step_keeps_only_dc(self):
        spectrum = hm.dft321_magnitude(hm.Signal(np.ones((100, 3)), 1000.0))
        dc = hm.truncate_spectrum(spectrum, 0.5 * spectrum.freq_resolution)
        assert len(dc) == 1

    def test_rejects_beyond_upper_bound(self):
        spectrum = hm.dft321_magnitude(hm.Signal(np.ones((100, 3)), 1000.0))
        with pytest.raises(ValueError, match="exceeds"):
            hm.truncate_spectrum(spectrum, 501.0)

    def test_rejects_non_positive(self):
        spectrum = hm.dft321_magnitude(hm.Signal(np.ones((100, 3)), 1000.0))
        with pytest.raises(ValueError, match="positive"):
            hm.truncate_spectrum(spectrum, 0.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 1.0))
    def test_never_increases_energy(self, seed, fraction):
        spectrum = hm.dft321_magnitude(_signal_from_seed(seed))
        cut = hm.truncate_spectrum(spectrum, fraction * spectrum.f_max)
        assert cut.total_energy <= spectrum.total_energy + 1e-12


class TestSpectrumValidation:
    def test_rejects_negative_magnitudes(self):
        with pytest.raises(ValueError, match="non-negative"):
            hm.Spectrum(np.array([1.0, -0.1]), 1.0, 1.0)

    def test_rejects_inconsistent_bin_count(self):
        with pytest.raises(ValueError, match="inconsistent"):
            hm.Spectrum(np.ones(5), 1.0, 10.0)
