import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hapticmetric as hm

DECAY = math.sqrt(2.0 * math.log(10.0))  # ~2.145966026289347


def reference_bank(n=11, alpha=1.8, f_max=1000.0):
    return hm.build_filter_bank(hm.FilterBankConfig(n, alpha, f_max))


def truncated_gaussian_integral(center, sigma, upper):
    """Closed-form integral of the unit-peak Gaussian over [0, upper]."""
    scale = sigma * math.sqrt(math.pi / 2.0)
    return scale * (
        math.erf((upper - center) / (sigma * math.sqrt(2.0)))
        + math.erf(center / (sigma * math.sqrt(2.0)))
    )


class TestBuildFilterBank:
    def test_eleven_bin_closed_form(self):
        bank = reference_bank()
        assert bank.centers[0] == pytest.approx(1000.0 / 1.8**10, rel=1e-12)
        assert bank.centers[0] == pytest.approx(2.8007538972582426, abs=1e-9)
        assert bank.sigmas[0] == pytest.approx(2.8007538972582426 / DECAY, rel=1e-12)
        assert bank.centers[-1] == 1000.0

    def test_two_bin_octave_case(self):
        bank = hm.build_filter_bank(hm.FilterBankConfig(2, 2.0, 100.0))
        np.testing.assert_allclose(bank.centers, [50.0, 100.0])
        assert bank.sigmas[0] == pytest.approx(50.0 / DECAY, rel=1e-12)
        assert bank.sigmas[1] == pytest.approx(100.0 / DECAY, rel=1e-12)

    def test_unit_alpha_falls_back_to_linear_spacing(self):
        bank = hm.build_filter_bank(hm.FilterBankConfig(4, 1.0, 400.0))
        np.testing.assert_allclose(bank.centers, [100.0, 200.0, 300.0, 400.0])
        assert np.all(bank.sigmas == bank.sigmas[0])
        assert bank.sigmas[0] == pytest.approx(100.0 / DECAY, rel=1e-12)
        np.testing.assert_allclose(bank.edges, [0.0, 150.0, 250.0, 350.0, 400.0])

    def test_geometric_progression_invariant(self):
        bank = reference_bank()
        n = bank.n_bins
        ratios = bank.config.alpha ** np.arange(n)
        np.testing.assert_allclose(bank.centers, ratios * bank.centers[0], rtol=1e-9)
        np.testing.assert_allclose(bank.sigmas, ratios * bank.sigmas[0], rtol=1e-9)

    def test_q_factor_constant(self):
        bank = reference_bank()
        q = bank.centers / bank.sigmas
        np.testing.assert_allclose(q, q[0], rtol=1e-9)

    def test_edges_structure(self):
        bank = reference_bank()
        assert bank.edges[0] == 0.0
        assert bank.edges[-1] == bank.f_max
        assert np.all(np.diff(bank.edges) >= 0)
        np.testing.assert_allclose(
            bank.edges[1:-1], np.sqrt(bank.centers[:-1] * bank.centers[1:]), rtol=1e-12
        )

    def test_passband_decays_to_ten_percent_at_dc(self):
        bank = reference_bank()
        at_dc = np.exp(-bank.centers[0] ** 2 / (2.0 * bank.sigmas[0] ** 2))
        assert at_dc == pytest.approx(0.1, rel=1e-12)

    @pytest.mark.parametrize(
        "n,alpha,f_max",
        [(1, 1.8, 1000.0), (11, 0.9, 1000.0), (11, 1.8, 0.0), (11, 1.8, -5.0)],
    )
    def test_rejects_bad_config(self, n, alpha, f_max):
        with pytest.raises(ValueError):
            hm.FilterBankConfig(n, alpha, f_max)


class TestExtractFeatures:
    def test_zero_spectrum_gives_zero_features(self):
        bank = reference_bank()
        spectrum = hm.Spectrum(np.zeros(1001), 1.0, 1000.0)
        for mode in ("full", "bounded"):
            assert np.all(hm.extract_features(spectrum, bank, mode).energies == 0.0)

    @pytest.mark.parametrize("mode", ["full", "bounded"])
    def test_pure_tone_lands_in_its_own_bin(self, mode):
        bank = reference_bank()
        df = 0.5
        freqs = np.arange(int(1000.0 / df) + 1) * df
        for j, center in enumerate(bank.centers):
            magnitudes = np.zeros_like(freqs)
            magnitudes[int(np.argmin(np.abs(freqs - center)))] = 1.0
            spectrum = hm.Spectrum(magnitudes, df, 1000.0)
            energies = hm.extract_features(spectrum, bank, mode).energies
            assert int(np.argmax(energies)) == j

    def test_flat_power_matches_gaussian_integral(self):
        # |Y(w)|^2 = 1 everywhere: each energy approximates the boundary-
        # truncated Gaussian integral; components grow with the bandwidth
        # except at the top window, which loses half its support.
        bank = reference_bank()
        df = 0.25
        spectrum = hm.Spectrum(np.ones(int(1000.0 / df) + 1), df, 1000.0)
        energies = hm.extract_features(spectrum, bank, "full").energies
        expected = np.array(
            [
                truncated_gaussian_integral(c, s, 1000.0)
                for c, s in zip(bank.centers, bank.sigmas)
            ]
        )
        np.testing.assert_allclose(energies, expected, rtol=0.02)
        assert np.all(np.diff(energies[:-1]) > 0)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 1e6))
    def test_linearity_in_power(self, scale):
        bank = reference_bank(n=5)
        rng = np.random.default_rng(9)
        magnitudes = rng.uniform(size=201)
        base = hm.Spectrum(magnitudes, 5.0, 1000.0)
        scaled = hm.Spectrum(np.sqrt(scale) * magnitudes, 5.0, 1000.0)
        for mode in ("full", "bounded"):
            np.testing.assert_allclose(
                hm.extract_features(scaled, bank, mode).energies,
                scale * hm.extract_features(base, bank, mode).energies,
                rtol=1e-12,
                atol=1e-300,
            )

    def test_raising_one_bin_never_lowers_any_component(self):
        bank = reference_bank()
        rng = np.random.default_rng(4)
        magnitudes = rng.uniform(size=501)
        base = hm.Spectrum(magnitudes, 2.0, 1000.0)
        for mode in ("full", "bounded"):
            before = hm.extract_features(base, bank, mode).energies
            for k in (0, 100, 250, 500):
                bumped = magnitudes.copy()
                bumped[k] += 1.0
                after = hm.extract_features(hm.Spectrum(bumped, 2.0, 1000.0), bank, mode)
                assert np.all(after.energies >= before - 1e-15)

    def test_bounded_never_exceeds_full(self):
        bank = reference_bank()
        rng = np.random.default_rng(12)
        spectrum = hm.Spectrum(rng.uniform(size=2001), 0.5, 1000.0)
        full = hm.extract_features(spectrum, bank, "full").energies
        bounded = hm.extract_features(spectrum, bank, "bounded").energies
        assert np.all(bounded <= full + 1e-12)

    def test_rejects_grid_mismatch(self):
        bank = reference_bank()
        spectrum = hm.Spectrum(np.ones(801), 1.0, 800.0)
        with pytest.raises(ValueError, match="does not match"):
            hm.extract_features(spectrum, bank)

    def test_rejects_unknown_mode(self):
        bank = reference_bank()
        spectrum = hm.Spectrum(np.ones(1001), 1.0, 1000.0)
        with pytest.raises(ValueError, match="mode"):
            hm.extract_features(spectrum, bank, mode="windowed")

    def test_label_passthrough(self):
        bank = reference_bank()
        spectrum = hm.Spectrum(np.ones(1001), 1.0, 1000.0)
        assert hm.extract_features(spectrum, bank, label="wood").label == "wood"

    def test_feature_vector_rejects_negative_energy(self):
        with pytest.raises(ValueError, match="non-negative"):
            hm.FeatureVector(np.array([1.0, -2.0]))
