import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from kljn.noise import (
    BOLTZMANN_K,
    NoiseSpec,
    NoiseTrace,
    estimate_psd,
    integrate_psd,
    johnson_spectral_density,
    mean_square,
    synthesize,
)
from kljn._validation import InvalidParameterError

B = 1000.0
FS = 8000.0


def flat_spec(n, density=2.5e-3):
    return NoiseSpec(spectral_density=density, bandwidth=B, sample_rate=FS, n_samples=n)


class TestJohnsonDensity:
    def test_reference_value(self):
        # 4 * 1.380649e-23 * 1e18 * 2000, evaluated with mpmath
        assert johnson_spectral_density(2000, 1e18) == pytest.approx(0.1104519200, rel=1e-9)

    def test_unit_normalization(self):
        t = 1.0 / (4 * BOLTZMANN_K)
        assert johnson_spectral_density(1.0, t) == pytest.approx(1.0, rel=1e-15)

    def test_linear_in_resistance(self):
        assert johnson_spectral_density(4000, 300) == 2 * johnson_spectral_density(2000, 300)

    @pytest.mark.parametrize("r, t", [(0, 300), (-1, 300), (100, 0), (100, -5)])
    def test_rejects_non_positive(self, r, t):
        with pytest.raises(InvalidParameterError):
            johnson_spectral_density(r, t)


class TestNoiseSpec:
    def test_below_nyquist_rejected(self):
        with pytest.raises(InvalidParameterError):
            NoiseSpec(1.0, bandwidth=1000, sample_rate=1500, n_samples=100)

    @pytest.mark.parametrize("kw", [dict(spectral_density=-1), dict(bandwidth=0), dict(n_samples=1)])
    def test_invalid_fields(self, kw):
        args = dict(spectral_density=1.0, bandwidth=B, sample_rate=FS, n_samples=64)
        args.update(kw)
        with pytest.raises(InvalidParameterError):
            NoiseSpec(**args)

    def test_oversampling(self):
        assert flat_spec(64).oversampling == 4.0


class TestNoiseTrace:
    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidParameterError):
            NoiseTrace([0.0, np.nan, 1.0], 1e-3)

    def test_rejects_short_or_bad_dt(self):
        with pytest.raises(InvalidParameterError):
            NoiseTrace([1.0], 1e-3)
        with pytest.raises(InvalidParameterError):
            NoiseTrace([1.0, 2.0], 0.0)

    def test_samples_are_read_only(self):
        tr = NoiseTrace(np.ones(4), 1.0)
        with pytest.raises(ValueError):
            tr.samples[0] = 2.0


class TestSynthesize:
    def test_zero_density_gives_zero_trace(self):
        tr = synthesize(flat_spec(256, density=0.0), seed=3)
        assert np.all(tr.samples == 0.0)

    def test_same_seed_same_trace(self):
        a = synthesize(flat_spec(1000), seed=11)
        b = synthesize(flat_spec(1000), seed=11)
        assert np.array_equal(a.samples, b.samples)
        assert a.dt == 1 / FS

    def test_different_seeds_uncorrelated(self):
        n = 2 ** 16
        a = synthesize(flat_spec(n), seed=1).samples
        b = synthesize(flat_spec(n), seed=2).samples
        r = np.corrcoef(a, b)[0, 1]
        assert abs(r) < 3 / np.sqrt(n)

    def test_mean_square_matches_density_times_bandwidth(self):
        # 8000 samples at 8 kHz span 1 s = 1000 correlation times of a 1 kHz band
        spec = flat_spec(8000)
        ms = np.array([mean_square(synthesize(spec, seed=s)) for s in range(40)])
        target = spec.spectral_density * B
        se = ms.std(ddof=1) / np.sqrt(ms.size)
        assert abs(ms.mean() - target) < 3 * se
        # 1000 complex in-band bins -> relative spread 1/sqrt(1000)
        assert ms.std(ddof=1) / target == pytest.approx(1 / np.sqrt(1000), rel=0.3)

    def test_gaussian_histogram(self):
        x = synthesize(flat_spec(2 ** 20), seed=5).samples
        assert abs(stats.kurtosis(x)) < 0.1
        assert abs(stats.skew(x)) < 0.02

    def test_too_short_for_band(self):
        spec = NoiseSpec(1.0, bandwidth=10.0, sample_rate=1000.0, n_samples=50)
        with pytest.raises(InvalidParameterError):
            synthesize(spec, seed=0)

    def test_critically_sampled_nyquist_bin(self):
        spec = NoiseSpec(1.0, bandwidth=500.0, sample_rate=1000.0, n_samples=64)
        ms = np.mean([mean_square(synthesize(spec, seed=s)) for s in range(2000)])
        assert ms == pytest.approx(500.0, rel=0.02)

    @settings(max_examples=25, deadline=None)
    @given(c=st.floats(0.05, 20.0), seed=st.integers(0, 2 ** 32))
    def test_scaling(self, c, seed):
        base = synthesize(flat_spec(512, density=1.0), seed=seed).samples
        scaled = synthesize(flat_spec(512, density=c * c), seed=seed).samples
        np.testing.assert_allclose(scaled, c * base, rtol=1e-12, atol=1e-12 * c)


class TestMeanSquare:
    def test_constant(self):
        assert mean_square(NoiseTrace(np.full(10, 3.0), 1.0)) == 9.0

    def test_alternating(self):
        assert mean_square(NoiseTrace([1.0, -1.0, 1.0, -1.0], 1.0)) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(InvalidParameterError):
            mean_square(np.array([]))


class TestEstimatePsd:
    def test_zero_trace(self):
        f, p = estimate_psd(NoiseTrace(np.zeros(1024), 1 / FS), 8)
        assert np.all(p == 0)

    def test_too_short(self):
        with pytest.raises(InvalidParameterError):
            estimate_psd(NoiseTrace(np.ones(100), 1.0), 8)

    def test_flat_band_and_band_limit(self):
        spec = flat_spec(1024 * 1024)
        f, p = estimate_psd(synthesize(spec, seed=9), n_segments=1024)
        in_band = (f > 0.05 * B) & (f < 0.95 * B)
        rel = p[in_band] / spec.spectral_density
        assert np.all(np.abs(rel - 1) < 0.2)
        above = f > 1.1 * B
        assert np.max(p[above]) < 0.01 * spec.spectral_density

    def test_flat_band_with_64_segments(self):
        spec = flat_spec(64 * 512)
        f, p = estimate_psd(synthesize(spec, seed=4), n_segments=64)
        in_band = (f > 0.05 * B) & (f < 0.95 * B)
        assert np.mean(p[in_band]) == pytest.approx(spec.spectral_density, rel=0.2)
        assert np.max(p[f > 1.1 * B]) < 0.05 * spec.spectral_density

    def test_parseval(self):
        tr = synthesize(flat_spec(2 ** 18), seed=21)
        f, p = estimate_psd(tr, n_segments=64)
        assert integrate_psd(f, p) == pytest.approx(mean_square(tr), rel=0.02)
