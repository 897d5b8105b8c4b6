"""Band-limited white Gaussian noise: synthesis and simple estimators.

All densities are one-sided (V^2/Hz for voltages, A^2/Hz for currents), so a
flat density ``S`` over ``[0, B]`` carries a mean-square value of ``S * B``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal

from ._validation import (
    InvalidParameterError,
    check_count,
    check_nonnegative,
    check_positive,
    check_samples,
)

#: Boltzmann constant, J/K (exact SI value).
BOLTZMANN_K = 1.380649e-23


@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of a band-limited white noise record.

    Parameters
    ----------
    spectral_density : float
        One-sided power spectral density inside the band.
    bandwidth : float
        Upper band edge in Hz; the density is zero above it.
    sample_rate : float
        Sampling frequency in Hz, at least twice the bandwidth.
    n_samples : int
        Record length.
    """

    spectral_density: float
    bandwidth: float
    sample_rate: float
    n_samples: int

    def __post_init__(self):
        check_nonnegative(self.spectral_density, "spectral_density")
        check_positive(self.bandwidth, "bandwidth")
        check_positive(self.sample_rate, "sample_rate")
        check_count(self.n_samples, "n_samples", 2)
        if self.sample_rate < 2 * self.bandwidth * (1 - 1e-12):
            raise InvalidParameterError(
                f"sample_rate {self.sample_rate} Hz is below the Nyquist rate "
                f"2*bandwidth = {2 * self.bandwidth} Hz"
            )

    @property
    def oversampling(self):
        return self.sample_rate / (2 * self.bandwidth)

    @property
    def dt(self):
        return 1.0 / self.sample_rate

    @property
    def duration(self):
        return self.n_samples / self.sample_rate


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    """A uniformly sampled waveform. ``samples`` is stored read-only."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        arr = check_samples(self.samples, "samples", min_length=2).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        check_positive(self.dt, "dt")

    def __len__(self):
        return self.samples.size

    @property
    def times(self):
        return np.arange(self.samples.size) * self.dt

    @property
    def sample_rate(self):
        return 1.0 / self.dt

    def scaled(self, factor):
        return NoiseTrace(self.samples * factor, self.dt)


def johnson_spectral_density(resistance, t_eff, boltzmann_k=BOLTZMANN_K):
    """One-sided Johnson voltage noise density ``4 k T_eff R`` in V^2/Hz."""
    resistance = check_positive(resistance, "resistance")
    t_eff = check_positive(t_eff, "t_eff")
    boltzmann_k = check_positive(boltzmann_k, "boltzmann_k")
    return 4.0 * boltzmann_k * t_eff * resistance


def n_band_bins(spec):
    """Number of positive DFT bins of a ``spec``-sized record inside the band."""
    df = spec.sample_rate / spec.n_samples
    return min(int(np.floor(spec.bandwidth / df * (1 + 1e-12))), spec.n_samples // 2)


def synthesize(spec, seed=None):
    """Draw one realization of band-limited white Gaussian noise.

    The record is built in the frequency domain: every positive DFT bin up to
    ``spec.bandwidth`` gets an independent complex Gaussian amplitude and all
    bins above it (and DC) are zero, so the band edge is an exact brick wall.
    The per-bin power is ``S*B/K`` for ``K`` in-band bins, which makes the
    ensemble mean-square exactly ``S*B`` even when ``B`` is not a multiple of
    the bin spacing.

    Parameters
    ----------
    spec : NoiseSpec
    seed : int, numpy.random.SeedSequence or numpy.random.Generator
        Anything accepted by :func:`numpy.random.default_rng`. The same seed
        and spec always give the same record.

    Returns
    -------
    NoiseTrace
    """
    n = spec.n_samples
    k = n_band_bins(spec)
    if k < 1:
        raise InvalidParameterError(
            f"record of {n} samples at {spec.sample_rate} Hz is too short to hold "
            f"any frequency below {spec.bandwidth} Hz"
        )
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((k, 2))

    bin_power = spec.spectral_density * spec.bandwidth / k
    spectrum = np.zeros(n // 2 + 1, dtype=complex)
    spectrum[1:k + 1] = (z[:, 0] + 1j * z[:, 1]) * np.sqrt(bin_power * n * n / 4.0)
    if n % 2 == 0 and k == n // 2:
        # the Nyquist bin is real-valued and appears once in the inverse transform
        spectrum[k] = z[-1, 0] * np.sqrt(bin_power) * n
    samples = np.fft.irfft(spectrum, n)
    return NoiseTrace(samples, spec.dt)


def mean_square(trace):
    """Boxcar average of the squared samples, i.e. the finite-time ``<x^2>``."""
    x = trace.samples if isinstance(trace, NoiseTrace) else np.asarray(trace, dtype=float)
    if x.size == 0:
        raise InvalidParameterError("cannot take the mean square of an empty trace")
    return float(np.mean(x * x))


def estimate_psd(trace, n_segments):
    """Averaged-periodogram estimate of the one-sided PSD.

    The trace is cut into ``n_segments`` non-overlapping Hann-windowed pieces
    (trailing samples that do not fill a segment are dropped).

    Returns
    -------
    freqs, density : ndarray
        Frequencies in Hz and the density estimate at each.
    """
    n_segments = check_count(n_segments, "n_segments", 1)
    x = trace.samples if isinstance(trace, NoiseTrace) else check_samples(trace)
    nperseg = x.size // n_segments
    if nperseg < 16:
        raise InvalidParameterError(
            f"{x.size} samples cannot be split into {n_segments} segments of >= 16 samples"
        )
    fs = trace.sample_rate if isinstance(trace, NoiseTrace) else 1.0
    freqs, density = signal.welch(
        x[: nperseg * n_segments],
        fs=fs,
        window="hann",
        nperseg=nperseg,
        noverlap=0,
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    return freqs, density


def integrate_psd(freqs, density):
    """Total power under a one-sided PSD estimate on a uniform grid."""
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size < 2:
        return 0.0
    return float(np.sum(density) * (freqs[1] - freqs[0]))
