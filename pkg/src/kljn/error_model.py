"""Analytic error probabilities of the threshold decision.

The fluctuation of the finite-time mean square is treated as a Gaussian
process whose spectrum is the low-frequency part of the spectrum of the
squared channel noise. Two estimates of the probability that it exceeds a
threshold are provided: the Rice level-crossing rate times the averaging time,
and the exact Gaussian upper tail.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._validation import (
    ApproximationDomainError,
    InvalidParameterError,
    ValidityWarning,
    check_nonnegative,
    check_positive,
)

#: Rice-based estimates above this are flagged: the one-crossing-per-error
#: (Poisson) identification no longer holds.
SMALL_ERROR_LIMIT = 0.1


@dataclass(frozen=True)
class SquaredNoisePsd:
    """Spectrum of ``D*u^2 - <D*u^2>`` for flat-band Gaussian ``u``.

    ``s00`` is the one-sided input density on ``[0, bandwidth]``.
    """

    s00: float
    bandwidth: float
    d_coeff: float = 1.0

    def __post_init__(self):
        check_nonnegative(self.s00, "s00")
        check_positive(self.bandwidth, "bandwidth")
        check_positive(self.d_coeff, "d_coeff")

    @property
    def peak(self):
        return 2.0 * self.d_coeff ** 2 * self.bandwidth * self.s00 ** 2


@dataclass(frozen=True)
class PredictorInput:
    """Relative threshold (beta or delta) and bandwidth ratio gamma.

    The endpoints 0 and 1 of the threshold range are accepted so that the
    limiting values can be evaluated; outputs there carry a ValidityWarning.
    """

    threshold_fraction: float
    gamma: float

    def __post_init__(self):
        if not 0 <= self.threshold_fraction <= 1:
            raise InvalidParameterError(
                f"threshold fraction must lie in [0, 1], got {self.threshold_fraction}"
            )
        check_positive(self.gamma, "gamma")

    @property
    def tail_argument(self):
        """Threshold in units of the averaged-square RMS: ``beta*sqrt(gamma/2)``."""
        return self.threshold_fraction * math.sqrt(self.gamma / 2.0)


def squared_noise_psd(f, psd):
    """Triangular spectrum ``2 D^2 B S00^2 (1 - f/2B)`` on ``[0, 2B]``, zero above.

    ``f`` may be a scalar or an array.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0):
        raise InvalidParameterError("frequency must be non-negative")
    two_b = 2.0 * psd.bandwidth
    out = np.where(f_arr <= two_b, psd.peak * (1.0 - f_arr / two_b), 0.0)
    return float(out) if out.ndim == 0 else out


def averaged_square_rms(psd, f_b):
    """RMS of the averaged-square fluctuation, ``sqrt(f_B * S_2(0))``.

    Valid only for ``f_b <= bandwidth/4``, where the triangle is nearly flat
    over the averaging band.
    """
    f_b = check_positive(f_b, "f_b")
    if f_b > psd.bandwidth / 4.0:
        raise ApproximationDomainError(
            f"f_b={f_b} Hz is above bandwidth/4 = {psd.bandwidth / 4.0} Hz; "
            "the flat-spectrum approximation does not apply"
        )
    return math.sqrt(f_b * psd.peak)


def _second_moment(spectrum):
    """Return (int S df, int f^2 S df) for a callable or tabulated spectrum.

    A callable must accept a frequency array and comes with a finite support
    given as ``(callable, f_max)``; a tabulated spectrum is ``(freqs, values)``
    with at least 3 points and is integrated with Simpson's rule.
    """
    first, second = spectrum
    if callable(first):
        f_max = check_positive(second, "f_max")
        kw = dict(epsabs=0.0, epsrel=1e-10, limit=200)
        m0, _ = integrate.quad(lambda f: first(np.asarray(f)), 0.0, f_max, **kw)
        m2, _ = integrate.quad(lambda f: f * f * first(np.asarray(f)), 0.0, f_max, **kw)
        return m0, m2
    freqs = np.asarray(first, dtype=float)
    values = np.asarray(second, dtype=float)
    if freqs.ndim != 1 or freqs.shape != values.shape or freqs.size < 3:
        raise InvalidParameterError("tabulated spectrum needs matching 1-D arrays of >= 3 points")
    if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(values))):
        raise InvalidParameterError("tabulated spectrum contains non-finite values")
    if np.any(np.diff(freqs) <= 0) or freqs[0] < 0:
        raise InvalidParameterError("tabulated frequencies must be non-negative and increasing")
    return integrate.simpson(values, x=freqs), integrate.simpson(freqs ** 2 * values, x=freqs)


def rice_crossing_frequency(threshold, rms, spectrum):
    """Mean rate of crossings of ``threshold`` (both directions) by a Gaussian process.

    ``nu = (2/rms) * exp(-threshold^2 / (2 rms^2)) * sqrt(int f^2 S(f) df)``.

    Parameters
    ----------
    threshold : float
        Level measured from the process mean.
    rms : float
        RMS of the process.
    spectrum : tuple
        Either ``(freqs, values)`` tabulated one-sided spectrum or
        ``(callable, f_max)``.
    """
    rms = check_positive(rms, "rms")
    m0, m2 = _second_moment(spectrum)
    if not (math.isfinite(m2) and m2 > 0 and m0 > 0):
        raise InvalidParameterError("spectrum must have positive, finite power and second moment")
    return 2.0 / rms * math.exp(-threshold ** 2 / (2.0 * rms ** 2)) * math.sqrt(m2)


def flat_spectrum(peak, f_b, n_points=1025):
    """Tabulated flat spectrum of height ``peak`` on ``[0, f_b]``."""
    freqs = np.linspace(0.0, f_b, n_points)
    return freqs, np.full(n_points, float(peak))


def _warn_if_large(value, what):
    if value > SMALL_ERROR_LIMIT:
        warnings.warn(
            f"{what} = {value:.4g} is outside the small-error regime; "
            "the crossing-rate estimate is only indicative here",
            ValidityWarning,
            stacklevel=4,
        )


def rice_closed_form(inp):
    """``exp(-beta^2 gamma / 4) / sqrt(3)``, no checks or warnings."""
    return math.exp(-inp.threshold_fraction ** 2 * inp.gamma / 4.0) / math.sqrt(3.0)


def rice_pipeline(inp, d_coeff=1.0, s00=1.0, bandwidth=1.0, quadrature=False):
    """Error probability assembled step by step from the physical quantities.

    threshold ``beta*D*S00*B`` -> RMS ``sqrt(f_B S_2(0))`` -> upward crossing
    rate (half the Rice rate) over the flat band ``[0, f_B]`` -> probability
    ``nu_up / f_B``. With ``quadrature=True`` the crossing rate is computed by
    integrating a tabulated flat spectrum instead of using its moments in
    closed form. The result is independent of ``d_coeff``, ``s00`` and
    ``bandwidth``.
    """
    psd = SquaredNoisePsd(s00=s00, bandwidth=bandwidth, d_coeff=d_coeff)
    f_b = bandwidth / inp.gamma
    threshold = inp.threshold_fraction * d_coeff * s00 * bandwidth
    # gamma < 4 is outside averaged_square_rms's domain; the moments are the same
    rms = math.sqrt(f_b * psd.peak)
    if quadrature:
        nu = rice_crossing_frequency(threshold, rms, flat_spectrum(psd.peak, f_b))
    else:
        nu = 2.0 / rms * math.exp(-threshold ** 2 / (2.0 * rms ** 2)) * math.sqrt(psd.peak * f_b ** 3 / 3.0)
    return (nu / 2.0) / f_b


def _rice_checked(inp, label):
    closed = rice_closed_form(inp)
    composed = rice_pipeline(inp)
    if not math.isclose(closed, composed, rel_tol=1e-12, abs_tol=1e-300):
        raise ArithmeticError(f"closed form {closed!r} disagrees with pipeline {composed!r}")
    _warn_if_large(closed, label)
    return closed


def rice_error_probability_00(inp):
    """Probability that a 00 exchange is read as secure (crossing-rate estimate)."""
    return _rice_checked(inp, "eps_00")


def rice_error_probability_11(inp):
    """Probability that an 11 exchange is read as secure (crossing-rate estimate)."""
    return _rice_checked(inp, "eps_11")


def gaussian_tail(x):
    """Standard normal upper tail ``Q(x) = erfc(x/sqrt(2))/2``."""
    return 0.5 * special.erfc(x / math.sqrt(2.0))


def gaussian_tail_probability(inp):
    """Exact Gaussian tail ``Q(beta*sqrt(gamma/2))`` of the averaged-square fluctuation."""
    return float(gaussian_tail(inp.tail_argument))


def pessimism_ratio(inp):
    """Rice estimate divided by the Gaussian tail."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        rice = rice_error_probability_00(inp)
    return rice / gaussian_tail_probability(inp)
