"""Exceptions and small input-checking helpers shared by the package."""

import math

import numpy as np


class KLJNError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(KLJNError, ValueError):
    """A numeric argument is outside its admissible range."""


class ConfigurationError(KLJNError, ValueError):
    """A system configuration violates one of its invariants."""


class InsufficientDataError(KLJNError):
    """Too few samples or events to form the requested estimate."""


class ApproximationDomainError(KLJNError, ValueError):
    """An approximate formula was asked to work outside its validity regime."""


class PlanSizeError(InsufficientDataError):
    """A Monte Carlo plan is too small to expect enough events.

    ``suggested_n`` holds a trial count that would make the test meaningful.
    """

    def __init__(self, message, suggested_n):
        super().__init__(message)
        self.suggested_n = suggested_n


class ValidityWarning(UserWarning):
    """An analytic estimate was evaluated outside its small-error regime."""


def check_positive(value, name):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be a non-negative finite number, got {value!r}")
    return value


def check_count(value, name, minimum):
    if isinstance(value, bool) or int(value) != value:
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_samples(x, name="samples", min_length=1):
    """Return ``x`` as a finite 1-D float array of at least ``min_length`` points."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise InvalidParameterError(f"{name} needs at least {min_length} points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    return arr
