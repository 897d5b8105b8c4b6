"""Monte Carlo ensembles of bit exchanges and their statistics."""

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from ._validation import InsufficientDataError, InvalidParameterError, PlanSizeError, check_count
from .core import (
    VOLTAGE,
    BitSituation,
    Decision,
    ErrorClass,
    SystemConfig,
    child_seed,
    compute_thresholds,
    run_bep,
)
from .error_model import PredictorInput, gaussian_tail, gaussian_tail_probability, rice_closed_form
from .noise import synthesize

UNIFORM = "uniform"

#: Row order of ErrorTally.counts.
DECISIONS = (Decision.DECIDE_00, Decision.DECIDE_SECURE, Decision.DECIDE_11)
#: Column order of ErrorTally.counts.
SITUATIONS = (BitSituation.S00, BitSituation.S01, BitSituation.S10, BitSituation.S11)

_Z95 = float(stats.norm.ppf(0.975))
_MIN_EXPECTED_ERRORS = 20


@dataclass(frozen=True)
class ExperimentPlan:
    """What to simulate: ``situation_policy`` is a BitSituation or ``"uniform"``."""

    config: SystemConfig
    n_trials: int
    situation_policy: object = UNIFORM
    observable: str = VOLTAGE
    master_seed: int = 0

    def __post_init__(self):
        check_count(self.n_trials, "n_trials", 1)
        if self.situation_policy != UNIFORM:
            object.__setattr__(self, "situation_policy", BitSituation.parse(self.situation_policy))

    def trial_seed(self, index):
        return child_seed(self.master_seed, index)

    def situation_for(self, index):
        if self.situation_policy == UNIFORM:
            rng = np.random.default_rng(child_seed(self.trial_seed(index), 2))
            return SITUATIONS[int(rng.integers(4))]
        return self.situation_policy


@dataclass
class ErrorTally:
    """Decision-by-situation counts: rows follow DECISIONS, columns SITUATIONS."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros((3, 4), dtype=np.int64))

    @property
    def n_total(self):
        return int(self.counts.sum())

    def add(self, outcome):
        self.counts[DECISIONS.index(outcome.decision), SITUATIONS.index(outcome.actual)] += 1

    def __add__(self, other):
        return ErrorTally(self.counts + other.counts)

    @classmethod
    def from_outcomes(cls, outcomes):
        tally = cls()
        for outcome in outcomes:
            tally.add(outcome)
        return tally

    def count(self, decision, situation):
        return int(self.counts[DECISIONS.index(decision), SITUATIONS.index(situation)])

    def column_total(self, situation):
        return int(self.counts[:, SITUATIONS.index(situation)].sum())

    def merged(self):
        """3x3 counts with the 01 and 10 columns added (columns 00, 11, 01/10)."""
        c = self.counts
        return np.column_stack([c[:, 0], c[:, 3], c[:, 1] + c[:, 2]])

    def class_counts(self):
        out = {cls: 0 for cls in ErrorClass}
        out[ErrorClass.CORRECT] = (self.count(Decision.DECIDE_00, BitSituation.S00)
                                   + self.count(Decision.DECIDE_11, BitSituation.S11)
                                   + self.count(Decision.DECIDE_SECURE, BitSituation.S01)
                                   + self.count(Decision.DECIDE_SECURE, BitSituation.S10))
        out[ErrorClass.ERROR_00_TO_SECURE] = self.count(Decision.DECIDE_SECURE, BitSituation.S00)
        out[ErrorClass.ERROR_11_TO_SECURE] = self.count(Decision.DECIDE_SECURE, BitSituation.S11)
        out[ErrorClass.AUTO_REMOVED] = self.n_total - sum(out.values())
        return out

    def rows(self):
        """Long-format rows ``(decision, actual, count)`` for CSV output."""
        return [(d.value, s.value, int(self.counts[i, j]))
                for i, d in enumerate(DECISIONS) for j, s in enumerate(SITUATIONS)]


@dataclass(frozen=True)
class RateEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n: int
    k: int

    def overlaps(self, other):
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high

    def as_dict(self):
        return {"p_hat": self.p_hat, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "n": self.n, "k": self.k}


def wilson_interval(k, n, z=_Z95):
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise InsufficientDataError("a rate needs at least one trial")
    p = k / n
    z2 = z * z
    centre = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    return max(0.0, centre - half), min(1.0, centre + half)


def rate_from_counts(k, n):
    lo, hi = wilson_interval(k, n)
    p = k / n
    # guard against rounding pushing the point estimate outside its own interval
    return RateEstimate(p, min(lo, p), max(hi, p), int(n), int(k))


def estimate_rate(tally, which):
    """Rate estimate with a 95% Wilson interval.

    ``which`` is ``"eps_00"`` (00 read as secure), ``"eps_11"`` (11 read as
    secure) or ``"retained_fraction"`` (share of all exchanges read as secure).
    """
    secure = DECISIONS.index(Decision.DECIDE_SECURE)
    if which == "eps_00":
        k, n = tally.count(Decision.DECIDE_SECURE, BitSituation.S00), tally.column_total(BitSituation.S00)
    elif which == "eps_11":
        k, n = tally.count(Decision.DECIDE_SECURE, BitSituation.S11), tally.column_total(BitSituation.S11)
    elif which == "retained_fraction":
        k, n = int(tally.counts[secure].sum()), tally.n_total
    else:
        raise InvalidParameterError(f"unknown rate {which!r}")
    if n == 0:
        raise InsufficientDataError(f"no trials in the denominator of {which}")
    return rate_from_counts(k, n)


def _run_chunk(plan, indices):
    return [run_bep(plan.config, plan.situation_for(i), plan.trial_seed(i), plan.observable)
            for i in indices]


def simulate_outcomes(plan, n_jobs=1):
    """All BepOutcome records of a plan, in trial order.

    Trial ``i`` uses seeds derived from ``(master_seed, i)`` only, so the
    result does not depend on ``n_jobs`` or on scheduling.
    """
    if n_jobs == 1 or plan.n_trials < 2000:
        return _run_chunk(plan, range(plan.n_trials))
    chunks = np.array_split(np.arange(plan.n_trials), max(1, plan.n_trials // 5000))
    parts = Parallel(n_jobs=n_jobs)(delayed(_run_chunk)(plan, c.tolist()) for c in chunks)
    return [o for part in parts for o in part]


def run_experiment(plan, n_jobs=1):
    """Tally of a plan's outcomes; reproducible bit-for-bit from the plan."""
    return ErrorTally.from_outcomes(simulate_outcomes(plan, n_jobs=n_jobs))


def measured_mean_squares(config, situation, n, seed, observable=VOLTAGE, source=synthesize):
    """Measured channel mean squares of ``n`` independent exchanges."""
    situation = BitSituation.parse(situation)
    return np.array([
        run_bep(config, situation, child_seed(seed, i), observable, source).measured_ms
        for i in range(n)
    ])


def measure_estimator_sigma(config, situation, n, seed, observable=VOLTAGE, source=synthesize):
    """Sample standard deviation of the measured mean square over ``n`` exchanges."""
    if n < 100:
        raise InsufficientDataError(f"need n >= 100 exchanges to estimate the spread, got {n}")
    return float(np.std(measured_mean_squares(config, situation, n, seed, observable, source), ddof=1))


@dataclass(frozen=True)
class ValidationReport:
    """Observed starred-error rate next to three predictions.

    ``sigma_empirical`` comes from a separate pilot run; ``predicted_tail`` is
    the Gaussian tail at the threshold measured in pilot sigmas; ``rice`` and
    ``erfc`` are the closed-form crossing-rate and tail estimates using the
    analytic RMS.
    """

    situation: BitSituation
    n: int
    threshold: float
    sigma_empirical: float
    predicted_tail: float
    observed: RateEstimate
    rice: float
    erfc: float

    @property
    def ratio(self):
        return self.observed.p_hat / self.predicted_tail

    @property
    def consistent(self):
        return 0.5 <= self.ratio <= 2.0

    def as_dict(self):
        return {
            "situation": self.situation.value, "n": self.n, "threshold": self.threshold,
            "sigma_empirical": self.sigma_empirical, "predicted_tail": self.predicted_tail,
            "observed": self.observed.as_dict(), "rice": self.rice, "erfc": self.erfc,
            "ratio": self.ratio, "consistent": self.consistent,
        }


def two_stage_validation(config, situation, n, seed=0, observable=VOLTAGE, n_pilot=None):
    """Compare the observed starred-error rate with a Gaussian-tail prediction.

    Stage one estimates the spread of the measured mean square from a pilot
    run (``n_pilot``, default ``min(n, 10000)``, at least 100). Stage two runs
    ``n`` exchanges and counts those read as secure. Raises PlanSizeError
    when fewer than 20 errors are expected, with a suggested ``n``.
    """
    situation = BitSituation.parse(situation)
    if situation.is_mixed:
        raise InvalidParameterError("starred errors exist only for situations 00 and 11")
    n = check_count(n, "n", 1)
    n_pilot = max(100, min(n, 10_000)) if n_pilot is None else n_pilot
    levels = compute_thresholds(config, observable)
    if situation is BitSituation.S00:
        threshold, fraction = levels.delta_1, config.beta
    else:
        threshold, fraction = levels.delta_2, config.delta

    sigma = measure_estimator_sigma(config, situation, n_pilot, child_seed(seed, 0), observable)
    predicted = float(gaussian_tail(threshold / sigma)) if sigma > 0 else 0.0
    if n * predicted < _MIN_EXPECTED_ERRORS:
        suggested = math.ceil(_MIN_EXPECTED_ERRORS / predicted) if predicted > 0 else None
        raise PlanSizeError(
            f"only {n * predicted:.3g} errors expected in {n} exchanges; "
            f"need n >= {suggested} for a meaningful comparison",
            suggested,
        )

    plan = ExperimentPlan(config, n, situation, observable, child_seed(seed, 1))
    tally = run_experiment(plan)
    which = "eps_00" if situation is BitSituation.S00 else "eps_11"
    inp = PredictorInput(fraction, config.gamma)
    return ValidationReport(
        situation=situation,
        n=n,
        threshold=threshold,
        sigma_empirical=sigma,
        predicted_tail=predicted,
        observed=estimate_rate(tally, which),
        rice=rice_closed_form(inp),
        erfc=gaussian_tail_probability(inp),
    )


def ks_two_sample(sample_a, sample_b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    The p-value is the Kolmogorov limiting distribution evaluated at
    ``sqrt(n*m/(n+m)) * D``.
    """
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size < 50 or b.size < 50:
        raise InsufficientDataError(
            f"KS test needs >= 50 points per sample, got {a.size} and {b.size}"
        )
    pts = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pts, side="right") / a.size
    cdf_b = np.searchsorted(b, pts, side="right") / b.size
    statistic = float(np.max(np.abs(cdf_a - cdf_b)))
    en = a.size * b.size / (a.size + b.size)
    return statistic, float(stats.kstwobign.sf(math.sqrt(en) * statistic))
