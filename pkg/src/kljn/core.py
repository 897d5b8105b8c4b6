"""The ideal KLJN loop: levels, thresholds, decisions and single bit exchanges.

Alice and Bob each connect ``R_0`` (bit 0) or ``R_1`` (bit 1) to the wire, each
resistor driven by its own Johnson-like noise generator. The channel
mean-square voltage (or current) over one bit-exchange period reveals the
loop resistance; the mixed situations 01 and 10 produce the same level and are
the only ones kept for the key.
"""

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import ConfigurationError, InvalidParameterError, check_positive
from .noise import (
    BOLTZMANN_K,
    NoiseSpec,
    NoiseTrace,
    johnson_spectral_density,
    mean_square,
    synthesize,
)

VOLTAGE = "voltage"
CURRENT = "current"
OBSERVABLES = (VOLTAGE, CURRENT)

_DEFAULT_BANDWIDTH = 1000.0
# 4 k T_eff B * 1 Ohm = 1e-3 V^2, so the 00 voltage level of the default loop is 1 V^2
_DEFAULT_T_EFF = 1e-3 / (4 * BOLTZMANN_K * _DEFAULT_BANDWIDTH)
_REL_TOL = 1e-12


class BitSituation(enum.Enum):
    """Resistor choice of (Alice, Bob)."""

    S00 = "00"
    S01 = "01"
    S10 = "10"
    S11 = "11"

    @property
    def alice_bit(self):
        return int(self.value[0])

    @property
    def bob_bit(self):
        return int(self.value[1])

    @property
    def is_mixed(self):
        return self.alice_bit != self.bob_bit

    @classmethod
    def from_bits(cls, alice_bit, bob_bit):
        return cls(f"{int(alice_bit)}{int(bob_bit)}")

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text))
        except ValueError:
            raise InvalidParameterError(
                f"unknown bit situation {text!r}; expected one of 00, 01, 10, 11"
            ) from None

    def swapped(self):
        return BitSituation.from_bits(self.bob_bit, self.alice_bit)


class Decision(enum.Enum):
    DECIDE_00 = "00"
    DECIDE_SECURE = "secure"
    DECIDE_11 = "11"


class ErrorClass(enum.Enum):
    CORRECT = "correct"
    AUTO_REMOVED = "auto_removed"
    ERROR_00_TO_SECURE = "error_00_to_secure"
    ERROR_11_TO_SECURE = "error_11_to_secure"

    @property
    def is_starred(self):
        return self in (ErrorClass.ERROR_00_TO_SECURE, ErrorClass.ERROR_11_TO_SECURE)


@dataclass(frozen=True)
class SystemConfig:
    """Physical and protocol parameters of an ideal KLJN system.

    ``gamma`` is the ratio of the noise bandwidth to the averaging bandwidth
    ``f_B``. The bit-exchange period is ``tau = tau_factor * gamma / bandwidth``;
    with the default ``tau_factor = 0.5`` a boxcar average over ``tau`` has an
    equivalent noise bandwidth of exactly ``f_B``. Set ``tau_factor = 1`` to use
    ``f_B = 1/tau`` instead.
    """

    r0: float = 2000.0
    r1: float = 9000.0
    t_eff: float = _DEFAULT_T_EFF
    bandwidth: float = _DEFAULT_BANDWIDTH
    gamma: float = 100.0
    beta: float = 0.5
    delta: float = 0.5
    d_coeff: float = 1.0
    oversampling: float = 4.0
    boltzmann_k: float = BOLTZMANN_K
    tau_factor: float = 0.5

    def __post_init__(self):
        for name in ("r0", "r1", "t_eff", "bandwidth", "gamma", "d_coeff",
                     "oversampling", "boltzmann_k", "tau_factor"):
            try:
                check_positive(getattr(self, name), name)
            except InvalidParameterError as exc:
                raise ConfigurationError(str(exc)) from None
        if not self.r1 > self.r0:
            raise ConfigurationError(f"need r1 > r0, got r0={self.r0}, r1={self.r1}")
        for name in ("beta", "delta"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigurationError(f"need 0 < {name} < 1, got {name}={value}")
            bound = self.threshold_bound
            if value > bound * (1 + _REL_TOL):
                raise ConfigurationError(
                    f"{name}={value} exceeds the band-overlap bound "
                    f"(alpha-1)/(alpha+1) = {bound:.6g} for alpha = {self.alpha:.6g}"
                )
        if self.gamma < 4:
            raise ConfigurationError(f"need gamma >= 4, got gamma={self.gamma}")
        if self.oversampling < 1:
            raise ConfigurationError(f"need oversampling >= 1, got {self.oversampling}")
        if self.n_samples < 2:
            raise ConfigurationError(
                f"bit-exchange period holds only {self.n_samples} samples; raise gamma or oversampling"
            )

    @property
    def alpha(self):
        return self.r1 / self.r0

    @property
    def threshold_bound(self):
        """Largest admissible beta or delta: ``(alpha - 1) / (alpha + 1)``."""
        return (self.alpha - 1) / (self.alpha + 1)

    @property
    def f_b(self):
        return self.bandwidth / self.gamma

    @property
    def tau(self):
        return self.tau_factor * self.gamma / self.bandwidth

    @property
    def sample_rate(self):
        return 2.0 * self.oversampling * self.bandwidth

    @property
    def n_samples(self):
        return int(round(self.tau * self.sample_rate))

    def resistance(self, bit):
        return self.r1 if bit else self.r0

    def resistors(self, situation):
        return self.resistance(situation.alice_bit), self.resistance(situation.bob_bit)

    def generator_spec(self, resistance):
        return NoiseSpec(
            spectral_density=johnson_spectral_density(resistance, self.t_eff, self.boltzmann_k),
            bandwidth=self.bandwidth,
            sample_rate=self.sample_rate,
            n_samples=self.n_samples,
        )


@dataclass(frozen=True)
class LevelSet:
    """Exact channel levels and the two decision thresholds.

    For voltages the 00 level is the lowest (``ascending=True``); for currents
    the order is reversed and the thresholds move the band edges the other way.
    """

    level_00: float
    level_mid: float
    level_11: float
    delta_1: float
    delta_2: float
    ascending: bool = True

    def __post_init__(self):
        sign = 1 if self.ascending else -1
        if not sign * self.level_00 < sign * self.level_mid < sign * self.level_11:
            raise ConfigurationError(
                f"levels out of order: 00={self.level_00}, mid={self.level_mid}, 11={self.level_11}"
            )
        if self.delta_1 <= 0 or self.delta_2 <= 0:
            raise ConfigurationError("thresholds delta_1 and delta_2 must be positive")
        slack = _REL_TOL * abs(self.level_mid)
        if sign * (self.edge_00 - self.level_mid) > slack:
            raise ConfigurationError(
                f"delta_1={self.delta_1} pushes the 00 band edge {self.edge_00} past "
                f"the 01/10 level {self.level_mid}"
            )
        if sign * (self.level_mid - self.edge_11) > slack:
            raise ConfigurationError(
                f"delta_2={self.delta_2} pushes the 11 band edge {self.edge_11} past "
                f"the 01/10 level {self.level_mid}"
            )

    @property
    def edge_00(self):
        """Boundary between the 00 decision and the secure band."""
        return self.level_00 + self.delta_1 if self.ascending else self.level_00 - self.delta_1

    @property
    def edge_11(self):
        """Boundary between the secure band and the 11 decision."""
        return self.level_11 - self.delta_2 if self.ascending else self.level_11 + self.delta_2


@dataclass(frozen=True)
class BepOutcome:
    actual: BitSituation
    measured_ms: float
    decision: Decision
    error_class: ErrorClass


def _check_observable(observable):
    if observable not in OBSERVABLES:
        raise InvalidParameterError(f"observable must be 'voltage' or 'current', got {observable!r}")
    return observable


def exact_level(situation, config):
    """Infinite-time mean-square channel voltage ``4 k T_eff R_par B``."""
    r_a, r_b = config.resistors(situation)
    r_par = r_a * r_b / (r_a + r_b)
    return 4.0 * config.boltzmann_k * config.t_eff * r_par * config.bandwidth


def exact_level_current(situation, config):
    """Infinite-time mean-square loop current ``4 k T_eff B / R_loop``."""
    r_a, r_b = config.resistors(situation)
    return 4.0 * config.boltzmann_k * config.t_eff * config.bandwidth / (r_a + r_b)


def channel_waveforms(u_a, u_b, r_a, r_b):
    """Wire voltage and loop current driven by the two noise generators.

    Superposition on the loop gives ``u_ch = (u_a R_b + u_b R_a)/(R_a + R_b)``
    and ``i_ch = (u_a - u_b)/(R_a + R_b)``, positive from Alice to Bob.
    """
    r_a = check_positive(r_a, "r_a")
    r_b = check_positive(r_b, "r_b")
    if len(u_a) != len(u_b) or u_a.dt != u_b.dt:
        raise InvalidParameterError(
            f"generator traces differ: {len(u_a)} samples at dt={u_a.dt} vs "
            f"{len(u_b)} samples at dt={u_b.dt}"
        )
    r_loop = r_a + r_b
    u_ch = (u_a.samples * r_b + u_b.samples * r_a) / r_loop
    i_ch = (u_a.samples - u_b.samples) / r_loop
    return NoiseTrace(u_ch, u_a.dt), NoiseTrace(i_ch, u_a.dt)


def compute_thresholds(config, observable=VOLTAGE):
    """Levels and thresholds ``delta_1 = beta * L00``, ``delta_2 = delta * L11``.

    The squaring-device coefficient D multiplies both sides of every
    comparison, so the levels are returned in plain V^2 (or A^2).
    """
    _check_observable(observable)
    level = exact_level if observable == VOLTAGE else exact_level_current
    l00 = level(BitSituation.S00, config)
    lmid = level(BitSituation.S01, config)
    l11 = level(BitSituation.S11, config)
    return LevelSet(
        level_00=l00,
        level_mid=lmid,
        level_11=l11,
        delta_1=config.beta * l00,
        delta_2=config.delta * l11,
        ascending=observable == VOLTAGE,
    )


def classify(measured_ms, levels):
    """Three-way decision; values exactly on a band edge count as secure."""
    if levels.ascending:
        if measured_ms < levels.edge_00:
            return Decision.DECIDE_00
        if measured_ms > levels.edge_11:
            return Decision.DECIDE_11
    else:
        if measured_ms > levels.edge_00:
            return Decision.DECIDE_00
        if measured_ms < levels.edge_11:
            return Decision.DECIDE_11
    return Decision.DECIDE_SECURE


_EXPECTED = {
    BitSituation.S00: Decision.DECIDE_00,
    BitSituation.S01: Decision.DECIDE_SECURE,
    BitSituation.S10: Decision.DECIDE_SECURE,
    BitSituation.S11: Decision.DECIDE_11,
}


def expected_decision(situation):
    return _EXPECTED[BitSituation.parse(situation)]


def classify_error(actual, decision):
    """Error class of one (actual situation, decision) cell of the error table."""
    if _EXPECTED[actual] is decision:
        return ErrorClass.CORRECT
    if decision is not Decision.DECIDE_SECURE:
        return ErrorClass.AUTO_REMOVED
    if actual is BitSituation.S00:
        return ErrorClass.ERROR_00_TO_SECURE
    return ErrorClass.ERROR_11_TO_SECURE


def child_seed(seed, *path):
    """Deterministic child of ``seed`` addressed by an integer path.

    Children are derived from the spawn key, so they do not depend on how many
    other children were requested before.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(entropy=seed.entropy, spawn_key=seed.spawn_key + tuple(path))
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))


def evaluate_channel(trace, situation, levels):
    """Mean-square, decision and error class for one observed channel trace."""
    ms = mean_square(trace)
    decision = classify(ms, levels)
    return BepOutcome(situation, ms, decision, classify_error(situation, decision))


def simulate_bep(config, situation, alice_seed, bob_seed, observable=VOLTAGE, source=synthesize):
    """One bit exchange with explicit seeds for Alice's and Bob's generators.

    ``source(spec, seed)`` produces each generator's trace; it defaults to
    :func:`~kljn.noise.synthesize` and can be swapped for calibration signals.
    Returns the outcome and the (u_ch, i_ch) pair.
    """
    situation = BitSituation.parse(situation)
    _check_observable(observable)
    r_a, r_b = config.resistors(situation)
    u_a = source(config.generator_spec(r_a), alice_seed)
    u_b = source(config.generator_spec(r_b), bob_seed)
    u_ch, i_ch = channel_waveforms(u_a, u_b, r_a, r_b)
    trace = u_ch if observable == VOLTAGE else i_ch
    outcome = evaluate_channel(trace, situation, compute_thresholds(config, observable))
    return outcome, (u_ch, i_ch)


def run_bep(config, situation, seed, observable=VOLTAGE, source=synthesize):
    """Simulate one bit-exchange period; deterministic in its arguments."""
    outcome, _ = simulate_bep(
        config, situation, child_seed(seed, 0), child_seed(seed, 1), observable, source
    )
    return outcome


def distill_key(outcomes, inverter):
    """Sift the key from a run of bit exchanges.

    Only exchanges decided as secure are kept. Each party's raw bit is its own
    resistor choice and the agreed ``inverter`` ('alice' or 'bob') flips it, so
    correctly decided mixed situations yield equal bits at both ends.

    Returns
    -------
    alice_key, bob_key : ndarray of uint8
    """
    if inverter not in ("alice", "bob"):
        raise InvalidParameterError(f"inverter must be 'alice' or 'bob', got {inverter!r}")
    kept = [o.actual for o in outcomes if o.decision is Decision.DECIDE_SECURE]
    alice = np.array([s.alice_bit for s in kept], dtype=np.uint8)
    bob = np.array([s.bob_bit for s in kept], dtype=np.uint8)
    if inverter == "alice":
        alice ^= 1
    else:
        bob ^= 1
    return alice, bob
