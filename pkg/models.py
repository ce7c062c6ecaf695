import math
from dataclasses import dataclass, field

import numpy as np

from constants import DEFAULT_EPSILON, DEFAULT_MAX_TONES, DEFAULT_RESIDUAL_FRACTION


TWO_PI = 2.0 * math.pi

STOP_REACHED_M = "reached_M"
STOP_RESIDUAL_BELOW_THRESHOLD = "residual_below_threshold"
STOP_MAX_TONES_HIT = "max_tones_hit"
STOP_NO_CANDIDATE = "no_candidate"
STOP_DUPLICATE_FREQUENCY = "duplicate_frequency"
STOP_ILL_CONDITIONED = "ill_conditioned"

MODE_KNOWN = "known"
MODE_BLIND = "blind"

REFINE_ROBUST = "robust"
REFINE_BISECT = "bisect"
REFINE_METHODS = (REFINE_ROBUST, REFINE_BISECT)

FIT_JOINT = "joint"
FIT_RESIDUAL = "residual"
FIT_STRATEGIES = (FIT_JOINT, FIT_RESIDUAL)


def canonical_phase(theta):
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(float(theta), TWO_PI)
    return math.pi if wrapped <= -math.pi else wrapped


def bin_width(n_samples):
    return TWO_PI / n_samples


# ----------------------------
# Errors
# ----------------------------

class ToneSplitError(ValueError):
    pass


class ToneFitError(ToneSplitError):
    reason = "fit_error"

    def __init__(self, message, frequencies=()):
        super().__init__(message)
        self.frequencies = tuple(frequencies)


class DuplicateFrequencyError(ToneFitError):
    reason = STOP_DUPLICATE_FREQUENCY


class IllConditionedFitError(ToneFitError):
    reason = STOP_ILL_CONDITIONED

    def __init__(self, message, frequencies=(), condition=math.inf):
        super().__init__(message, frequencies)
        self.condition = condition


class DecompositionError(ToneSplitError):
    pass


class InputDocumentError(ToneSplitError):
    pass


# ----------------------------
# Signal model
# ----------------------------

@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("A signal needs a one-dimensional sequence of at least 2 samples.")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Signal samples must be finite.")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self):
        return int(self.samples.size)

    def __len__(self):
        return self.n_samples


@dataclass(frozen=True)
class ToneParams:
    frequency: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        values = (self.frequency, self.amplitude, self.phase)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"Tone parameters must be finite, got {values}.")
        if not 0.0 < self.frequency < math.pi:
            raise ValueError(f"Tone frequency {self.frequency} lies outside (0, pi).")
        if self.amplitude < 0.0:
            raise ValueError(f"Tone amplitude {self.amplitude} is negative.")
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "phase", canonical_phase(self.phase))

    @classmethod
    def at_bin(cls, bin_position, n_samples, amplitude, phase=0.0):
        """Tone placed at a fractional DFT bin position."""
        return cls(TWO_PI * bin_position / n_samples, amplitude, phase)


@dataclass(frozen=True)
class ToneEstimate:
    frequency: float
    amplitude: float
    phase: float

    def frequency_hz(self, sample_rate):
        return self.frequency * sample_rate / TWO_PI


@dataclass(frozen=True)
class NoiseSpec:
    standard_deviation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.standard_deviation) or self.standard_deviation < 0.0:
            raise ValueError(f"Noise standard deviation must be finite and >= 0, got {self.standard_deviation}.")


# ----------------------------
# Spectrum
# ----------------------------

@dataclass(frozen=True, eq=False)
class HalfSpectrum:
    bins: np.ndarray
    n_samples: int

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=complex)
        if arr.size != self.n_samples // 2 + 1:
            raise ValueError(f"Half spectrum of N={self.n_samples} needs {self.n_samples // 2 + 1} bins, got {arr.size}.")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Spectrum bins must be finite.")
        arr.setflags(write=False)
        object.__setattr__(self, "bins", arr)

    @property
    def last_bin(self):
        """K = floor(N/2)."""
        return self.n_samples // 2

    @property
    def magnitudes(self):
        return np.abs(self.bins)

    @property
    def frequencies(self):
        return TWO_PI * np.arange(self.bins.size) / self.n_samples


@dataclass
class SpectrumPoint:
    frequency: float
    value: complex
    magnitude: float = None

    def __post_init__(self):
        if self.magnitude is None:
            self.magnitude = abs(self.value)

    @property
    def raw_magnitude(self):
        return abs(self.value)

    def repair(self, level):
        """Raise the cached magnitude to `level`; never lowers it."""
        if self.magnitude < level:
            self.magnitude = level
            return True
        return False


# ----------------------------
# Bin detection / refinement
# ----------------------------

@dataclass(frozen=True)
class BinCandidate:
    k: int
    delta: float
    theta: float
    amplitude: float
    implied_frequency: float


def _halvings_to_reach(epsilon):
    width, count = 1.0, 0
    while width > epsilon:
        width /= 2.0
        count += 1
    return count


@dataclass(frozen=True)
class RefineConfig:
    epsilon: float = DEFAULT_EPSILON
    max_evaluations: int = None
    method: str = REFINE_ROBUST

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and 0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}.")
        if self.method not in REFINE_METHODS:
            raise ValueError(f"Unknown refine method '{self.method}'. Expected one of {REFINE_METHODS}.")
        if self.max_evaluations is None:
            object.__setattr__(self, "max_evaluations", 4 * self.iterations + 8)
        if self.max_evaluations < 3:
            raise ValueError(f"max_evaluations must be >= 3, got {self.max_evaluations}.")

    @property
    def iterations(self):
        """Interval halvings until the width drops to epsilon bins (= ceil(log2(1/epsilon)))."""
        return _halvings_to_reach(self.epsilon)

    @property
    def evaluation_budget(self):
        if self.method == REFINE_BISECT:
            return self.iterations
        return 2 * self.iterations + 1


@dataclass
class RefineTrace:
    method: str = REFINE_ROBUST
    evaluations: int = 0
    repairs: int = 0
    iterations: int = 0
    final_interval_width: float = 0.0
    truncated: bool = False
    # (frequency, raw magnitude, repaired magnitude) per evaluation
    history: list = field(default_factory=list)

    def summary(self):
        return {
            "method": self.method,
            "evaluations": self.evaluations,
            "repairs": self.repairs,
            "iterations": self.iterations,
            "final_interval_width": self.final_interval_width,
            "truncated": self.truncated,
        }


# ----------------------------
# Tone fit
# ----------------------------

@dataclass(frozen=True, eq=False)
class SinCosBasis:
    frequency: float
    sin_vector: np.ndarray
    cos_vector: np.ndarray


@dataclass(frozen=True)
class LinearCoefficients:
    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((float(a), float(b)) for a, b in self.pairs))

    def __len__(self):
        return len(self.pairs)

    def as_vector(self):
        """lambda = (alpha_1, beta_1, ..., alpha_m, beta_m)."""
        return np.array([v for pair in self.pairs for v in pair], dtype=float)

    @classmethod
    def from_vector(cls, vector):
        vector = np.asarray(vector, dtype=float)
        return cls(tuple(zip(vector[0::2], vector[1::2])))

    @classmethod
    def zeros(cls, count):
        return cls(((0.0, 0.0),) * count)


# ----------------------------
# Decomposer
# ----------------------------

@dataclass(frozen=True)
class DecompositionConfig:
    mode: str = MODE_BLIND
    n_tones: int = None
    refine: RefineConfig = field(default_factory=RefineConfig)
    max_tones: int = DEFAULT_MAX_TONES
    residual_energy_fraction: float = DEFAULT_RESIDUAL_FRACTION
    min_bin_separation: int = 0
    fit_strategy: str = FIT_JOINT

    def __post_init__(self):
        if self.mode not in (MODE_KNOWN, MODE_BLIND):
            raise ValueError(f"Unknown mode '{self.mode}'.")
        if self.max_tones < 1:
            raise ValueError("max_tones must be positive.")
        if self.mode == MODE_KNOWN:
            if self.n_tones is None or self.n_tones < 1:
                raise ValueError("Known mode needs a positive tone count M.")
            if self.n_tones > self.max_tones:
                raise ValueError(f"M={self.n_tones} exceeds max_tones={self.max_tones}.")
        if not 0.0 < self.residual_energy_fraction < 1.0:
            raise ValueError(f"residual_energy_fraction must lie in (0, 1), got {self.residual_energy_fraction}.")
        if self.min_bin_separation < 0:
            raise ValueError("min_bin_separation must be non-negative.")
        if self.fit_strategy not in FIT_STRATEGIES:
            raise ValueError(f"Unknown fit strategy '{self.fit_strategy}'. Expected one of {FIT_STRATEGIES}.")

    @classmethod
    def known(cls, n_tones, **kwargs):
        kwargs.setdefault("max_tones", max(n_tones, DEFAULT_MAX_TONES))
        return cls(mode=MODE_KNOWN, n_tones=n_tones, **kwargs)

    @classmethod
    def blind(cls, **kwargs):
        return cls(mode=MODE_BLIND, **kwargs)

    def to_dict(self):
        return {
            "mode": self.mode,
            "n_tones": self.n_tones,
            "epsilon": self.refine.epsilon,
            "max_evaluations": self.refine.max_evaluations,
            "refiner": self.refine.method,
            "max_tones": self.max_tones,
            "residual_energy_fraction": self.residual_energy_fraction,
            "min_bin_separation": self.min_bin_separation,
            "fit_strategy": self.fit_strategy,
        }


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    selected_bin: int
    bin_amplitude: float
    refined_frequency: float
    residual_energy: float
    refine: dict
    near_accepted: bool = False

    def to_dict(self):
        return {
            "iteration": self.iteration,
            "selected_bin": self.selected_bin,
            "bin_amplitude": self.bin_amplitude,
            "refined_frequency": self.refined_frequency,
            "residual_energy": self.residual_energy,
            "near_accepted": self.near_accepted,
            "refine": dict(self.refine),
        }


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    tones: tuple
    residual: Signal
    diagnostics: tuple
    stop_reason: str
    original_energy: float
    residual_energy: float

    @property
    def frequencies(self):
        return [t.frequency for t in self.tones]

    @property
    def total_evaluations(self):
        return sum(rec.refine["evaluations"] for rec in self.diagnostics)


@dataclass(frozen=True)
class ToneMatch:
    truth_index: int
    estimate_frequency: float
    frequency_error: float
    amplitude_error: float
    phase_error: float


@dataclass(frozen=True)
class MatchReport:
    matches: tuple
    unmatched_estimates: int
    unmatched_truths: int

    @property
    def complete(self):
        return self.unmatched_estimates == 0 and self.unmatched_truths == 0


# ----------------------------
# Oracle bench
# ----------------------------

@dataclass(frozen=True)
class GridPeak:
    frequency: float
    magnitude: float
    grid_step: float


@dataclass(frozen=True)
class TrialReport:
    truth: tuple
    n_samples: int
    snr_db: float
    trials: int
    per_trial: tuple
    frequency_rmse: tuple
    amplitude_rmse: tuple
    phase_rmse: tuple
    matched_counts: tuple
    detection_successes: int
    stage_times: dict = field(default_factory=dict, compare=False)

    @property
    def frequency_rmse_bins(self):
        return tuple(v / bin_width(self.n_samples) for v in self.frequency_rmse)


@dataclass(frozen=True)
class ScalingPoint:
    n_samples: int
    wall_time: float = field(compare=False)
    evaluations: int = 0
    counted_evaluations: int = 0
