"""Domain types for feature streams and exemplar summaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonFiniteValue

ALGO_ONLINE_DIVERSE = "online-diverse"
ALGO_ONLINE_KMEDOIDS = "online-kmedoids"
ALGO_PRECIS = "precis"
ALGO_KMEDOIDS = "kmedoids"
ALGO_RANDOM = "random"
ALGO_UNIFORM = "uniform"

ONLINE_ALGOS = (ALGO_ONLINE_DIVERSE, ALGO_ONLINE_KMEDOIDS)
BATCH_ALGOS = (ALGO_PRECIS, ALGO_KMEDOIDS, ALGO_RANDOM, ALGO_UNIFORM)
ALL_ALGOS = ONLINE_ALGOS + BATCH_ALGOS

COST_FORM_ALGORITHM = "algorithm"
COST_FORM_SQUARED = "squared"
COST_FORMS = (COST_FORM_ALGORITHM, COST_FORM_SQUARED)


@dataclass(frozen=True)
class FeatureVector:
    """One frame of the stream: a position and its feature values.

    ``values`` is stored as a float64 copy of whatever array-like the
    caller hands in, so downstream holders never alias caller memory.
    """

    index: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionMismatch(
                f"frame {self.index}: expected a non-empty 1-d vector, got shape {arr.shape}"
            )
        object.__setattr__(self, "values", arr.copy())

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def validate_stream_item(item: FeatureVector, expected_dim: Optional[int]) -> FeatureVector:
    """Check one stream item against the established stream dimension.

    Args:
        item: the incoming frame.
        expected_dim: dimension fixed by the first frame, or None if this
            is the first frame and any dimension is acceptable.

    Returns:
        The item, untouched.

    Raises:
        DimensionMismatch: wrong vector length.
        NonFiniteValue: NaN or infinity anywhere in the vector.
    """
    if expected_dim is not None and item.dim != expected_dim:
        raise DimensionMismatch(
            f"frame {item.index}: got dimension {item.dim}, stream is {expected_dim}"
        )
    if not np.isfinite(item.values).all():
        raise NonFiniteValue(f"frame {item.index}: non-finite feature value")
    return item


@dataclass
class ExemplarSet:
    """K exemplar slots plus the running diversity high-water mark.

    ``vectors`` is a (K, D) array whose rows are bit-exact copies of
    observed frames (full replacement, never blends). ``source_indices[k]``
    is the stream position row k came from. ``zeta`` is the largest
    diversity score any accepted configuration has reached; noise-driven
    replacements leave it untouched.
    """

    vectors: np.ndarray
    source_indices: np.ndarray
    zeta: float = 0.0

    @property
    def k(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


OUTCOME_INITIALIZED = "initialized"
OUTCOME_REPLACED = "replaced"
OUTCOME_REJECTED = "rejected"

REASON_DIVERSITY = "diversity"
REASON_NOISE = "noise"


@dataclass(frozen=True)
class UpdateOutcome:
    """What one observed frame did to the exemplar slots.

    ``slot`` is the frame's winning slot for every post-initialization
    frame, including rejected ones (the rejection happened *at* that
    slot). ``reason`` is set only for replacements.
    """

    kind: str
    slot: Optional[int] = None
    reason: Optional[str] = None

    @classmethod
    def initialized(cls, slot: int) -> "UpdateOutcome":
        return cls(OUTCOME_INITIALIZED, slot=slot)

    @classmethod
    def replaced(cls, slot: int, reason: str) -> "UpdateOutcome":
        return cls(OUTCOME_REPLACED, slot=slot, reason=reason)

    @classmethod
    def rejected(cls, slot: int) -> "UpdateOutcome":
        return cls(OUTCOME_REJECTED, slot=slot)


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for the online samplers.

    Args:
        k: number of exemplar slots, >= 1.
        beta: balance between representation (1.0) and diversity (0.0).
        projection_dim: hull dimension d used for the diversity score.
        noise_rate: probability of replacing anyway after a rejection.
        seed: RNG seed; fixed seed means a fully reproducible run.
        norm_factor_scale: diversity weight grows as scale * frame_index.
        cost_form: "algorithm" ranks slots by beta*dist - C*(1-beta)*gain;
            "squared" uses the squared-distance variant with the raw
            swapped score. Both share the same acceptance gate.
    """

    k: int
    beta: float
    projection_dim: int = 3
    noise_rate: float = 0.05
    seed: int = 0
    norm_factor_scale: float = 10.0
    cost_form: str = COST_FORM_ALGORITHM

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.projection_dim < 1:
            raise ConfigError(f"projection_dim must be >= 1, got {self.projection_dim}")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ConfigError(f"noise_rate must be in [0, 1], got {self.noise_rate}")
        if self.norm_factor_scale <= 0.0:
            raise ConfigError(
                f"norm_factor_scale must be > 0, got {self.norm_factor_scale}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.cost_form not in COST_FORMS:
            raise ConfigError(
                f"cost_form must be one of {COST_FORMS}, got {self.cost_form!r}"
            )


@dataclass
class SummaryResult:
    """Everything a finished run reports.

    ``diversity_trace`` holds (frame index, zeta) pairs recorded when
    initialization completes and at every replacement event; restricted
    to diversity-driven replacements the zeta column is strictly
    increasing. ``update_log`` has one (frame index, outcome) entry per
    observed frame. ``peak_stored_vectors`` counts the most feature
    vectors ever held at once, the bounded-memory witness.
    """

    exemplar_indices: list[int]
    exemplar_vectors: np.ndarray
    diversity_trace: list[tuple[int, float]]
    update_log: list[tuple[int, UpdateOutcome]] = field(repr=False, default_factory=list)
    frames_seen: int = 0
    peak_stored_vectors: int = 0
