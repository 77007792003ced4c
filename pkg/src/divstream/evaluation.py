"""Summary scoring: dedup, greedy matching, and synthetic benchmarks.

The scoring protocol matches a generated summary against one reference
summary per user: generated exemplars are deduplicated within a radius
``gamma`` first, every (generated, reference) pair within ``gamma`` is a
match candidate, candidates are consumed greedily by ascending distance
under a one-to-one constraint, and the score is the matched fraction of
the reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyReferenceSet,
    IndexOutOfRange,
    TailTooLong,
)
from .model import FeatureVector


@dataclass(frozen=True)
class ReferenceSummary:
    """One user's reference: chosen frame positions and their features."""

    user_id: str
    frame_indices: tuple[int, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] == 0:
            raise EmptyReferenceSet(f"user {self.user_id}: no reference vectors")
        if len(self.frame_indices) != vecs.shape[0]:
            raise DimensionMismatch(
                f"user {self.user_id}: {len(self.frame_indices)} indices for "
                f"{vecs.shape[0]} vectors"
            )
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "frame_indices", tuple(int(i) for i in self.frame_indices))

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class MatchReport:
    """Outcome of matching one generated summary against one reference.

    ``matched_pairs`` holds (generated position, reference position)
    pairs, one-to-one on both sides; ``k_used`` is the number of
    generated exemplars that entered the matching.
    """

    score: float
    matched_pairs: tuple[tuple[int, int], ...]
    gamma_used: float
    k_used: int


@dataclass(frozen=True)
class ClusterSpec:
    """Isotropic Gaussian component of a synthetic stream."""

    center: np.ndarray
    stddev: float
    count: int

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64)
        if center.ndim != 1 or center.size == 0:
            raise ConfigError(f"cluster center must be a 1-d vector, got {center.shape}")
        if self.stddev <= 0.0:
            raise ConfigError(f"stddev must be > 0, got {self.stddev}")
        if self.count < 1:
            raise ConfigError(f"count must be >= 1, got {self.count}")
        object.__setattr__(self, "center", center)


def _as_points(vectors, what: str) -> np.ndarray:
    pts = np.asarray(
        [getattr(v, "values", v) for v in vectors]
        if not isinstance(vectors, np.ndarray)
        else vectors,
        dtype=np.float64,
    )
    if pts.size == 0:
        return pts.reshape(0, 0)
    if pts.ndim != 2:
        raise DimensionMismatch(f"{what}: expected (M, D) vectors, got shape {pts.shape}")
    return pts


def dedup(exemplars, gamma: float) -> list[int]:
    """Greedy near-duplicate removal, keeping earlier entries.

    Walks the exemplars in input order and retains one iff its distance
    to every already-retained exemplar is strictly greater than gamma.

    Args:
        exemplars: sequence of vectors (or FeatureVector-likes).
        gamma: dedup radius, >= 0.

    Returns:
        Positions (into the input sequence) of the retained exemplars;
        the result is stable under a second pass with the same gamma.
    """
    if gamma < 0.0:
        raise ConfigError(f"gamma must be >= 0, got {gamma}")
    pts = _as_points(exemplars, "exemplars")
    retained: list[int] = []
    for i in range(pts.shape[0]):
        keep = True
        for j in retained:
            if np.linalg.norm(pts[i] - pts[j]) <= gamma:
                keep = False
                break
        if keep:
            retained.append(i)
    return retained


def choose_k(reference_lengths) -> int:
    """Summary length rule: the longest reference, doubled when short.

    K is the maximum reference length; if that maximum is below 5 it is
    doubled once.

    Raises:
        EmptyReferenceSet: no references given.
        ConfigError: a non-positive length.
    """
    lengths = list(reference_lengths)
    if not lengths:
        raise EmptyReferenceSet("choose_k needs at least one reference length")
    if any(length < 1 for length in lengths):
        raise ConfigError(f"reference lengths must be >= 1, got {lengths}")
    k = max(int(length) for length in lengths)
    if k < 5:
        k = 2 * k
    return k


def match_score(generated, reference, gamma: float) -> MatchReport:
    """Greedy one-to-one matching within radius gamma.

    Args:
        generated: deduplicated generated exemplars, (G, D) vectors.
        reference: the reference vectors, (R, D) or a ReferenceSummary.
        gamma: match radius; candidate pairs need distance <= gamma.

    Returns:
        MatchReport with score = matches / R in [0, 1].

    Raises:
        EmptyReferenceSet: empty reference.
        DimensionMismatch: feature dimensions disagree.
    """
    if gamma < 0.0:
        raise ConfigError(f"gamma must be >= 0, got {gamma}")
    ref_pts = (
        reference.vectors
        if isinstance(reference, ReferenceSummary)
        else _as_points(reference, "reference")
    )
    if ref_pts.shape[0] == 0:
        raise EmptyReferenceSet("cannot match against an empty reference")
    gen_pts = _as_points(generated, "generated")
    if gen_pts.shape[0] == 0:
        return MatchReport(score=0.0, matched_pairs=(), gamma_used=gamma, k_used=0)
    if gen_pts.shape[1] != ref_pts.shape[1]:
        raise DimensionMismatch(
            f"generated dimension {gen_pts.shape[1]} vs reference {ref_pts.shape[1]}"
        )

    dists = np.sqrt(
        np.maximum(
            ((gen_pts[:, None, :] - ref_pts[None, :, :]) ** 2).sum(axis=2), 0.0
        )
    )
    gi, ri = np.nonzero(dists <= gamma)
    # ascending distance, position-ordered among ties, consumed greedily
    order = np.lexsort((ri, gi, dists[gi, ri]))
    gen_used = np.zeros(gen_pts.shape[0], dtype=bool)
    ref_used = np.zeros(ref_pts.shape[0], dtype=bool)
    pairs: list[tuple[int, int]] = []
    for t in order:
        g = int(gi[t])
        r = int(ri[t])
        if not gen_used[g] and not ref_used[r]:
            gen_used[g] = True
            ref_used[r] = True
            pairs.append((g, r))
    return MatchReport(
        score=len(pairs) / ref_pts.shape[0],
        matched_pairs=tuple(pairs),
        gamma_used=gamma,
        k_used=gen_pts.shape[0],
    )


def freeze_tail(frames: list[FeatureVector], tail_len: int) -> list[FeatureVector]:
    """Copy of the stream whose last ``tail_len`` frames all repeat.

    Every frame in the tail takes the feature values of frame
    N - tail_len; indices are untouched. Models a stream whose source
    got stuck on one value.

    Raises:
        TailTooLong: tail_len exceeds the stream length.
    """
    if tail_len < 0:
        raise ConfigError(f"tail_len must be >= 0, got {tail_len}")
    n = len(frames)
    if tail_len > n:
        raise TailTooLong(f"tail of {tail_len} frames exceeds stream length {n}")
    start = n - tail_len
    frozen = frames[start].values if tail_len else None
    out: list[FeatureVector] = []
    for pos, frame in enumerate(frames):
        values = frozen if pos >= start and tail_len else frame.values
        out.append(FeatureVector(index=frame.index, values=values))
    return out


def synth_mixture(
    cluster_specs: list[ClusterSpec], order: str, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded draw from a Gaussian mixture with per-frame labels.

    Args:
        cluster_specs: the components; all centers share one dimension.
        order: "sequential" emits cluster 0's frames, then cluster 1's,
            and so on; "shuffled" applies a seeded permutation on top.
        seed: drives both the draws and the shuffle.

    Returns:
        (features, labels): (N, D) float64 and (N,) int64 arrays, where
        labels[i] is the spec position that generated frame i.
    """
    if order not in ("sequential", "shuffled"):
        raise ConfigError(f"order must be sequential or shuffled, got {order!r}")
    if not cluster_specs:
        raise ConfigError("need at least one cluster spec")
    dim = cluster_specs[0].center.shape[0]
    if any(spec.center.shape[0] != dim for spec in cluster_specs):
        raise DimensionMismatch("cluster centers differ in dimension")
    rng = np.random.default_rng(seed)
    blocks = []
    labels = []
    for pos, spec in enumerate(cluster_specs):
        blocks.append(
            spec.center + spec.stddev * rng.standard_normal((spec.count, dim))
        )
        labels.extend([pos] * spec.count)
    features = np.vstack(blocks)
    label_arr = np.asarray(labels, dtype=np.int64)
    if order == "shuffled":
        perm = rng.permutation(features.shape[0])
        features = features[perm]
        label_arr = label_arr[perm]
    return features, label_arr


def cluster_coverage(exemplar_indices, labels) -> float:
    """Fraction of the labelled clusters holding at least one exemplar.

    Labels below zero mark unlabelled frames; they never count as a
    cluster and exemplars landing on them cover nothing.

    Raises:
        IndexOutOfRange: an exemplar index outside the labelled stream.
        ConfigError: no non-negative labels at all.
    """
    label_arr = np.asarray(labels, dtype=np.int64)
    clusters = set(int(c) for c in np.unique(label_arr) if c >= 0)
    if not clusters:
        raise ConfigError("labels contain no clusters")
    hit: set[int] = set()
    for idx in exemplar_indices:
        i = int(idx)
        if not 0 <= i < label_arr.shape[0]:
            raise IndexOutOfRange(f"exemplar index {i} outside stream of {label_arr.shape[0]}")
        if label_arr[i] >= 0:
            hit.add(int(label_arr[i]))
    return len(hit) / len(clusters)
