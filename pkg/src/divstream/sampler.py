"""One-pass exemplar samplers with bounded memory.

Both samplers keep exactly K exemplar slots and the one in-flight frame,
regardless of stream length. The first K frames fill the slots; every
later frame competes for a single slot.

The diverse sampler ranks slots by a cost that trades closeness against
the diversity gained by the swap, where diversity is the convex hull
volume of the slots' PCA scores. The projection is refit from the
current K slots once per frame and shared by all K candidate swaps, so
the swap scores of one frame are mutually comparable. A swap is kept
only when its diversity exceeds ``zeta``, the largest diversity any
accepted configuration has reached; otherwise the swap is still applied
with probability ``noise_rate``, which lets the sampler escape flat
configurations without raising the mark.

The K-medoids sampler is the plain competitive baseline: the nearest
slot is always replaced (full replacement, learning rate 1).
"""

from __future__ import annotations

import numpy as np

from . import geometry
from .errors import (
    ConfigError,
    DegenerateData,
    InsufficientFrames,
    StreamOrderError,
)
from .model import (
    COST_FORM_SQUARED,
    REASON_DIVERSITY,
    REASON_NOISE,
    ExemplarSet,
    FeatureVector,
    SamplerConfig,
    SummaryResult,
    UpdateOutcome,
    validate_stream_item,
)


class _SamplerBase:
    """Slot bookkeeping shared by both online samplers."""

    def __init__(self, config: SamplerConfig):
        self.config = config
        self.frames_seen = 0
        self.rng = np.random.default_rng(config.seed)
        self._dim: int | None = None
        self._vectors: np.ndarray | None = None
        self._sources = np.full(config.k, -1, dtype=np.int64)
        self._filled = 0
        self._zeta = 0.0
        self._trace: list[tuple[int, float]] = []
        self._log: list[tuple[int, UpdateOutcome]] = []
        self._peak_stored = 0

    @property
    def exemplars(self) -> ExemplarSet:
        if self._vectors is None:
            return ExemplarSet(
                vectors=np.zeros((0, 0)), source_indices=self._sources[:0], zeta=self._zeta
            )
        return ExemplarSet(
            vectors=self._vectors[: self._filled],
            source_indices=self._sources[: self._filled],
            zeta=self._zeta,
        )

    def _ingest(self, item: FeatureVector) -> None:
        if item.index != self.frames_seen:
            raise StreamOrderError(
                f"expected frame {self.frames_seen}, got {item.index}"
            )
        validate_stream_item(item, self._dim)
        if self._dim is None:
            if self.config.projection_dim > item.dim:
                raise ConfigError(
                    f"projection_dim {self.config.projection_dim} exceeds "
                    f"stream dimension {item.dim}"
                )
            self._dim = item.dim
            self._vectors = np.empty((self.config.k, item.dim), dtype=np.float64)
        self._peak_stored = max(self._peak_stored, self._filled + 1)

    def _init_slot(self, item: FeatureVector) -> UpdateOutcome:
        slot = self._filled
        self._vectors[slot] = item.values
        self._sources[slot] = item.index
        self._filled += 1
        return UpdateOutcome.initialized(slot)

    def _record(self, item: FeatureVector, outcome: UpdateOutcome) -> UpdateOutcome:
        self._log.append((item.index, outcome))
        self.frames_seen += 1
        return outcome

    def finalize(self) -> SummaryResult:
        """Package the current slots; the sampler stays usable.

        Raises:
            InsufficientFrames: fewer frames observed than slots.
        """
        if self._filled < self.config.k:
            raise InsufficientFrames(
                f"saw {self.frames_seen} frames, need at least {self.config.k}"
            )
        return SummaryResult(
            exemplar_indices=[int(i) for i in self._sources],
            exemplar_vectors=self._vectors.copy(),
            diversity_trace=list(self._trace),
            update_log=list(self._log),
            frames_seen=self.frames_seen,
            peak_stored_vectors=self._peak_stored,
        )


class OnlineDiverseSampler(_SamplerBase):
    """Competitive sampler biased toward hull-volume diversity."""

    def __init__(self, config: SamplerConfig):
        super().__init__(config)
        if config.projection_dim not in (2, 3):
            raise ConfigError(
                "hull volumes are exact only in 2 or 3 dimensions, got "
                f"projection_dim {config.projection_dim}"
            )

    def observe(self, item: FeatureVector) -> UpdateOutcome:
        """Feed one frame; frame indices must arrive as 0, 1, 2, ...

        Returns:
            UpdateOutcome: ``initialized`` during the first K frames,
            afterwards ``replaced`` (reason diversity or noise) or
            ``rejected``, always carrying the winning slot.
        """
        self._ingest(item)
        cfg = self.config
        if self._filled < cfg.k:
            outcome = self._init_slot(item)
            if self._filled == cfg.k:
                # diversity of the initial configuration opens the trace
                self._zeta = geometry.divscore(self._vectors, cfg.projection_dim)
                self._trace.append((item.index, self._zeta))
            return self._record(item, outcome)

        x = item.values
        i = item.index
        c_factor = cfg.norm_factor_scale * i
        diffs = self._vectors - x
        dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        div_weight = c_factor * (1.0 - cfg.beta)

        if div_weight == 0.0:
            # distance decides alone; only the winner's swap volume is
            # needed for the acceptance gate
            winner = int(np.argmin(dists))
            win_vol = self._swap_volumes(x, only_slot=winner)
        else:
            vols = self._swap_volumes(x)
            if cfg.cost_form == COST_FORM_SQUARED:
                costs = cfg.beta * dists**2 + div_weight * vols - self._zeta
            else:
                costs = cfg.beta * dists - div_weight * (vols - self._zeta)
            winner = int(np.argmin(costs))
            win_vol = float(vols[winner])

        if win_vol > self._zeta:
            self._vectors[winner] = x
            self._sources[winner] = i
            self._zeta = win_vol
            self._trace.append((i, self._zeta))
            return self._record(item, UpdateOutcome.replaced(winner, REASON_DIVERSITY))
        if self.rng.random() < cfg.noise_rate:
            self._vectors[winner] = x
            self._sources[winner] = i
            self._trace.append((i, self._zeta))
            return self._record(item, UpdateOutcome.replaced(winner, REASON_NOISE))
        return self._record(item, UpdateOutcome.rejected(winner))

    def _swap_volumes(self, x: np.ndarray, only_slot: int | None = None):
        """Hull volume of the slots' scores with each slot swapped for x.

        One shared projection per frame: fit to the current slots, then
        every swap (and x itself) is scored in that view.
        """
        cfg = self.config
        k = cfg.k
        if k < cfg.projection_dim + 1:
            # fewer than d + 1 points never enclose d-dimensional volume
            return 0.0 if only_slot is not None else np.zeros(k)
        try:
            basis = geometry.fit_projection(self._vectors, cfg.projection_dim)
        except DegenerateData:
            # identical slots span nothing; no swap can open a hull
            return 0.0 if only_slot is not None else np.zeros(k)
        scores = geometry.project_rows(basis, self._vectors)
        cand = basis.basis @ (x - basis.mean)
        buf = np.ascontiguousarray(scores)
        if only_slot is not None:
            saved = buf[only_slot].copy()
            buf[only_slot] = cand
            vol = geometry.hull_volume(buf)
            buf[only_slot] = saved
            return vol
        vols = np.empty(k)
        for slot in range(k):
            saved = buf[slot].copy()
            buf[slot] = cand
            vols[slot] = geometry.hull_volume(buf)
            buf[slot] = saved
        return vols


class OnlineKMedoidsSampler(_SamplerBase):
    """Nearest-slot competitive baseline with unconditional replacement."""

    def observe(self, item: FeatureVector) -> UpdateOutcome:
        """Feed one frame; the nearest slot always takes it."""
        self._ingest(item)
        if self._filled < self.config.k:
            return self._record(item, self._init_slot(item))
        diffs = self._vectors - item.values
        dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        winner = int(np.argmin(dists))
        self._vectors[winner] = item.values
        self._sources[winner] = item.index
        return self._record(item, UpdateOutcome.replaced(winner, REASON_DIVERSITY))


def make_sampler(algo: str, config: SamplerConfig) -> _SamplerBase:
    """Build a sampler by its public algorithm name."""
    from .model import ALGO_ONLINE_DIVERSE, ALGO_ONLINE_KMEDOIDS

    if algo == ALGO_ONLINE_DIVERSE:
        return OnlineDiverseSampler(config)
    if algo == ALGO_ONLINE_KMEDOIDS:
        return OnlineKMedoidsSampler(config)
    raise ConfigError(f"not an online algorithm: {algo!r}")
