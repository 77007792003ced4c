"""Batch exemplar selectors: PAM-style swap search plus trivial baselines.

Both medoid selectors run the same greedy loop: start from K distinct
seeded-random rows, then repeatedly apply the single (medoid, candidate)
swap that lowers the objective the most, stopping at a local optimum or
after ``max_iters`` swaps. The search restarts from a few seeded inits
and keeps the best local optimum. The plain selector minimizes the
summed distance of every point to its nearest medoid; the
diversity-aware one subtracts a hull-volume bonus weighted by
``norm_factor_scale * N``, so with beta = 1 the two trace identical
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ConfigError, TooFewPoints

DIVERSITY_HULL = "hull"
DIVERSITY_VARIANCE = "variance"
DIVERSITY_MODES = (DIVERSITY_HULL, DIVERSITY_VARIANCE)

# precompute the full pairwise distance matrix below this many points
_DENSE_LIMIT = 4096


@dataclass(frozen=True)
class BatchConfig:
    """Knobs for the batch selectors.

    ``beta``, ``projection_dim``, ``norm_factor_scale`` and ``diversity``
    only matter to the diversity-aware selector; ``diversity`` picks the
    hull-volume score or a variance substitute (trace of the selected
    rows' covariance).
    """

    k: int
    beta: float = 0.5
    max_iters: int = 100
    projection_dim: int = 3
    seed: int = 0
    norm_factor_scale: float = 10.0
    diversity: str = DIVERSITY_HULL
    restarts: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.max_iters < 0:
            raise ConfigError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.projection_dim < 1:
            raise ConfigError(f"projection_dim must be >= 1, got {self.projection_dim}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.norm_factor_scale <= 0.0:
            raise ConfigError(
                f"norm_factor_scale must be > 0, got {self.norm_factor_scale}"
            )
        if self.diversity not in DIVERSITY_MODES:
            raise ConfigError(
                f"diversity must be one of {DIVERSITY_MODES}, got {self.diversity!r}"
            )


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ConfigError(f"expected a (N, D) point matrix, got shape {pts.shape}")
    return pts


def _diversity_fn(pts: np.ndarray, cfg: BatchConfig):
    if cfg.diversity == DIVERSITY_VARIANCE:

        def score(idx: np.ndarray) -> float:
            sel = pts[idx]
            return float(((sel - sel.mean(axis=0)) ** 2).sum() / sel.shape[0])

        return score

    def score(idx: np.ndarray) -> float:
        return geometry.divscore(pts[idx], cfg.projection_dim)

    return score


def _pam(
    pts: np.ndarray,
    k: int,
    seed: int,
    max_iters: int,
    beta: float,
    div_weight: float,
    div_fn,
    restarts: int = 1,
) -> tuple[list[int], list[float]]:
    """Best-improvement swap search over medoid index sets.

    Objective: beta * sum_i min_m dist(x_i, medoid_m) - div_weight *
    div_fn(medoids). Runs ``restarts`` seeded searches and keeps the
    best local optimum. Returns the winning indices and that run's
    objective after the start and each applied swap; the history is
    strictly decreasing by construction.
    """
    n = pts.shape[0]
    rng = np.random.default_rng(seed)

    dense = None
    if n <= _DENSE_LIMIT:
        dense = np.sqrt(
            np.maximum(
                np.add.outer((pts**2).sum(1), (pts**2).sum(1)) - 2.0 * pts @ pts.T,
                0.0,
            )
        )

    def dist_to(c: int) -> np.ndarray:
        if dense is not None:
            return dense[:, c]
        diff = pts - pts[c]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def rep_cost_parts(medoids: np.ndarray):
        # nearest and second-nearest medoid distance per point
        # advanced indexing copies, so the inf poke below is safe
        dmat = (
            dense[:, medoids]
            if dense is not None
            else np.stack([dist_to(m) for m in medoids], axis=1)
        )
        near = np.argmin(dmat, axis=1)
        d1 = dmat[np.arange(n), near]
        dmat[np.arange(n), near] = np.inf
        d2 = dmat.min(axis=1)
        return near, d1, d2

    use_div = div_weight != 0.0

    def objective(idx: np.ndarray, rep: float) -> float:
        if not use_div:
            return beta * rep
        return beta * rep - div_weight * div_fn(idx)

    def search(medoids: np.ndarray) -> tuple[np.ndarray, list[float]]:
        near, d1, d2 = rep_cost_parts(medoids)
        current = objective(medoids, float(d1.sum()))
        history = [current]
        in_set = np.zeros(n, dtype=bool)
        in_set[medoids] = True

        for _ in range(max_iters):
            best_cost = current
            best_slot = -1
            best_cand = -1
            for cand in range(n):
                if in_set[cand]:
                    continue
                dc = dist_to(cand)
                base = np.minimum(d1, dc)
                # removing medoid m reassigns its points to min(second, cand)
                delta = np.minimum(d2, dc) - base
                rep_by_slot = base.sum() + np.bincount(
                    near, weights=delta, minlength=k
                )
                for slot in range(k):
                    if use_div:
                        trial = medoids.copy()
                        trial[slot] = cand
                        cost = objective(trial, float(rep_by_slot[slot]))
                    else:
                        cost = beta * float(rep_by_slot[slot])
                    if cost < best_cost:
                        best_cost = cost
                        best_slot = slot
                        best_cand = cand
            if best_slot < 0:
                break
            in_set[medoids[best_slot]] = False
            in_set[best_cand] = True
            medoids[best_slot] = best_cand
            current = best_cost
            history.append(current)
            near, d1, d2 = rep_cost_parts(medoids)

        return medoids, history

    best_medoids: np.ndarray | None = None
    best_history: list[float] = []
    for _ in range(restarts):
        start = rng.choice(n, size=k, replace=False).astype(np.int64)
        medoids, history = search(start)
        if best_medoids is None or history[-1] < best_history[-1]:
            best_medoids, best_history = medoids, history

    return [int(m) for m in best_medoids], best_history


def batch_kmedoids(points, config: BatchConfig) -> list[int]:
    """K-medoid indices minimizing summed nearest-medoid distance.

    Args:
        points: (N, D) array-like, N >= config.k.

    Returns:
        K row indices, in slot order.

    Raises:
        TooFewPoints: fewer rows than requested medoids.
    """
    pts = _as_points(points)
    if pts.shape[0] < config.k:
        raise TooFewPoints(f"need at least {config.k} points, got {pts.shape[0]}")
    indices, _ = _pam(
        pts, config.k, config.seed, config.max_iters, 1.0, 0.0, None, config.restarts
    )
    return indices


def batch_precis(points, config: BatchConfig) -> list[int]:
    """Medoid indices trading representation against diversity.

    Minimizes beta * sum_i min_m dist(x_i, m) minus a diversity bonus
    weighted by norm_factor_scale * N * (1 - beta). With beta = 1 the
    result matches ``batch_kmedoids`` for the same seed, swap for swap.

    Raises:
        TooFewPoints: fewer rows than requested medoids.
        ConfigError: hull diversity needs k >= projection_dim + 1.
    """
    pts = _as_points(points)
    if pts.shape[0] < config.k:
        raise TooFewPoints(f"need at least {config.k} points, got {pts.shape[0]}")
    if config.diversity == DIVERSITY_HULL and config.k < config.projection_dim + 1:
        raise ConfigError(
            f"hull diversity needs k >= projection_dim + 1 "
            f"({config.k} < {config.projection_dim + 1})"
        )
    div_weight = config.norm_factor_scale * pts.shape[0] * (1.0 - config.beta)
    indices, _ = _pam(
        pts,
        config.k,
        config.seed,
        config.max_iters,
        config.beta,
        div_weight,
        _diversity_fn(pts, config),
        config.restarts,
    )
    return indices


def random_sample(n: int, k: int, seed: int) -> list[int]:
    """K distinct uniformly drawn indices from range(n), ascending.

    Raises:
        TooFewPoints: k > n.
        ConfigError: k < 1 or n < 1.
    """
    if n < 1 or k < 1:
        raise ConfigError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if k > n:
        raise TooFewPoints(f"cannot draw {k} distinct indices from {n}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(n, size=k, replace=False)
    return sorted(int(i) for i in picks)


def uniform_sample(n: int, k: int) -> list[int]:
    """Evenly spaced indices floor(j * n / k) for j in range(k).

    Raises:
        TooFewPoints: k > n.
        ConfigError: k < 1 or n < 1.
    """
    if n < 1 or k < 1:
        raise ConfigError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if k > n:
        raise TooFewPoints(f"cannot spread {k} indices over {n} frames")
    return [j * n // k for j in range(k)]
