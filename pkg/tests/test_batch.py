"""Batch selectors checked against exhaustive small-instance oracles."""

import itertools

import numpy as np
import pytest

from divstream import geometry
from divstream.batch import (
    BatchConfig,
    _pam,
    batch_kmedoids,
    batch_precis,
    random_sample,
    uniform_sample,
)
from divstream.errors import ConfigError, TooFewPoints


def rep_cost(pts, idx):
    d = np.linalg.norm(pts[:, None, :] - pts[idx][None, :, :], axis=2)
    return float(d.min(axis=1).sum())


def exhaustive_kmedoids(pts, k):
    best, best_cost = None, np.inf
    for combo in itertools.combinations(range(pts.shape[0]), k):
        c = rep_cost(pts, list(combo))
        if c < best_cost:
            best, best_cost = combo, c
    return best, best_cost


def exhaustive_precis(pts, k, beta, scale, d):
    w = scale * pts.shape[0] * (1.0 - beta)
    best, best_cost = None, np.inf
    for combo in itertools.combinations(range(pts.shape[0]), k):
        idx = list(combo)
        c = beta * rep_cost(pts, idx) - w * geometry.divscore(pts[idx], d)
        if c < best_cost:
            best, best_cost = combo, c
    return best, best_cost


class TestKMedoids:
    def test_matches_exhaustive_optimum(self):
        hits = 0
        for trial in range(15):
            rng = np.random.default_rng(trial)
            pts = rng.standard_normal((12, 3))
            got = batch_kmedoids(pts, BatchConfig(k=3, seed=trial))
            _, opt = exhaustive_kmedoids(pts, 3)
            if rep_cost(pts, got) <= opt * 1.0001:
                hits += 1
        # local search with restarts should land the tiny optimum almost always
        assert hits >= 13

    def test_clustered_data_one_per_cluster(self):
        rng = np.random.default_rng(5)
        centers = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
        pts = np.vstack([c + rng.standard_normal((20, 2)) for c in centers])
        idx = batch_kmedoids(pts, BatchConfig(k=3, seed=0))
        buckets = sorted(i // 20 for i in idx)
        assert buckets == [0, 1, 2]

    def test_indices_valid_and_distinct(self):
        rng = np.random.default_rng(6)
        pts = rng.standard_normal((40, 5))
        idx = batch_kmedoids(pts, BatchConfig(k=7, seed=2))
        assert len(idx) == 7
        assert len(set(idx)) == 7
        assert all(0 <= i < 40 for i in idx)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        pts = rng.standard_normal((60, 4))
        cfg = BatchConfig(k=5, seed=11)
        assert batch_kmedoids(pts, cfg) == batch_kmedoids(pts, cfg)

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            batch_kmedoids(np.zeros((3, 2)), BatchConfig(k=4))

    def test_sparse_path_matches_dense(self, monkeypatch):
        import divstream.batch as batch_mod

        rng = np.random.default_rng(8)
        pts = rng.standard_normal((50, 4))
        cfg = BatchConfig(k=4, seed=3)
        dense = batch_kmedoids(pts, cfg)
        monkeypatch.setattr(batch_mod, "_DENSE_LIMIT", 0)
        sparse = batch_kmedoids(pts, cfg)
        assert dense == sparse


class TestPrecis:
    def test_matches_exhaustive_objective(self):
        hits = 0
        for trial in range(15):
            rng = np.random.default_rng(100 + trial)
            pts = rng.standard_normal((12, 4))
            cfg = BatchConfig(k=3, beta=0.5, projection_dim=2, seed=trial)
            got = batch_precis(pts, cfg)
            w = 10.0 * 12 * 0.5
            cost = 0.5 * rep_cost(pts, got) - w * geometry.divscore(pts[got], 2)
            _, opt = exhaustive_precis(pts, 3, 0.5, 10.0, 2)
            if cost <= opt + 0.05 * abs(opt):
                hits += 1
        assert hits >= 13

    def test_beta_one_is_bit_identical_to_kmedoids(self):
        for trial in range(10):
            rng = np.random.default_rng(200 + trial)
            pts = rng.standard_normal((30, 4))
            cfg = BatchConfig(k=4, beta=1.0, projection_dim=2, seed=trial)
            assert batch_precis(pts, cfg) == batch_kmedoids(pts, cfg)

    def test_low_beta_spreads_wider_than_kmedoids(self):
        rng = np.random.default_rng(9)
        # dense blob plus a handful of satellites
        pts = np.vstack([rng.standard_normal((80, 2)) * 0.2, rng.standard_normal((6, 2)) * 8])
        km = batch_kmedoids(pts, BatchConfig(k=4, seed=1))
        dv = batch_precis(pts, BatchConfig(k=4, beta=0.1, projection_dim=2, seed=1))
        assert geometry.divscore(pts[dv], 2) > geometry.divscore(pts[km], 2)

    def test_hull_needs_enough_medoids(self):
        with pytest.raises(ConfigError):
            batch_precis(np.zeros((10, 4)), BatchConfig(k=3, projection_dim=3))

    def test_variance_mode_allows_small_k(self):
        rng = np.random.default_rng(10)
        pts = rng.standard_normal((20, 4))
        cfg = BatchConfig(k=2, beta=0.5, projection_dim=3, diversity="variance", seed=0)
        idx = batch_precis(pts, cfg)
        assert len(idx) == 2

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            batch_precis(np.zeros((2, 3)), BatchConfig(k=4))


class TestPamInternals:
    def test_history_strictly_decreasing(self):
        for trial in range(10):
            rng = np.random.default_rng(300 + trial)
            pts = rng.standard_normal((25, 3))
            _, hist = _pam(pts, 4, trial, 100, 1.0, 0.0, None, 1)
            assert all(b < a for a, b in zip(hist, hist[1:]))
            assert len(hist) >= 1

    def test_max_iters_zero_returns_seed_pick(self):
        rng = np.random.default_rng(12)
        pts = rng.standard_normal((20, 3))
        idx, hist = _pam(pts, 3, 5, 0, 1.0, 0.0, None, 1)
        assert len(hist) == 1
        start = np.random.default_rng(5).choice(20, size=3, replace=False)
        assert idx == [int(i) for i in start]

    def test_restarts_never_hurt(self):
        for trial in range(8):
            rng = np.random.default_rng(400 + trial)
            pts = rng.standard_normal((30, 4))
            _, h1 = _pam(pts, 4, trial, 100, 1.0, 0.0, None, 1)
            _, h5 = _pam(pts, 4, trial, 100, 1.0, 0.0, None, 5)
            assert h5[-1] <= h1[-1] + 1e-12


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"k": 0},
            {"k": 3, "beta": -0.1},
            {"k": 3, "beta": 1.5},
            {"k": 3, "max_iters": -1},
            {"k": 3, "restarts": 0},
            {"k": 3, "projection_dim": 0},
            {"k": 3, "seed": -1},
            {"k": 3, "norm_factor_scale": 0.0},
            {"k": 3, "diversity": "entropy"},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            BatchConfig(**kwargs)

    def test_bad_matrix_shape(self):
        with pytest.raises(ConfigError):
            batch_kmedoids(np.zeros(5), BatchConfig(k=2))
        with pytest.raises(ConfigError):
            batch_kmedoids(np.zeros((0, 3)), BatchConfig(k=2))


class TestTrivialBaselines:
    def test_uniform_spacing_rule(self):
        assert uniform_sample(10, 5) == [0, 2, 4, 6, 8]
        assert uniform_sample(7, 3) == [0, 2, 4]
        assert uniform_sample(5, 5) == [0, 1, 2, 3, 4]
        assert uniform_sample(100, 1) == [0]
        n, k = 997, 13
        assert uniform_sample(n, k) == [j * n // k for j in range(k)]

    def test_uniform_errors(self):
        with pytest.raises(TooFewPoints):
            uniform_sample(3, 4)
        with pytest.raises(ConfigError):
            uniform_sample(0, 1)
        with pytest.raises(ConfigError):
            uniform_sample(5, 0)

    def test_random_deterministic_sorted_distinct(self):
        a = random_sample(100, 10, seed=42)
        b = random_sample(100, 10, seed=42)
        assert a == b
        assert a == sorted(a)
        assert len(set(a)) == 10
        assert all(0 <= i < 100 for i in a)
        assert random_sample(100, 10, seed=43) != a

    def test_random_full_draw(self):
        assert random_sample(6, 6, seed=0) == [0, 1, 2, 3, 4, 5]

    def test_random_errors(self):
        with pytest.raises(TooFewPoints):
            random_sample(3, 4, seed=0)
        with pytest.raises(ConfigError):
            random_sample(0, 1, seed=0)
        with pytest.raises(ConfigError):
            random_sample(5, -1, seed=0)
