"""End-to-end orchestration: summarize runs, scoring, benchmarks."""

import numpy as np
import pytest

from divstream import runner
from divstream.errors import ConfigError, IndexOutOfRange
from divstream.evaluation import ReferenceSummary
from divstream.features_io import write_features, write_features_csv
from divstream.model import (
    ALGO_KMEDOIDS,
    ALGO_ONLINE_DIVERSE,
    ALGO_ONLINE_KMEDOIDS,
    ALGO_PRECIS,
    ALGO_RANDOM,
    ALGO_UNIFORM,
)

SUMMARY_KEYS = {
    "algo",
    "config",
    "exemplar_indices",
    "diversity_trace",
    "frames_seen",
    "wall_time_ms",
    "peak_stored_vectors",
}


@pytest.fixture
def stream_file(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((120, 6)).astype(np.float32)
    p = tmp_path / "stream.bin"
    write_features(p, X)
    return p, X.astype(np.float64)


class TestRunSummarize:
    def test_online_diverse_from_path(self, stream_file):
        p, X = stream_file
        doc = runner.run_summarize(
            ALGO_ONLINE_DIVERSE, input_path=str(p), k=8, beta=0.5, seed=1
        )
        assert set(doc) == SUMMARY_KEYS
        assert doc["algo"] == ALGO_ONLINE_DIVERSE
        assert len(doc["exemplar_indices"]) == 8
        assert doc["frames_seen"] == 120
        assert doc["peak_stored_vectors"] == 9
        assert doc["diversity_trace"][0][0] == 7
        assert set(doc["config"]) == {
            "k", "beta", "projection_dim", "noise_rate", "seed",
            "norm_factor_scale", "cost_form",
        }

    def test_frames_equals_path(self, stream_file):
        p, X = stream_file
        a = runner.run_summarize(ALGO_ONLINE_DIVERSE, input_path=str(p), k=8, seed=1)
        b = runner.run_summarize(
            ALGO_ONLINE_DIVERSE, frames=runner.frames_from_matrix(X), k=8, seed=1
        )
        assert a["exemplar_indices"] == b["exemplar_indices"]
        assert a["diversity_trace"] == b["diversity_trace"]

    def test_online_kmedoids_config_echo(self, stream_file):
        p, _ = stream_file
        doc = runner.run_summarize(ALGO_ONLINE_KMEDOIDS, input_path=str(p), k=5)
        assert doc["config"] == {"k": 5}
        assert doc["diversity_trace"] == []

    def test_batch_kmedoids(self, stream_file):
        p, X = stream_file
        doc = runner.run_summarize(ALGO_KMEDOIDS, input_path=str(p), k=4, seed=3)
        assert doc["config"] == {"k": 4, "max_iters": 100, "seed": 3}
        assert doc["peak_stored_vectors"] == 120
        assert len(set(doc["exemplar_indices"])) == 4

    def test_batch_precis_config_echo(self, stream_file):
        p, _ = stream_file
        doc = runner.run_summarize(ALGO_PRECIS, input_path=str(p), k=6, beta=0.4)
        assert doc["config"] == {
            "k": 6,
            "beta": 0.4,
            "max_iters": 100,
            "projection_dim": 3,
            "seed": 0,
            "norm_factor_scale": 10.0,
            "diversity": "hull",
        }

    def test_random_from_count_only(self):
        doc = runner.run_summarize(ALGO_RANDOM, frame_count=50, k=5, seed=9)
        assert doc["config"] == {"k": 5, "seed": 9}
        assert doc["frames_seen"] == 50
        assert doc["peak_stored_vectors"] == 0
        assert doc["exemplar_indices"] == sorted(doc["exemplar_indices"])

    def test_uniform_from_path(self, stream_file):
        p, _ = stream_file
        doc = runner.run_summarize(ALGO_UNIFORM, input_path=str(p), k=6)
        assert doc["exemplar_indices"] == [j * 120 // 6 for j in range(6)]
        assert doc["config"] == {"k": 6}

    def test_uniform_counts_frames_iterable(self):
        X = np.zeros((10, 2))
        doc = runner.run_summarize(
            ALGO_UNIFORM, frames=runner.frames_from_matrix(X), k=5
        )
        assert doc["exemplar_indices"] == [0, 2, 4, 6, 8]

    def test_gamma_rides_along_in_config(self, stream_file):
        p, _ = stream_file
        doc = runner.run_summarize(ALGO_UNIFORM, input_path=str(p), k=3, gamma=2.5)
        assert doc["config"]["gamma"] == 2.5

    def test_errors(self, stream_file):
        p, X = stream_file
        with pytest.raises(ConfigError):
            runner.run_summarize("pam", input_path=str(p), k=3)
        with pytest.raises(ConfigError):
            runner.run_summarize(
                ALGO_ONLINE_DIVERSE,
                input_path=str(p),
                frames=runner.frames_from_matrix(X),
                k=3,
            )
        with pytest.raises(ConfigError):
            runner.run_summarize(ALGO_ONLINE_DIVERSE, k=3)
        with pytest.raises(ConfigError):
            runner.run_summarize(ALGO_RANDOM, k=3)


class TestResolveAndScore:
    def test_resolve_indices(self, stream_file):
        p, X = stream_file
        got = runner.resolve_indices([5, 0, 100], str(p))
        np.testing.assert_allclose(got, X[[5, 0, 100]], rtol=0, atol=0)

    def test_resolve_out_of_range(self, stream_file):
        p, _ = stream_file
        with pytest.raises(IndexOutOfRange):
            runner.resolve_indices([0, 500], str(p))
        with pytest.raises(IndexOutOfRange):
            runner.resolve_indices([-1], str(p))

    def test_score_summary_shape(self):
        rng = np.random.default_rng(4)
        vecs = rng.standard_normal((6, 3))
        refs = [
            ReferenceSummary(user_id="a", frame_indices=(0, 1), vectors=vecs[:2]),
            ReferenceSummary(user_id="b", frame_indices=(2,), vectors=vecs[2:3]),
        ]
        rep = runner.score_summary(vecs, refs, gamma=1e-9)
        assert rep["mean_score"] == 1.0
        assert rep["k"] == 6
        assert rep["retained_after_dedup"] == 6
        assert [u["user_id"] for u in rep["users"]] == ["a", "b"]
        assert rep["users"][0]["matched"] == 2
        assert rep["users"][1]["reference_length"] == 1

    def test_score_summary_needs_references(self):
        with pytest.raises(ConfigError):
            runner.score_summary(np.ones((2, 2)), [], 1.0)

    def test_run_evaluate(self, stream_file):
        p, X = stream_file
        summary = {"algo": "uniform", "exemplar_indices": [0, 30, 60, 90]}
        refs = [
            ReferenceSummary(user_id="u0", frame_indices=(0, 60), vectors=X[[0, 60]])
        ]
        rep = runner.run_evaluate(summary, refs, 1e-9, str(p))
        assert rep["algo"] == "uniform"
        assert rep["mean_score"] == 1.0

    def test_run_evaluate_rejects_bad_summary(self, stream_file):
        p, _ = stream_file
        with pytest.raises(ConfigError):
            runner.run_evaluate({"algo": "x"}, [], 1.0, str(p))
        with pytest.raises(ConfigError):
            runner.run_evaluate({"exemplar_indices": []}, [], 1.0, str(p))


class TestReferenceDocs:
    def test_inline_features(self):
        docs = [
            {"user_id": "alice", "frame_indices": [3, 7], "features": [[1, 2], [3, 4]]}
        ]
        refs = runner.load_reference_docs(docs)
        assert refs[0].user_id == "alice"
        assert refs[0].frame_indices == (3, 7)
        np.testing.assert_array_equal(refs[0].vectors, [[1.0, 2.0], [3.0, 4.0]])

    def test_resolved_from_stream(self, stream_file):
        p, X = stream_file
        docs = [{"user_id": "bob", "frame_indices": [2, 5]}]
        refs = runner.load_reference_docs(docs, features_path=str(p))
        np.testing.assert_allclose(refs[0].vectors, X[[2, 5]])

    def test_default_user_ids(self):
        docs = [{"frame_indices": [0], "features": [[1.0]]}]
        assert runner.load_reference_docs(docs)[0].user_id == "user0"

    def test_errors(self):
        with pytest.raises(ConfigError):
            runner.load_reference_docs([["not", "an", "object"]])
        with pytest.raises(ConfigError):
            runner.load_reference_docs([{"user_id": "x", "frame_indices": []}])
        with pytest.raises(ConfigError):
            runner.load_reference_docs([{"user_id": "x", "frame_indices": [1]}])


class TestSkewBenchmark:
    def test_shape_and_labels(self):
        X, y, specs = runner.make_skew_benchmark(7)
        assert X.shape == (2000, 16)
        assert y.shape == (2000,)
        assert (y[-500:] == -1).all()
        assert sorted(set(y[:1500].tolist())) == [0, 1, 2, 3, 4]
        assert len(specs) == 5

    def test_tail_is_frozen(self):
        X, _, _ = runner.make_skew_benchmark(3)
        np.testing.assert_array_equal(X[-500:], np.tile(X[1500], (500, 1)))

    def test_separation_floor(self):
        X, y, specs = runner.make_skew_benchmark(11, separation=50.0, stddev=1.0)
        centers = np.stack([s.center for s in specs])
        gaps = [
            np.linalg.norm(centers[a] - centers[b])
            for a in range(5)
            for b in range(a + 1, 5)
        ]
        assert min(gaps) == pytest.approx(50.0)

    def test_deterministic(self):
        a = runner.make_skew_benchmark(5)
        b = runner.make_skew_benchmark(5)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_reference_summaries_hit_every_cluster(self):
        X, y, _ = runner.make_skew_benchmark(2)
        refs = runner.make_reference_summaries(X, y, n_users=3, seed=0)
        assert len(refs) == 3
        for ref in refs:
            assert len(ref) == 5
            assert sorted(y[list(ref.frame_indices)].tolist()) == [0, 1, 2, 3, 4]

    def test_skew_gamma(self):
        assert runner.skew_gamma() == 12.5
        assert runner.skew_gamma(stddev=2.0, separation=10.0) == 5.0

    def test_coverage_of_summary(self):
        X, y, _ = runner.make_skew_benchmark(4)
        doc = runner.run_summarize(
            ALGO_UNIFORM, frames=runner.frames_from_matrix(X), k=10
        )
        cov = runner.coverage_of_summary(doc, y)
        assert 0.0 <= cov <= 1.0


class TestBench:
    def test_row_shape(self):
        rows = runner.run_bench([200, 400], k=5, dim=4, seed=0, algos=["uniform"])
        assert len(rows) == 2
        for row, n in zip(rows, [200, 400]):
            assert row["algo"] == "uniform"
            assert row["n"] == n
            assert row["wall_time_ms"] >= 0.0
            assert row["peak_stored_vectors"] == 0
            assert row["repeats"] == 1

    def test_online_peak_stays_bounded(self):
        rows = runner.run_bench(
            [300, 600], k=6, dim=4, seed=1, algos=["online-diverse"], repeats=2
        )
        assert all(r["peak_stored_vectors"] == 7 for r in rows)

    def test_errors(self):
        with pytest.raises(ConfigError):
            runner.run_bench([], k=3, dim=2, seed=0, algos=["uniform"])
        with pytest.raises(ConfigError):
            runner.run_bench([10], k=3, dim=2, seed=0, algos=[])
        with pytest.raises(ConfigError):
            runner.run_bench([10], k=3, dim=2, seed=0, algos=["pam"])
        with pytest.raises(ConfigError):
            runner.run_bench([10], k=3, dim=2, seed=0, algos=["uniform"], repeats=0)


class TestSweepBeta:
    SYNTH = {
        "clusters": 3,
        "frames_per_cluster": 40,
        "tail_len": 30,
        "dim": 6,
        "users": 2,
    }

    def test_synthetic_rows(self):
        rows = runner.run_sweep_beta([0.5, 1.0], trials=2, k=6, synthetic=self.SYNTH)
        assert [r["beta"] for r in rows] == [0.5, 1.0]
        for r in rows:
            assert 0.0 <= r["mean_score"] <= 1.0
            assert r["std_score"] >= 0.0
            assert r["trials"] == 2

    def test_file_mode(self, tmp_path):
        X, y, _ = runner.make_skew_benchmark(
            0, n_clusters=3, frames_per_cluster=40, tail_len=30, dim=6
        )
        p = tmp_path / "skew.bin"
        write_features(p, X)
        refs = runner.make_reference_summaries(X, y, n_users=2, seed=1)
        rows = runner.run_sweep_beta(
            [0.5],
            trials=1,
            k=6,
            features_path=str(p),
            references=refs,
            gamma=runner.skew_gamma(),
        )
        assert len(rows) == 1
        assert 0.0 <= rows[0]["mean_score"] <= 1.0

    def test_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            runner.run_sweep_beta([], trials=1, synthetic=self.SYNTH)
        with pytest.raises(ConfigError):
            runner.run_sweep_beta([0.5], trials=0, synthetic=self.SYNTH)
        with pytest.raises(ConfigError):
            runner.run_sweep_beta([0.5], trials=1)  # neither mode
        with pytest.raises(ConfigError):
            runner.run_sweep_beta(
                [0.5], trials=1, synthetic=self.SYNTH, features_path="x.bin"
            )
        with pytest.raises(ConfigError):
            runner.run_sweep_beta([0.5], trials=1, features_path="x.bin")  # no refs


class TestCsvInputs:
    def test_summarize_reads_csv(self, tmp_path):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((30, 4))
        p = tmp_path / "frames.csv"
        write_features_csv(p, X)
        doc = runner.run_summarize(ALGO_ONLINE_DIVERSE, input_path=str(p), k=5)
        assert doc["frames_seen"] == 30
