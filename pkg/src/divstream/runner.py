"""Run-level orchestration: summarize, evaluate, bench, and beta sweeps.

The HTTP service endpoints and the test harness both call these
functions; they work on plain paths, iterables, and dictionaries so the
transport layer stays thin.
"""

from __future__ import annotations

import time
from statistics import median
from typing import Iterable, Iterator

import numpy as np

from . import features_io
from .batch import BatchConfig, batch_kmedoids, batch_precis, random_sample, uniform_sample
from .errors import ConfigError, DivstreamError, IndexOutOfRange
from .evaluation import (
    ClusterSpec,
    ReferenceSummary,
    cluster_coverage,
    dedup,
    freeze_tail,
    match_score,
    synth_mixture,
)
from .model import (
    ALGO_KMEDOIDS,
    ALGO_ONLINE_DIVERSE,
    ALGO_ONLINE_KMEDOIDS,
    ALGO_PRECIS,
    ALGO_RANDOM,
    ALGO_UNIFORM,
    ALL_ALGOS,
    ONLINE_ALGOS,
    FeatureVector,
    SamplerConfig,
)
from .sampler import make_sampler


def frames_from_matrix(matrix: np.ndarray) -> Iterator[FeatureVector]:
    """Wrap a (N, D) matrix as a 0-indexed frame iterator."""
    for i in range(matrix.shape[0]):
        yield FeatureVector(index=i, values=matrix[i])


def build_summary(algo: str, config: dict, indices, trace, frames_seen, wall_ms, peak) -> dict:
    """Assemble the canonical summary document."""
    return {
        "algo": algo,
        "config": config,
        "exemplar_indices": [int(i) for i in indices],
        "diversity_trace": [[int(i), float(z)] for i, z in trace],
        "frames_seen": int(frames_seen),
        "wall_time_ms": float(wall_ms),
        "peak_stored_vectors": int(peak),
    }


def config_echo(
    algo: str,
    *,
    k: int,
    beta: float,
    projection_dim: int,
    noise_rate: float,
    seed: int,
    norm_factor_scale: float,
    cost_form: str,
    max_iters: int,
    diversity: str,
    gamma: float | None,
) -> dict:
    """The knobs that actually influenced a run, for the summary echo."""
    if algo == ALGO_ONLINE_DIVERSE:
        config = {
            "k": k,
            "beta": beta,
            "projection_dim": projection_dim,
            "noise_rate": noise_rate,
            "seed": seed,
            "norm_factor_scale": norm_factor_scale,
            "cost_form": cost_form,
        }
    elif algo == ALGO_ONLINE_KMEDOIDS:
        config = {"k": k}
    elif algo == ALGO_KMEDOIDS:
        config = {"k": k, "max_iters": max_iters, "seed": seed}
    elif algo == ALGO_PRECIS:
        config = {
            "k": k,
            "beta": beta,
            "max_iters": max_iters,
            "projection_dim": projection_dim,
            "seed": seed,
            "norm_factor_scale": norm_factor_scale,
            "diversity": diversity,
        }
    elif algo == ALGO_RANDOM:
        config = {"k": k, "seed": seed}
    elif algo == ALGO_UNIFORM:
        config = {"k": k}
    else:
        raise ConfigError(f"unknown algorithm {algo!r}, pick one of {ALL_ALGOS}")
    if gamma is not None:
        config["gamma"] = gamma
    return config


def run_summarize(
    algo: str,
    *,
    input_path: str | None = None,
    frames: Iterable[FeatureVector] | None = None,
    frame_count: int | None = None,
    fmt: str = features_io.FORMAT_AUTO,
    skip_header: bool = False,
    k: int,
    beta: float = 0.5,
    projection_dim: int = 3,
    noise_rate: float = 0.05,
    seed: int = 0,
    norm_factor_scale: float = 10.0,
    cost_form: str = "algorithm",
    max_iters: int = 100,
    diversity: str = "hull",
    gamma: float | None = None,
) -> dict:
    """Select exemplars from a stream and describe the run.

    Exactly one of ``input_path`` and ``frames`` must be given, except
    for the index-only algorithms (random, uniform) which can run from
    ``frame_count`` alone.

    Returns:
        Summary dict: algo, config echo, exemplar_indices,
        diversity_trace, frames_seen, wall_time_ms, peak_stored_vectors.
    """
    if algo not in ALL_ALGOS:
        raise ConfigError(f"unknown algorithm {algo!r}, pick one of {ALL_ALGOS}")
    if input_path is not None and frames is not None:
        raise ConfigError("pass input_path or frames, not both")
    config = config_echo(
        algo,
        k=k,
        beta=beta,
        projection_dim=projection_dim,
        noise_rate=noise_rate,
        seed=seed,
        norm_factor_scale=norm_factor_scale,
        cost_form=cost_form,
        max_iters=max_iters,
        diversity=diversity,
        gamma=gamma,
    )

    start = time.perf_counter()

    if algo in ONLINE_ALGOS:
        sampler_cfg = SamplerConfig(
            k=k,
            beta=beta,
            projection_dim=projection_dim,
            noise_rate=noise_rate,
            seed=seed,
            norm_factor_scale=norm_factor_scale,
            cost_form=cost_form,
        )
        sampler = make_sampler(algo, sampler_cfg)
        stream = (
            features_io.read_features(input_path, fmt, skip_header)
            if input_path is not None
            else frames
        )
        if stream is None:
            raise ConfigError(f"{algo} needs an input stream")
        for frame in stream:
            sampler.observe(frame)
        result = sampler.finalize()
        wall_ms = (time.perf_counter() - start) * 1e3
        return build_summary(
            algo,
            config,
            result.exemplar_indices,
            result.diversity_trace,
            result.frames_seen,
            wall_ms,
            result.peak_stored_vectors,
        )

    if algo in (ALGO_KMEDOIDS, ALGO_PRECIS):
        if input_path is not None:
            stream = features_io.read_features(input_path, fmt, skip_header)
        elif frames is not None:
            stream = frames
        else:
            raise ConfigError(f"{algo} needs an input stream")
        # batch selectors buffer the whole stream by design
        matrix = features_io.collect(stream)
        n = matrix.shape[0]
        batch_cfg = BatchConfig(
            k=k,
            beta=beta,
            max_iters=max_iters,
            projection_dim=projection_dim,
            seed=seed,
            norm_factor_scale=norm_factor_scale,
            diversity=diversity,
        )
        if algo == ALGO_KMEDOIDS:
            indices = batch_kmedoids(matrix, batch_cfg)
        else:
            indices = batch_precis(matrix, batch_cfg)
        wall_ms = (time.perf_counter() - start) * 1e3
        return build_summary(algo, config, indices, [], n, wall_ms, n)

    # index-only baselines: need the frame count, never the vectors
    if frame_count is None:
        if input_path is not None:
            frame_count = features_io.peek_count(input_path, fmt, skip_header)
        elif frames is not None:
            frame_count = sum(1 for _ in frames)
    if frame_count is None:
        raise ConfigError(
            f"{algo} needs a known frame count; streaming input with an "
            "unknown length cannot be sampled by index"
        )
    if algo == ALGO_RANDOM:
        indices = random_sample(frame_count, k, seed)
    else:
        indices = uniform_sample(frame_count, k)
    wall_ms = (time.perf_counter() - start) * 1e3
    return build_summary(algo, config, indices, [], frame_count, wall_ms, 0)


def resolve_indices(
    indices: list[int],
    input_path: str,
    fmt: str = features_io.FORMAT_AUTO,
    skip_header: bool = False,
) -> np.ndarray:
    """Fetch the feature vectors at the given stream positions.

    Single pass, holding only the requested rows.

    Raises:
        IndexOutOfRange: an index beyond the end of the stream.
    """
    wanted = {int(i) for i in indices}
    if any(i < 0 for i in wanted):
        raise IndexOutOfRange(f"negative exemplar index in {sorted(wanted)[:3]}")
    found: dict[int, np.ndarray] = {}
    highest = max(wanted) if wanted else -1
    for frame in features_io.read_features(input_path, fmt, skip_header):
        if frame.index in wanted:
            found[frame.index] = frame.values
            if len(found) == len(wanted) and frame.index == highest:
                break
    missing = wanted - set(found)
    if missing:
        raise IndexOutOfRange(
            f"exemplar indices {sorted(missing)[:5]} not present in the stream"
        )
    return np.vstack([found[int(i)] for i in indices])


def score_summary(
    exemplar_vectors: np.ndarray,
    references: list[ReferenceSummary],
    gamma: float,
) -> dict:
    """Dedup generated exemplars, match each reference, average."""
    if not references:
        raise ConfigError("need at least one reference summary")
    retained = dedup(exemplar_vectors, gamma)
    generated = exemplar_vectors[retained]
    users = []
    for ref in references:
        report = match_score(generated, ref, gamma)
        users.append(
            {
                "user_id": ref.user_id,
                "score": report.score,
                "matched": len(report.matched_pairs),
                "reference_length": len(ref),
            }
        )
    return {
        "gamma": float(gamma),
        "k": int(exemplar_vectors.shape[0]),
        "retained_after_dedup": int(generated.shape[0]),
        "users": users,
        "mean_score": float(np.mean([u["score"] for u in users])),
    }


def run_evaluate(
    summary: dict,
    references: list[ReferenceSummary],
    gamma: float,
    features_path: str,
    fmt: str = features_io.FORMAT_AUTO,
    skip_header: bool = False,
) -> dict:
    """Score a summarize run against reference summaries."""
    indices = summary.get("exemplar_indices")
    if not isinstance(indices, list) or not indices:
        raise ConfigError("summary document lacks exemplar_indices")
    vectors = resolve_indices(indices, features_path, fmt, skip_header)
    report = score_summary(vectors, references, gamma)
    report["algo"] = summary.get("algo", "unknown")
    return report


def load_reference_docs(
    docs: list[dict],
    features_path: str | None = None,
    fmt: str = features_io.FORMAT_AUTO,
    skip_header: bool = False,
) -> list[ReferenceSummary]:
    """Build ReferenceSummary objects from parsed JSON documents.

    Each document carries user_id, frame_indices, and optionally
    features; without inline features the indices are resolved against
    the feature stream.
    """
    refs = []
    for pos, doc in enumerate(docs):
        if not isinstance(doc, dict):
            raise ConfigError(f"reference {pos}: expected an object")
        user = str(doc.get("user_id", f"user{pos}"))
        idx = doc.get("frame_indices")
        if not isinstance(idx, list) or not idx:
            raise ConfigError(f"reference {user}: frame_indices missing or empty")
        feats = doc.get("features")
        if feats is None:
            if features_path is None:
                raise ConfigError(
                    f"reference {user}: no inline features and no feature stream"
                )
            vectors = resolve_indices([int(i) for i in idx], features_path, fmt, skip_header)
        else:
            vectors = np.asarray(feats, dtype=np.float64)
        refs.append(
            ReferenceSummary(user_id=user, frame_indices=tuple(int(i) for i in idx), vectors=vectors)
        )
    return refs


def make_skew_benchmark(
    seed: int,
    n_clusters: int = 5,
    frames_per_cluster: int = 300,
    tail_len: int = 500,
    dim: int = 16,
    stddev: float = 1.0,
    separation: float = 50.0,
) -> tuple[np.ndarray, np.ndarray, list[ClusterSpec]]:
    """Well-separated Gaussian clusters followed by a frozen tail.

    The stream is sequential: all of cluster 0, then cluster 1, and so
    on, with the last ``tail_len`` frames frozen to a single repeated
    value near the final cluster. Tail frames carry label -1.

    Args:
        separation: minimum pairwise center distance in stddev units.

    Returns:
        (features, labels, specs): the (N, D) stream, per-frame labels,
        and the cluster specs that generated it.
    """
    if n_clusters < 1:
        raise ConfigError(f"need at least one cluster, got {n_clusters}")
    master = np.random.default_rng(seed)
    sub = master.integers(0, 2**63 - 1, size=2)
    centers = np.random.default_rng(sub[0]).standard_normal((n_clusters, dim))
    if n_clusters > 1:
        gaps = [
            float(np.linalg.norm(centers[a] - centers[b]))
            for a in range(n_clusters)
            for b in range(a + 1, n_clusters)
        ]
        centers *= separation * stddev / min(gaps)
    specs = [
        ClusterSpec(center=centers[c], stddev=stddev, count=frames_per_cluster)
        for c in range(n_clusters)
    ]
    draw_specs = list(specs)
    if tail_len:
        draw_specs.append(
            ClusterSpec(center=centers[-1], stddev=stddev, count=tail_len)
        )
    features, labels = synth_mixture(draw_specs, "sequential", int(sub[1]))
    labels = labels.copy()
    labels[labels == n_clusters] = -1
    if tail_len:
        frames = list(frames_from_matrix(features))
        frames = freeze_tail(frames, tail_len)
        features = np.vstack([f.values for f in frames])
    return features, labels, specs


def make_reference_summaries(
    features: np.ndarray,
    labels: np.ndarray,
    n_users: int,
    seed: int,
    per_cluster: int = 1,
) -> list[ReferenceSummary]:
    """Synthetic per-user references: random frames from every cluster."""
    rng = np.random.default_rng(seed)
    clusters = sorted(int(c) for c in np.unique(labels) if c >= 0)
    refs = []
    for u in range(n_users):
        picks: list[int] = []
        for c in clusters:
            members = np.flatnonzero(labels == c)
            picks.extend(
                int(i) for i in rng.choice(members, size=per_cluster, replace=False)
            )
        refs.append(
            ReferenceSummary(
                user_id=f"user{u}",
                frame_indices=tuple(picks),
                vectors=features[picks],
            )
        )
    return refs


def skew_gamma(stddev: float = 1.0, separation: float = 50.0) -> float:
    """Match radius for the skew benchmark: quarter of the separation."""
    return 0.25 * separation * stddev


def run_bench(
    n_values: list[int],
    k: int,
    dim: int,
    seed: int,
    algos: list[str],
    repeats: int = 1,
    beta: float = 0.5,
    projection_dim: int = 3,
    noise_rate: float = 0.05,
) -> list[dict]:
    """Time each algorithm over synthetic streams of the given lengths.

    Returns one row per (algo, n) with the median wall time across
    ``repeats`` runs, throughput, and the peak stored-vector count.
    """
    if not n_values or not algos:
        raise ConfigError("bench needs at least one n value and one algorithm")
    for algo in algos:
        if algo not in ALL_ALGOS:
            raise ConfigError(f"unknown algorithm {algo!r}, pick one of {ALL_ALGOS}")
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    rows = []
    for n in n_values:
        matrix = np.random.default_rng([seed, n]).standard_normal((n, dim))
        for algo in algos:
            # absorb jit and allocator warmup outside the timed region
            warm = min(n, 4 * k)
            _timed_run(algo, matrix[:warm], k, beta, projection_dim, noise_rate, seed)
            walls = []
            peak = None
            for _ in range(repeats):
                wall_ms, peak = _timed_run(
                    algo, matrix, k, beta, projection_dim, noise_rate, seed
                )
                walls.append(wall_ms)
            wall = median(walls)
            rows.append(
                {
                    "algo": algo,
                    "n": int(n),
                    "wall_time_ms": float(wall),
                    "frames_per_sec": float(n / (wall / 1e3)) if wall > 0 else float("inf"),
                    "peak_stored_vectors": int(peak),
                    "repeats": int(repeats),
                }
            )
    return rows


def _timed_run(algo, matrix, k, beta, projection_dim, noise_rate, seed):
    n = matrix.shape[0]
    start = time.perf_counter()
    if algo in ONLINE_ALGOS:
        cfg = SamplerConfig(
            k=k,
            beta=beta,
            projection_dim=projection_dim,
            noise_rate=noise_rate,
            seed=seed,
        )
        sampler = make_sampler(algo, cfg)
        for frame in frames_from_matrix(matrix):
            sampler.observe(frame)
        peak = sampler.finalize().peak_stored_vectors if n >= k else k
    elif algo in (ALGO_KMEDOIDS, ALGO_PRECIS):
        cfg = BatchConfig(k=k, beta=beta, projection_dim=projection_dim, seed=seed)
        if algo == ALGO_KMEDOIDS:
            batch_kmedoids(matrix, cfg)
        else:
            batch_precis(matrix, cfg)
        peak = n
    elif algo == ALGO_RANDOM:
        random_sample(n, k, seed)
        peak = 0
    else:
        uniform_sample(n, k)
        peak = 0
    return (time.perf_counter() - start) * 1e3, peak


def run_sweep_beta(
    betas: list[float],
    trials: int,
    *,
    algo: str = ALGO_ONLINE_DIVERSE,
    k: int = 10,
    seed: int = 0,
    projection_dim: int = 3,
    noise_rate: float = 0.05,
    norm_factor_scale: float = 10.0,
    synthetic: dict | None = None,
    features_path: str | None = None,
    references: list[ReferenceSummary] | None = None,
    gamma: float | None = None,
    fmt: str = features_io.FORMAT_AUTO,
    skip_header: bool = False,
) -> list[dict]:
    """Mean summary score per beta, over seeded trials.

    Synthetic mode regenerates the skewed-cluster benchmark for every
    trial seed and scores against synthetic per-user references; file
    mode reruns the sampler on the given stream with varying seeds and
    scores against the given references.
    """
    if not betas:
        raise ConfigError("sweep needs at least one beta")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    if (synthetic is None) == (features_path is None):
        raise ConfigError("pick exactly one of synthetic spec or features path")
    if features_path is not None and not references:
        raise ConfigError("file mode needs reference summaries")

    per_beta: dict[float, list[float]] = {float(b): [] for b in betas}
    for trial in range(trials):
        trial_seed = seed + trial
        if synthetic is not None:
            spec = dict(synthetic)
            stddev = float(spec.get("stddev", 1.0))
            separation = float(spec.get("separation", 50.0))
            n_users = int(spec.get("users", 5))
            features, labels, _ = make_skew_benchmark(
                trial_seed,
                n_clusters=int(spec.get("clusters", 5)),
                frames_per_cluster=int(spec.get("frames_per_cluster", 300)),
                tail_len=int(spec.get("tail_len", 500)),
                dim=int(spec.get("dim", 16)),
                stddev=stddev,
                separation=separation,
            )
            trial_refs = make_reference_summaries(
                features, labels, n_users, seed=trial_seed + 1_000_003
            )
            trial_gamma = gamma if gamma is not None else skew_gamma(stddev, separation)
        else:
            trial_refs = references
            trial_gamma = 70.0 if gamma is None else gamma

        for beta in betas:
            if synthetic is not None:
                summary = run_summarize(
                    algo,
                    frames=frames_from_matrix(features),
                    k=k,
                    beta=float(beta),
                    projection_dim=projection_dim,
                    noise_rate=noise_rate,
                    seed=trial_seed,
                    norm_factor_scale=norm_factor_scale,
                )
                vectors = features[summary["exemplar_indices"]]
                report = score_summary(vectors, trial_refs, trial_gamma)
            else:
                summary = run_summarize(
                    algo,
                    input_path=features_path,
                    fmt=fmt,
                    skip_header=skip_header,
                    k=k,
                    beta=float(beta),
                    projection_dim=projection_dim,
                    noise_rate=noise_rate,
                    seed=trial_seed,
                    norm_factor_scale=norm_factor_scale,
                )
                report = run_evaluate(
                    summary, trial_refs, trial_gamma, features_path, fmt, skip_header
                )
            per_beta[float(beta)].append(report["mean_score"])

    rows = []
    for beta in betas:
        scores = per_beta[float(beta)]
        rows.append(
            {
                "beta": float(beta),
                "mean_score": float(np.mean(scores)),
                "std_score": float(np.std(scores)),
                "trials": int(trials),
            }
        )
    return rows


def coverage_of_summary(summary: dict, labels) -> float:
    """Cluster coverage of a summarize run against ground-truth labels."""
    return cluster_coverage(summary["exemplar_indices"], labels)
