"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..features_io import FORMAT_AUTO
from ..model import ALGO_ONLINE_DIVERSE, COST_FORM_ALGORITHM


class SummarizeRequest(BaseModel):
    algo: str
    input_path: str | None = None
    frame_count: int | None = Field(default=None, ge=0)
    format: str = FORMAT_AUTO
    skip_header: bool = False
    k: int = Field(ge=1)
    beta: float = 0.5
    projection_dim: int = 3
    noise_rate: float = 0.05
    seed: int = 0
    norm_factor_scale: float = 10.0
    cost_form: str = COST_FORM_ALGORITHM
    max_iters: int = 100
    diversity: str = "hull"
    gamma: float | None = None


class SummaryResponse(BaseModel):
    algo: str
    config: dict[str, Any]
    exemplar_indices: list[int]
    diversity_trace: list[tuple[int, float]]
    frames_seen: int
    wall_time_ms: float
    peak_stored_vectors: int


class ReferenceDoc(BaseModel):
    user_id: str
    frame_indices: list[int]
    features: list[list[float]] | None = None


class SummaryDoc(BaseModel):
    """The part of a stored summary that evaluation needs."""

    algo: str = "unknown"
    exemplar_indices: list[int]


class EvaluateRequest(BaseModel):
    summary: SummaryDoc
    references: list[ReferenceDoc]
    gamma: float
    features_path: str
    format: str = FORMAT_AUTO
    skip_header: bool = False


class UserScore(BaseModel):
    user_id: str
    score: float
    matched: int
    reference_length: int


class EvaluateResponse(BaseModel):
    algo: str
    gamma: float
    k: int
    retained_after_dedup: int
    users: list[UserScore]
    mean_score: float


class BenchRequest(BaseModel):
    n_values: list[int]
    k: int = Field(default=20, ge=1)
    dim: int = Field(default=16, ge=1)
    seed: int = 0
    algos: list[str] = [ALGO_ONLINE_DIVERSE]
    repeats: int = 3
    beta: float = 0.5
    projection_dim: int = 3
    noise_rate: float = 0.05


class BenchRow(BaseModel):
    algo: str
    n: int
    wall_time_ms: float
    frames_per_sec: float
    peak_stored_vectors: int
    repeats: int


class BenchResponse(BaseModel):
    rows: list[BenchRow]


class SyntheticSpec(BaseModel):
    """Knobs for the built-in skewed-cluster benchmark."""

    clusters: int = 5
    frames_per_cluster: int = 300
    tail_len: int = 500
    dim: int = 16
    stddev: float = 1.0
    separation: float = 50.0
    users: int = 5


class SweepBetaRequest(BaseModel):
    betas: list[float]
    trials: int = Field(default=1, ge=1)
    algo: str = ALGO_ONLINE_DIVERSE
    k: int = Field(default=10, ge=1)
    seed: int = 0
    projection_dim: int = 3
    noise_rate: float = 0.05
    norm_factor_scale: float = 10.0
    synthetic: SyntheticSpec | None = None
    features_path: str | None = None
    references: list[ReferenceDoc] | None = None
    gamma: float | None = None
    format: str = FORMAT_AUTO
    skip_header: bool = False


class SweepRow(BaseModel):
    beta: float
    mean_score: float
    std_score: float
    trials: int


class SweepBetaResponse(BaseModel):
    rows: list[SweepRow]


class SessionCreateRequest(BaseModel):
    """Open a streaming ingest session.

    ``dim`` fixes the vector width so frame chunks can arrive as raw
    little-endian float32 bytes with no per-chunk framing.
    """

    algo: str
    dim: int = Field(ge=1)
    k: int = Field(ge=1)
    beta: float = 0.5
    projection_dim: int = 3
    noise_rate: float = 0.05
    seed: int = 0
    norm_factor_scale: float = 10.0
    cost_form: str = COST_FORM_ALGORITHM
    max_iters: int = 100
    diversity: str = "hull"
    gamma: float | None = None


class SessionInfo(BaseModel):
    session_id: str
    algo: str
    dim: int
    frames_seen: int


class HealthResponse(BaseModel):
    status: str
    version: str
