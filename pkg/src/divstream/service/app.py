"""FastAPI application around the sampling runners.

One process serves one filesystem: path-taking endpoints (summarize,
evaluate, sweep in file mode) read the paths server-side. Streaming
clients that cannot share a filesystem use ingest sessions instead and
push raw frame chunks.

Domain errors map to HTTP 400 with ``{"detail": {"kind": "config"|"io",
"message": ...}}`` so thin clients can translate them to exit codes
without parsing prose.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse

from .. import __version__, runner
from ..batch import BatchConfig, batch_kmedoids, batch_precis
from ..errors import ConfigError, DivstreamError, TruncatedPayload, error_kind
from ..model import (
    ALGO_KMEDOIDS,
    ALGO_PRECIS,
    ALL_ALGOS,
    ONLINE_ALGOS,
    FeatureVector,
    SamplerConfig,
)
from ..sampler import make_sampler
from . import schemas


@dataclass
class _Session:
    session_id: str
    algo: str
    dim: int
    params: dict[str, Any]
    sampler: Any = None
    buffered: list[np.ndarray] = field(default_factory=list)
    frames_seen: int = 0
    cpu_seconds: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


def _not_found(session_id: str) -> HTTPException:
    return HTTPException(
        status_code=404,
        detail={"kind": "config", "message": f"unknown session {session_id!r}"},
    )


def create_app() -> FastAPI:
    app = FastAPI(title="divstream", version=__version__)
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(DivstreamError)
    async def _domain_error(_: Request, exc: DivstreamError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"kind": error_kind(exc), "message": str(exc)}},
        )

    @app.exception_handler(OSError)
    async def _os_error(_: Request, exc: OSError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"kind": "io", "message": str(exc)}},
        )

    @app.get("/healthz", response_model=schemas.HealthResponse)
    async def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/summarize", response_model=schemas.SummaryResponse)
    async def summarize(req: schemas.SummarizeRequest):
        return runner.run_summarize(
            req.algo,
            input_path=req.input_path,
            frame_count=req.frame_count,
            fmt=req.format,
            skip_header=req.skip_header,
            k=req.k,
            beta=req.beta,
            projection_dim=req.projection_dim,
            noise_rate=req.noise_rate,
            seed=req.seed,
            norm_factor_scale=req.norm_factor_scale,
            cost_form=req.cost_form,
            max_iters=req.max_iters,
            diversity=req.diversity,
            gamma=req.gamma,
        )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    async def evaluate(req: schemas.EvaluateRequest):
        refs = runner.load_reference_docs(
            [r.model_dump() for r in req.references],
            req.features_path,
            req.format,
            req.skip_header,
        )
        return runner.run_evaluate(
            req.summary.model_dump(),
            refs,
            req.gamma,
            req.features_path,
            req.format,
            req.skip_header,
        )

    @app.post("/bench", response_model=schemas.BenchResponse)
    async def bench(req: schemas.BenchRequest):
        rows = runner.run_bench(
            req.n_values,
            req.k,
            req.dim,
            req.seed,
            req.algos,
            repeats=req.repeats,
            beta=req.beta,
            projection_dim=req.projection_dim,
            noise_rate=req.noise_rate,
        )
        return {"rows": rows}

    @app.post("/sweep-beta", response_model=schemas.SweepBetaResponse)
    async def sweep_beta(req: schemas.SweepBetaRequest):
        refs = None
        if req.references is not None:
            refs = runner.load_reference_docs(
                [r.model_dump() for r in req.references],
                req.features_path,
                req.format,
                req.skip_header,
            )
        rows = runner.run_sweep_beta(
            req.betas,
            req.trials,
            algo=req.algo,
            k=req.k,
            seed=req.seed,
            projection_dim=req.projection_dim,
            noise_rate=req.noise_rate,
            norm_factor_scale=req.norm_factor_scale,
            synthetic=req.synthetic.model_dump() if req.synthetic else None,
            features_path=req.features_path,
            references=refs,
            gamma=req.gamma,
            fmt=req.format,
            skip_header=req.skip_header,
        )
        return {"rows": rows}

    @app.post("/sessions", response_model=schemas.SessionInfo)
    async def create_session(req: schemas.SessionCreateRequest):
        if req.algo not in ALL_ALGOS:
            raise ConfigError(f"unknown algorithm {req.algo!r}, pick one of {ALL_ALGOS}")
        params = {
            "k": req.k,
            "beta": req.beta,
            "projection_dim": req.projection_dim,
            "noise_rate": req.noise_rate,
            "seed": req.seed,
            "norm_factor_scale": req.norm_factor_scale,
            "cost_form": req.cost_form,
            "max_iters": req.max_iters,
            "diversity": req.diversity,
            "gamma": req.gamma,
        }
        sess = _Session(
            session_id=uuid.uuid4().hex, algo=req.algo, dim=req.dim, params=params
        )
        if req.algo in ONLINE_ALGOS:
            cfg = SamplerConfig(
                k=req.k,
                beta=req.beta,
                projection_dim=req.projection_dim,
                noise_rate=req.noise_rate,
                seed=req.seed,
                norm_factor_scale=req.norm_factor_scale,
                cost_form=req.cost_form,
            )
            if cfg.projection_dim > req.dim:
                raise ConfigError(
                    f"projection_dim {cfg.projection_dim} exceeds stream dimension {req.dim}"
                )
            sess.sampler = make_sampler(req.algo, cfg)
        elif req.algo in (ALGO_KMEDOIDS, ALGO_PRECIS):
            # construct eagerly so bad parameters fail at create time
            BatchConfig(
                k=req.k,
                beta=req.beta,
                max_iters=req.max_iters,
                projection_dim=req.projection_dim,
                seed=req.seed,
                norm_factor_scale=req.norm_factor_scale,
                diversity=req.diversity,
            )
        with registry_lock:
            sessions[sess.session_id] = sess
        return {
            "session_id": sess.session_id,
            "algo": sess.algo,
            "dim": sess.dim,
            "frames_seen": 0,
        }

    @app.post("/sessions/{session_id}/frames", response_model=schemas.SessionInfo)
    async def push_frames(session_id: str, request: Request):
        sess = sessions.get(session_id)
        if sess is None:
            raise _not_found(session_id)
        body = await request.body()
        row_bytes = 4 * sess.dim
        if len(body) % row_bytes:
            raise TruncatedPayload(
                f"chunk of {len(body)} bytes is not a whole number of "
                f"{sess.dim}-wide float32 rows"
            )
        rows = np.frombuffer(body, dtype="<f4").reshape(-1, sess.dim)
        with sess.lock:
            start = time.perf_counter()
            if sess.sampler is not None:
                for row in rows:
                    sess.sampler.observe(
                        FeatureVector(index=sess.frames_seen, values=row)
                    )
                    sess.frames_seen += 1
            elif sess.algo in (ALGO_KMEDOIDS, ALGO_PRECIS):
                sess.buffered.append(rows.copy())
                sess.frames_seen += rows.shape[0]
            else:
                # index-only algorithms need the count, not the vectors
                sess.frames_seen += rows.shape[0]
            sess.cpu_seconds += time.perf_counter() - start
        return {
            "session_id": sess.session_id,
            "algo": sess.algo,
            "dim": sess.dim,
            "frames_seen": sess.frames_seen,
        }

    @app.post("/sessions/{session_id}/finalize", response_model=schemas.SummaryResponse)
    async def finalize_session(session_id: str):
        sess = sessions.get(session_id)
        if sess is None:
            raise _not_found(session_id)
        with sess.lock:
            start = time.perf_counter()
            p = sess.params
            config = runner.config_echo(
                sess.algo,
                k=p["k"],
                beta=p["beta"],
                projection_dim=p["projection_dim"],
                noise_rate=p["noise_rate"],
                seed=p["seed"],
                norm_factor_scale=p["norm_factor_scale"],
                cost_form=p["cost_form"],
                max_iters=p["max_iters"],
                diversity=p["diversity"],
                gamma=p["gamma"],
            )
            if sess.sampler is not None:
                result = sess.sampler.finalize()
                sess.cpu_seconds += time.perf_counter() - start
                summary = runner.build_summary(
                    sess.algo,
                    config,
                    result.exemplar_indices,
                    result.diversity_trace,
                    result.frames_seen,
                    sess.cpu_seconds * 1e3,
                    result.peak_stored_vectors,
                )
            elif sess.algo in (ALGO_KMEDOIDS, ALGO_PRECIS):
                if sess.buffered:
                    matrix = np.vstack(sess.buffered).astype(np.float64)
                else:
                    matrix = np.empty((0, sess.dim), dtype=np.float64)
                cfg = BatchConfig(
                    k=p["k"],
                    beta=p["beta"],
                    max_iters=p["max_iters"],
                    projection_dim=p["projection_dim"],
                    seed=p["seed"],
                    norm_factor_scale=p["norm_factor_scale"],
                    diversity=p["diversity"],
                )
                if sess.algo == ALGO_KMEDOIDS:
                    indices = batch_kmedoids(matrix, cfg)
                else:
                    indices = batch_precis(matrix, cfg)
                sess.cpu_seconds += time.perf_counter() - start
                summary = runner.build_summary(
                    sess.algo,
                    config,
                    indices,
                    [],
                    sess.frames_seen,
                    sess.cpu_seconds * 1e3,
                    sess.frames_seen,
                )
            else:
                summary = runner.run_summarize(
                    sess.algo,
                    frame_count=sess.frames_seen,
                    k=p["k"],
                    seed=p["seed"],
                    gamma=p["gamma"],
                )
        with registry_lock:
            sessions.pop(session_id, None)
        return summary

    @app.delete("/sessions/{session_id}", status_code=204)
    async def delete_session(session_id: str):
        with registry_lock:
            sessions.pop(session_id, None)
        return Response(status_code=204)

    return app
