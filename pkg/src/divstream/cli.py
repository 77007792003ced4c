"""Command-line client for the sampling service.

Every subcommand talks HTTP to the service layer. By default the app
is mounted in-process so no server needs to be running; ``--server``
points the same client at a remote instance instead. Path arguments
are resolved by the server process, so remote use assumes a shared
filesystem; piped input (``--input -``) streams frame chunks through
an ingest session and works either way.

Exit codes: 0 success, 2 usage or configuration errors, 3 IO and
format errors.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import sys
from contextlib import asynccontextmanager
from itertools import chain

import httpx
import numpy as np

from . import __version__, features_io
from .errors import (
    ConfigError,
    DivstreamError,
    InsufficientFrames,
    TooFewPoints,
    error_kind,
)
from .model import (
    ALGO_KMEDOIDS,
    ALGO_ONLINE_DIVERSE,
    ALGO_PRECIS,
    ALGO_RANDOM,
    ALGO_UNIFORM,
    ALL_ALGOS,
    BATCH_ALGOS,
    COST_FORM_ALGORITHM,
    COST_FORM_SQUARED,
    ONLINE_ALGOS,
)

_CHUNK_FRAMES = 1024

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class CliError(Exception):
    """Terminal failure with a chosen exit code."""

    def __init__(self, exit_code: int, message: str):
        self.exit_code = exit_code
        super().__init__(message)


def _check(resp: httpx.Response) -> dict:
    """Decode a service response or raise CliError with the right code."""
    if resp.status_code < 400:
        return resp.json()
    kind = "io"
    message = resp.text
    try:
        detail = resp.json().get("detail")
        if isinstance(detail, dict):
            kind = detail.get("kind", "io")
            message = detail.get("message", message)
        elif detail is not None:
            # pydantic validation payload: a list of field errors
            kind = "config"
            message = json.dumps(detail)
    except ValueError:
        pass
    if resp.status_code == 422:
        kind = "config"
    raise CliError(EXIT_CONFIG if kind == "config" else EXIT_IO, message)


@asynccontextmanager
async def _client(server: str | None):
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=None) as client:
            yield client
        return
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://divstream.internal", timeout=None
    ) as client:
        yield client


def _write_output(target: str, text: str) -> None:
    if target == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _dump_json(doc: dict) -> str:
    # canonical ordering so identical runs diff cleanly
    return json.dumps(doc, sort_keys=True, indent=2)


def _rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return out.getvalue()


async def _summarize_via_session(client: httpx.AsyncClient, args, payload: dict) -> dict:
    """Stream stdin through an ingest session, chunk by chunk."""
    stream = features_io.read_features(
        sys.stdin.buffer, args.format, skip_header=args.skip_header
    )
    it = iter(stream)
    try:
        first = next(it)
    except StopIteration:
        if args.algo in BATCH_ALGOS:
            raise TooFewPoints(f"need at least {args.k} frames, stream held 0")
        raise InsufficientFrames(f"need at least {args.k} frames, stream held 0")

    created = _check(
        await client.post("/sessions", json={**payload, "dim": first.dim})
    )
    sid = created["session_id"]
    try:
        pending: list[np.ndarray] = []

        async def flush() -> None:
            if not pending:
                return
            body = np.vstack(pending).astype("<f4").tobytes()
            pending.clear()
            _check(await client.post(f"/sessions/{sid}/frames", content=body))

        for frame in chain([first], it):
            pending.append(frame.values)
            if len(pending) >= _CHUNK_FRAMES:
                await flush()
        await flush()
        return _check(await client.post(f"/sessions/{sid}/finalize"))
    finally:
        # finalize removes the session; delete is a no-op then
        await client.delete(f"/sessions/{sid}")


async def cmd_summarize(args) -> int:
    payload = {
        "algo": args.algo,
        "k": args.k,
        "beta": args.beta,
        "projection_dim": args.proj_dim,
        "noise_rate": args.noise,
        "seed": args.seed,
        "norm_factor_scale": args.norm_scale,
        "cost_form": args.cost_form,
        "max_iters": args.max_iters,
        "diversity": args.diversity,
        "gamma": args.gamma,
    }
    async with _client(args.server) as client:
        if args.input == "-":
            if args.algo in (ALGO_RANDOM, ALGO_UNIFORM):
                # index-only algos need N up front; a pipe only provides
                # it through a binary header with a nonzero count
                if args.format == features_io.FORMAT_CSV:
                    raise ConfigError(
                        f"{args.algo} needs a frame count, which csv piped "
                        "input cannot declare; use a file or the binary format"
                    )
                count, _ = features_io.read_header(sys.stdin.buffer)
                if count == 0:
                    raise ConfigError(
                        f"{args.algo} needs a frame count, but the stream "
                        "header declares count=0 (unknown length)"
                    )
                summary = _check(
                    await client.post(
                        "/summarize", json={**payload, "frame_count": count}
                    )
                )
            else:
                summary = await _summarize_via_session(client, args, payload)
        else:
            summary = _check(
                await client.post(
                    "/summarize",
                    json={
                        **payload,
                        "input_path": args.input,
                        "format": args.format,
                        "skip_header": args.skip_header,
                    },
                )
            )
    _write_output(args.output, _dump_json(summary))
    return EXIT_OK


def _load_json_doc(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_reference_files(paths: list[str]) -> list[dict]:
    docs: list[dict] = []
    for path in paths:
        doc = _load_json_doc(path)
        if isinstance(doc, list):
            docs.extend(doc)
        else:
            docs.append(doc)
    return docs


async def cmd_evaluate(args) -> int:
    summary = _load_json_doc(args.summary)
    if not isinstance(summary, dict) or "exemplar_indices" not in summary:
        raise ConfigError(f"{args.summary} is not a summary document")
    references = _load_reference_files(args.references)
    payload = {
        "summary": {
            "algo": summary.get("algo", "unknown"),
            "exemplar_indices": summary["exemplar_indices"],
        },
        "references": references,
        "gamma": args.gamma,
        "features_path": args.features,
        "format": args.format,
        "skip_header": args.skip_header,
    }
    async with _client(args.server) as client:
        report = _check(await client.post("/evaluate", json=payload))
    if args.csv:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["user_id", "score", "matched", "reference_length"])
        for user in report["users"]:
            writer.writerow(
                [user["user_id"], user["score"], user["matched"], user["reference_length"]]
            )
        writer.writerow(["mean", report["mean_score"], "", ""])
        _write_output(args.output, out.getvalue())
    else:
        _write_output(args.output, _dump_json(report))
    return EXIT_OK


async def cmd_bench(args) -> int:
    payload = {
        "n_values": args.n,
        "k": args.k,
        "dim": args.dim,
        "seed": args.seed,
        "algos": args.algo or [ALGO_ONLINE_DIVERSE],
        "repeats": args.repeats,
        "beta": args.beta,
        "projection_dim": args.proj_dim,
        "noise_rate": args.noise,
    }
    async with _client(args.server) as client:
        result = _check(await client.post("/bench", json=payload))
    text = _rows_to_csv(
        result["rows"],
        ["algo", "n", "wall_time_ms", "frames_per_sec", "peak_stored_vectors", "repeats"],
    )
    _write_output(args.output, text)
    return EXIT_OK


async def cmd_sweep_beta(args) -> int:
    payload = {
        "betas": args.beta,
        "trials": args.trials,
        "algo": args.algo,
        "k": args.k,
        "seed": args.seed,
        "projection_dim": args.proj_dim,
        "noise_rate": args.noise,
        "norm_factor_scale": args.norm_scale,
        "gamma": args.gamma,
        "format": args.format,
        "skip_header": args.skip_header,
    }
    if args.features is not None:
        if not args.references:
            raise ConfigError("--features mode needs --references")
        payload["features_path"] = args.features
        payload["references"] = _load_reference_files(args.references)
    else:
        payload["synthetic"] = {
            "clusters": args.clusters,
            "frames_per_cluster": args.frames_per_cluster,
            "tail_len": args.tail_len,
            "dim": args.dim,
            "stddev": args.stddev,
            "separation": args.separation,
            "users": args.users,
        }
    async with _client(args.server) as client:
        result = _check(await client.post("/sweep-beta", json=payload))
    text = _rows_to_csv(result["rows"], ["beta", "mean_score", "std_score", "trials"])
    _write_output(args.output, text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    parser.add_argument("--output", "-o", default="-", help="output path, - for stdout")


def _add_stream_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=[features_io.FORMAT_AUTO, features_io.FORMAT_BINARY, features_io.FORMAT_CSV],
        default=features_io.FORMAT_AUTO,
        help="input format (auto sniffs the magic bytes, then the extension)",
    )
    parser.add_argument(
        "--skip-header", action="store_true", help="skip one CSV header line"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divstream",
        description="Select diverse exemplars from feature-vector streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summarize", help="select exemplars from a stream")
    p.add_argument("--algo", required=True, choices=sorted(ALL_ALGOS))
    p.add_argument("--input", "-i", required=True, help="feature file, - for stdin")
    p.add_argument("--k", type=int, required=True, help="number of exemplar slots")
    p.add_argument("--beta", type=float, default=0.5, help="distance/diversity trade-off in [0,1]")
    p.add_argument("--proj-dim", type=int, default=3, help="hull projection dimension (2 or 3)")
    p.add_argument("--noise", type=float, default=0.05, help="random replacement rate in [0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=None, help="recorded for later evaluation")
    p.add_argument("--norm-scale", type=float, default=10.0, help="per-frame diversity weight scale")
    p.add_argument(
        "--cost-form",
        choices=[COST_FORM_ALGORITHM, COST_FORM_SQUARED],
        default=COST_FORM_ALGORITHM,
        help="winner cost variant",
    )
    p.add_argument("--max-iters", type=int, default=100, help="batch swap passes")
    p.add_argument("--diversity", choices=["hull", "variance"], default="hull",
                   help="batch diversity term")
    _add_stream_flags(p)
    _add_common(p)
    p.set_defaults(handler=cmd_summarize, sync=False)

    p = sub.add_parser("evaluate", help="score a summary against reference summaries")
    p.add_argument("--summary", required=True, help="summary JSON from summarize, - for stdin")
    p.add_argument("--features", required=True, help="feature file the summary indexes into")
    p.add_argument("--references", required=True, nargs="+",
                   help="reference JSON files (single object or list per file)")
    p.add_argument("--gamma", type=float, required=True, help="match radius")
    p.add_argument("--csv", action="store_true", help="emit per-user CSV rows instead of JSON")
    _add_stream_flags(p)
    _add_common(p)
    p.set_defaults(handler=cmd_evaluate, sync=False)

    p = sub.add_parser("bench", help="time algorithms on synthetic streams")
    p.add_argument("--n", type=int, action="append", required=True,
                   help="stream length, repeatable")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algo", action="append", choices=sorted(ALL_ALGOS),
                   help="repeatable, default online-diverse")
    p.add_argument("--repeats", type=int, default=3, help="timed runs per point, median kept")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--proj-dim", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(handler=cmd_bench, sync=False)

    p = sub.add_parser("sweep-beta", help="mean summary score per beta")
    p.add_argument("--beta", type=float, action="append", required=True,
                   help="beta value, repeatable")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--algo", default=ALGO_ONLINE_DIVERSE,
                   choices=sorted(ONLINE_ALGOS + (ALGO_PRECIS, ALGO_KMEDOIDS)))
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--proj-dim", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--norm-scale", type=float, default=10.0)
    p.add_argument("--gamma", type=float, default=None,
                   help="match radius (synthetic mode derives one when omitted)")
    p.add_argument("--features", default=None, help="feature file (file mode)")
    p.add_argument("--references", nargs="+", default=None, help="reference JSON files (file mode)")
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--frames-per-cluster", type=int, default=300)
    p.add_argument("--tail-len", type=int, default=500)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--stddev", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=50.0)
    p.add_argument("--users", type=int, default=5)
    _add_stream_flags(p)
    _add_common(p)
    p.set_defaults(handler=cmd_sweep_beta, sync=False)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve, sync=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.sync:
            return args.handler(args)
        return asyncio.run(args.handler(args))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except DivstreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if error_kind(exc) == "config" else EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
