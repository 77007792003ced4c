"""Reading and writing feature-vector streams.

Binary layout (magic ``FSTRM1``): 6 ASCII magic bytes, a little-endian
u64 vector count (0 means streaming/unknown), a little-endian u32
dimension, then row-major float32 values. CSV is the plain-text
alternative: one comma-separated row per frame, no header unless the
caller says to skip one.

``read_features`` yields frames lazily, so online consumers never hold
more than a bounded read-ahead buffer no matter how long the stream is.
"""

from __future__ import annotations

import csv
import io
import os
import struct
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .errors import BadMagic, CsvParse, DimensionMismatch, TruncatedPayload
from .model import FeatureVector

MAGIC = b"FSTRM1"
_HEADER = struct.Struct("<QI")
HEADER_SIZE = len(MAGIC) + _HEADER.size

FORMAT_BINARY = "binary"
FORMAT_CSV = "csv"
FORMAT_AUTO = "auto"
FORMATS = (FORMAT_AUTO, FORMAT_BINARY, FORMAT_CSV)

# frames per read-ahead block; bounds reader memory independent of N
_BLOCK_ROWS = 1024


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    chunks = []
    got = 0
    while got < size:
        piece = stream.read(size - got)
        if not piece:
            break
        chunks.append(piece)
        got += len(piece)
    return b"".join(chunks)


def write_features(target, vectors, count: int | None = None) -> None:
    """Write vectors as a binary feature stream.

    Args:
        target: path or binary file object.
        vectors: (N, D) array-like, cast to float32 rows.
        count: header count; defaults to N, pass 0 to mark the stream
            as unknown-length.
    """
    pts = np.ascontiguousarray(np.asarray(vectors, dtype=np.float32))
    if pts.ndim != 2 or pts.shape[1] == 0:
        raise DimensionMismatch(f"expected a (N, D) matrix, got shape {pts.shape}")
    header_count = pts.shape[0] if count is None else count
    own = isinstance(target, (str, os.PathLike))
    stream = open(target, "wb") if own else target
    try:
        stream.write(MAGIC)
        stream.write(_HEADER.pack(header_count, pts.shape[1]))
        stream.write(pts.astype("<f4", copy=False).tobytes())
    finally:
        if own:
            stream.close()


def write_features_csv(target, vectors) -> None:
    """Write vectors as headerless CSV rows."""
    pts = np.asarray(vectors, dtype=np.float64)
    own = isinstance(target, (str, os.PathLike))
    stream = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(stream)
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if own:
            stream.close()


def read_header(stream: BinaryIO) -> tuple[int, int]:
    """Consume and validate a binary stream header.

    Returns:
        (count, dim) from the header; count 0 means unknown length.

    Raises:
        BadMagic: wrong magic bytes, short header, or dimension 0.
    """
    head = _read_exact(stream, HEADER_SIZE)
    if len(head) < HEADER_SIZE or head[: len(MAGIC)] != MAGIC:
        raise BadMagic("not a feature stream: bad or short magic header")
    count, dim = _HEADER.unpack(head[len(MAGIC) :])
    if dim == 0:
        raise BadMagic("feature stream declares dimension 0")
    return int(count), int(dim)


def _iter_binary(stream: BinaryIO) -> Iterator[FeatureVector]:
    count, dim = read_header(stream)
    row_bytes = 4 * dim
    index = 0
    while True:
        if count and index >= count:
            if stream.read(1):
                raise TruncatedPayload(
                    f"payload continues past the declared count of {count}"
                )
            return
        want = _BLOCK_ROWS if not count else min(_BLOCK_ROWS, count - index)
        blob = _read_exact(stream, want * row_bytes)
        if not blob and not count:
            return
        if len(blob) % row_bytes:
            raise TruncatedPayload(
                f"stream ended mid-vector after frame {index + len(blob) // row_bytes}"
            )
        if count and len(blob) < want * row_bytes:
            raise TruncatedPayload(
                f"stream declares {count} vectors but ended at "
                f"{index + len(blob) // row_bytes}"
            )
        rows = np.frombuffer(blob, dtype="<f4").reshape(-1, dim)
        for row in rows:
            yield FeatureVector(index=index, values=row)
            index += 1
        if len(blob) < want * row_bytes:
            return


def _iter_csv(stream, skip_header: bool) -> Iterator[FeatureVector]:
    text = io.TextIOWrapper(stream, encoding="utf-8") if isinstance(stream.read(0), bytes) else stream
    reader = csv.reader(text)
    if skip_header:
        next(reader, None)
    index = 0
    dim = None
    for cells in reader:
        if not cells:
            continue
        if dim is None:
            dim = len(cells)
        elif len(cells) != dim:
            raise DimensionMismatch(
                f"row {index}: got {len(cells)} columns, stream is {dim}"
            )
        values = np.empty(dim, dtype=np.float64)
        for col, cell in enumerate(cells):
            try:
                values[col] = float(cell)
            except ValueError:
                raise CsvParse(index, col, f"not a number: {cell!r}") from None
        yield FeatureVector(index=index, values=values)
        index += 1


def detect_format(path) -> str:
    """Binary or CSV, by magic bytes with an extension fallback."""
    try:
        with open(path, "rb") as stream:
            head = stream.read(len(MAGIC))
        if head == MAGIC:
            return FORMAT_BINARY
    except OSError:
        pass
    return FORMAT_CSV if str(path).lower().endswith(".csv") else FORMAT_BINARY


def read_features(
    source,
    fmt: str = FORMAT_AUTO,
    skip_header: bool = False,
) -> Iterator[FeatureVector]:
    """Lazily yield frames from a path or readable stream.

    Args:
        source: path, or an open binary stream (e.g. sys.stdin.buffer).
        fmt: "binary", "csv", or "auto"; auto sniffs paths by magic and
            treats non-seekable streams as binary.
        skip_header: drop the first CSV line.

    Yields:
        FeatureVector with a gapless 0-based index.

    Raises:
        BadMagic, TruncatedPayload, CsvParse, DimensionMismatch.
    """
    if fmt not in FORMATS:
        raise BadMagic(f"unknown format {fmt!r}")
    own = isinstance(source, (str, os.PathLike))
    if own:
        if fmt == FORMAT_AUTO:
            fmt = detect_format(source)
        stream = open(source, "rb")
    else:
        stream = source
        if fmt == FORMAT_AUTO:
            fmt = FORMAT_BINARY
    try:
        if fmt == FORMAT_BINARY:
            yield from _iter_binary(stream)
        else:
            yield from _iter_csv(stream, skip_header)
    finally:
        if own:
            stream.close()


def peek_count(source, fmt: str = FORMAT_AUTO, skip_header: bool = False) -> int | None:
    """Frame count without materializing vectors, when knowable.

    Binary headers with count > 0 answer directly; a count of 0 on a
    real file is resolved from the file size; CSV files are counted with
    a cheap scan. Returns None for unknowable sources (streams with a
    zero count header).
    """
    if isinstance(source, (str, os.PathLike)):
        if fmt == FORMAT_AUTO:
            fmt = detect_format(source)
        if fmt == FORMAT_CSV:
            n = 0
            with open(source, newline="") as stream:
                reader = csv.reader(stream)
                if skip_header:
                    next(reader, None)
                for cells in reader:
                    if cells:
                        n += 1
            return n
        with open(source, "rb") as stream:
            count, dim = read_header(stream)
        payload = os.stat(source).st_size - HEADER_SIZE
        if payload % (4 * dim):
            raise TruncatedPayload("payload length is not a whole number of vectors")
        rows = payload // (4 * dim)
        if count and rows != count:
            raise TruncatedPayload(
                f"header declares {count} vectors but payload holds {rows}"
            )
        return rows
    # non-path sources only help when a binary header declares a count,
    # and reading it here would consume it; callers stream instead
    return None


def collect(frames: Iterable[FeatureVector]) -> np.ndarray:
    """Materialize a frame iterator into an (N, D) float64 matrix."""
    rows = [frame.values for frame in frames]
    if not rows:
        return np.zeros((0, 0))
    return np.vstack(rows)
