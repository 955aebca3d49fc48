"""Plain-text file formats shared by the CLI and the simulator.

Vectors, one per line::

    D<TAB>idx:weight idx:weight ...

Indices are 0-based and strictly increasing; binary vectors use weight 1.

Sketches, one per line, optionally preceded by ``#`` comment lines; a
``# scheme_id=<id>`` comment records the provenance of the lines below::

    B<TAB>v_1 v_2 ... v_k

Chunked sketches, one per line; each hash is a comma-separated group of
chunks, least-significant chunk first::

    b_1,...,b_m<TAB>c_11,...,c_1m c_21,...,c_2m ...
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, TextIO

from .core import ChunkedSketch, HashSketch, PartitionScheme, SparseBinaryVector, SparseWeightedVector
from .errors import InputFormatError, PbHashError


def parse_vector_line(line: str, lineno: int = 0) -> SparseWeightedVector:
    head, _, body = line.rstrip("\r\n").partition("\t")
    try:
        D = int(head)
        entries = []
        for tok in body.split():
            idx, _, w = tok.partition(":")
            entries.append((int(idx), float(w) if w else 1.0))
        return SparseWeightedVector(D, tuple(entries))
    except (ValueError, PbHashError) as exc:
        raise InputFormatError(f"line {lineno}: {exc}") from None


def read_vectors(path) -> list[SparseWeightedVector]:
    with open(path) as fh:
        return [parse_vector_line(line, n) for n, line in enumerate(fh, 1) if line.strip()]


def read_binary_vectors(path) -> list[SparseBinaryVector]:
    """Vectors from ``path`` reduced to their supports (any positive weight counts)."""
    return [v.support() for v in read_vectors(path)]


def format_vector(v) -> str:
    if isinstance(v, SparseBinaryVector):
        body = " ".join(f"{p}:1" for p in v.positions)
    else:
        body = " ".join(f"{p}:{_fmt_weight(w)}" for p, w in v.entries)
    return f"{v.universe_size}\t{body}"


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_vectors(vectors: Iterable, path) -> None:
    with open(path, "w") as fh:
        for v in vectors:
            fh.write(format_vector(v) + "\n")


def write_sketches(sketches: Iterable[HashSketch], out: TextIO | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w") as fh:
            write_sketches(sketches, fh)
        return
    sketches = list(sketches)
    ids = {s.scheme_id for s in sketches}
    if len(ids) == 1 and sketches[0].scheme_id:
        out.write(f"# scheme_id={sketches[0].scheme_id}\n")
    for s in sketches:
        out.write(f"{s.bit_width}\t{' '.join(str(v) for v in s.values)}\n")


def read_sketches(path) -> list[HashSketch]:
    scheme_id = ""
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "scheme_id":
                    scheme_id = val.strip()
                continue
            if not line.strip():
                continue
            head, _, body = line.rstrip("\r\n").partition("\t")
            try:
                out.append(HashSketch(int(head), tuple(int(t) for t in body.split()), scheme_id))
            except (ValueError, PbHashError) as exc:
                raise InputFormatError(f"{path}:{n}: {exc}") from None
    return out


def write_chunked(sketches: Iterable[ChunkedSketch], out: TextIO) -> None:
    for s in sketches:
        groups = " ".join(",".join(str(c) for c in row) for row in s.chunks)
        out.write(f"{s.scheme}\t{groups}\n")


def read_chunked(path) -> list[ChunkedSketch]:
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            head, _, body = line.rstrip("\r\n").partition("\t")
            try:
                scheme = PartitionScheme.parse(head)
                rows = tuple(tuple(int(c) for c in g.split(",")) for g in body.split())
                out.append(ChunkedSketch(scheme, rows))
            except (ValueError, PbHashError) as exc:
                raise InputFormatError(f"{path}:{n}: {exc}") from None
    return out
