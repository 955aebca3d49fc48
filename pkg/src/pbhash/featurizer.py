"""One-hot expansion of chunked sketches for linear models.

Hash ``j`` chunk ``i`` owns a block of ``2**b_i`` columns. Blocks are laid
out hash-major, chunk-minor: all chunks of hash 0, then all chunks of hash
1, and so on. Inside a block the value ``v`` switches on slot
``2**b_i - 1 - v``, i.e. the block lists values from largest to smallest.
With that layout the hashes ``{3, 1, 2}`` at 2 bits encode as
``[1,0,0,0, 0,0,1,0, 0,1,0,0]``.

In memory indices are 0-based; the text output is 1-based.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from .core import ChunkedSketch, PartitionScheme, SparseBinaryVector
from .errors import ConfigurationError, InputFormatError, ResourceLimitError

_MAX_DIMS = 1 << 63


def one_hot_dims(scheme: PartitionScheme, k: int) -> int:
    """Total feature dimension: ``k * sum(2**b_i)``."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    dims = k * sum(1 << b for b in scheme.chunk_widths)
    if dims > _MAX_DIMS:
        raise ResourceLimitError(f"{dims} features exceed 2**63")
    return dims


def block_offsets(scheme: PartitionScheme, k: int) -> list[list[int]]:
    """``offsets[j][i]`` is the first column of the block for hash j, chunk i."""
    sizes = [1 << b for b in scheme.chunk_widths]
    stride = sum(sizes)
    out = []
    for j in range(k):
        base, row = j * stride, []
        for size in sizes:
            row.append(base)
            base += size
        out.append(row)
    return out


def featurize(sketch: ChunkedSketch) -> SparseBinaryVector:
    """Exactly ``k * m`` active columns, one per (hash, chunk) block."""
    scheme = sketch.scheme
    dims = one_hot_dims(scheme, max(sketch.k, 1))
    offsets = block_offsets(scheme, sketch.k)
    active = []
    for row, base_row in zip(sketch.chunks, offsets):
        for value, base, b in zip(row, base_row, scheme.chunk_widths):
            active.append(base + (1 << b) - 1 - value)
    return SparseBinaryVector(dims, tuple(active))


def format_example(label, features: SparseBinaryVector) -> str:
    body = " ".join(f"{p + 1}:1" for p in features.positions)
    return f"{_format_label(label)} {body}" if body else _format_label(label)


def _format_label(label) -> str:
    if isinstance(label, bool):
        return "+1" if label else "-1"
    if isinstance(label, int):
        return f"+{label}" if label > 0 else str(label)
    return str(label)


def emit_dataset(examples: Iterable[tuple[object, ChunkedSketch]], path: str | Path) -> int:
    """Write ``label idx:1 idx:1 ...`` lines; returns the number of examples written.

    All sketches must share one scheme and one ``k``.
    """
    examples = list(examples)
    if examples:
        scheme, k = examples[0][1].scheme, examples[0][1].k
        for n, (_, s) in enumerate(examples):
            if s.scheme != scheme or s.k != k:
                raise InputFormatError(
                    f"example {n} has scheme {s.scheme} with k={s.k}; expected {scheme} with k={k}"
                )
    with open(path, "w") as fh:
        for label, sketch in examples:
            fh.write(format_example(label, featurize(sketch)) + "\n")
    return len(examples)


def read_labels(path: str | Path) -> list[str]:
    with open(path) as fh:
        return [line.strip() for line in fh if line.strip()]


def pair_labels(labels: Sequence[str] | None, n: int) -> list[str]:
    if labels is None:
        return ["0"] * n
    if len(labels) != n:
        raise InputFormatError(f"{len(labels)} labels for {n} sketches")
    return list(labels)
