"""Domain types, exact Jaccard ground truths and bit partitioning.

Bit convention: chunk 1 of a partition holds the *least* significant
``b_1`` bits, chunk 2 the next ``b_2`` bits, and so on. Every module that
splits or reassembles hash values goes through :func:`partition_value` /
:func:`reassemble_value` (or their array forms) so the convention lives in
one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ComparabilityError,
    ConfigurationError,
    DomainError,
    UndefinedSimilarityError,
)

MAX_BITS = 64


@dataclass(frozen=True)
class SparseBinaryVector:
    """Set of non-zero positions in a universe ``[0, universe_size)``."""

    universe_size: int
    positions: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if self.universe_size < 1:
            raise ConfigurationError(f"universe size must be positive, got {self.universe_size}")
        prev = -1
        for p in self.positions:
            if p <= prev:
                raise ConfigurationError("positions must be strictly increasing")
            if p >= self.universe_size:
                raise ConfigurationError(f"position {p} outside [0, {self.universe_size})")
            prev = p

    @classmethod
    def from_iterable(cls, universe_size: int, positions: Iterable[int]) -> "SparseBinaryVector":
        """Build from any iterable of positions; duplicates are merged."""
        return cls(universe_size, tuple(sorted(set(int(p) for p in positions))))

    def __len__(self) -> int:
        return len(self.positions)

    def as_set(self) -> frozenset[int]:
        return frozenset(self.positions)


@dataclass(frozen=True)
class SparseWeightedVector:
    """Non-negative vector stored as ``(position, weight)`` pairs with weight > 0."""

    universe_size: int
    entries: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        entries = tuple((int(p), float(w)) for p, w in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.universe_size < 1:
            raise ConfigurationError(f"universe size must be positive, got {self.universe_size}")
        prev = -1
        for p, w in entries:
            if p <= prev:
                raise ConfigurationError("positions must be strictly increasing")
            if p >= self.universe_size:
                raise ConfigurationError(f"position {p} outside [0, {self.universe_size})")
            if not (w > 0 and math.isfinite(w)):
                raise ConfigurationError(f"weight at position {p} must be positive and finite, got {w}")
            prev = p

    @classmethod
    def from_dense(cls, weights: Sequence[float]) -> "SparseWeightedVector":
        """Sparse view of a dense weight list; zeros are dropped."""
        return cls(len(weights), tuple((i, w) for i, w in enumerate(weights) if w != 0))

    @classmethod
    def from_binary(cls, u: SparseBinaryVector) -> "SparseWeightedVector":
        return cls(u.universe_size, tuple((p, 1.0) for p in u.positions))

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def support(self) -> SparseBinaryVector:
        return SparseBinaryVector(self.universe_size, self.positions)


@dataclass(frozen=True)
class HashSketch:
    """``k`` hash values of ``bit_width`` bits each for one data vector.

    ``scheme_id`` records the hash family, seed and any other parameter that
    must agree for two sketches to be compared.
    """

    bit_width: int
    values: tuple[int, ...]
    scheme_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if not 1 <= self.bit_width <= MAX_BITS:
            raise ConfigurationError(f"bit width must be in [1, {MAX_BITS}], got {self.bit_width}")
        limit = 1 << self.bit_width
        for v in self.values:
            if not 0 <= v < limit:
                raise DomainError(f"hash value {v} does not fit in {self.bit_width} bits")

    @property
    def k(self) -> int:
        return len(self.values)

    def comparable_with(self, other: "HashSketch") -> bool:
        return self.bit_width == other.bit_width and self.scheme_id == other.scheme_id

    def head(self, k: int) -> "HashSketch":
        """The sketch restricted to its first ``k`` hashes."""
        return HashSketch(self.bit_width, self.values[:k], self.scheme_id)


@dataclass(frozen=True)
class PartitionScheme:
    """Chunk widths ``(b_1, ..., b_m)``; chunk 1 takes the lowest bits."""

    chunk_widths: tuple[int, ...]

    def __post_init__(self):
        widths = tuple(int(b) for b in self.chunk_widths)
        object.__setattr__(self, "chunk_widths", widths)
        if not widths:
            raise ConfigurationError("a partition needs at least one chunk")
        if any(b < 1 for b in widths):
            raise ConfigurationError(f"chunk widths must be >= 1, got {widths}")
        if sum(widths) > MAX_BITS:
            raise ConfigurationError(f"total bits {sum(widths)} exceed {MAX_BITS}")

    @classmethod
    def equal(cls, total_bits: int, m: int) -> "PartitionScheme":
        """``m`` chunks of ``total_bits / m`` bits each."""
        if m < 1 or total_bits % m:
            raise ConfigurationError(f"m={m} does not divide B={total_bits}")
        return cls((total_bits // m,) * m)

    @classmethod
    def parse(cls, text: str) -> "PartitionScheme":
        """Parse ``"4,4"`` style chunk lists."""
        try:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise ConfigurationError(f"bad scheme {text!r}: {exc}") from None

    @property
    def m(self) -> int:
        return len(self.chunk_widths)

    @property
    def total_bits(self) -> int:
        return sum(self.chunk_widths)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for b in self.chunk_widths:
            out.append(acc)
            acc += b
        return tuple(out)

    def __str__(self) -> str:
        return ",".join(str(b) for b in self.chunk_widths)


@dataclass(frozen=True)
class ChunkedSketch:
    """``k x m`` chunk values; ``chunks[j][i]`` holds ``b_i`` bits of hash ``j``."""

    scheme: PartitionScheme
    chunks: tuple[tuple[int, ...], ...]
    scheme_id: str = ""

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.chunks)
        object.__setattr__(self, "chunks", rows)
        widths = self.scheme.chunk_widths
        for row in rows:
            if len(row) != len(widths):
                raise ConfigurationError(f"expected {len(widths)} chunks per hash, got {len(row)}")
            for c, b in zip(row, widths):
                if not 0 <= c < (1 << b):
                    raise DomainError(f"chunk value {c} does not fit in {b} bits")

    @property
    def k(self) -> int:
        return len(self.chunks)

    def reassemble(self) -> HashSketch:
        values = tuple(reassemble_value(row, self.scheme) for row in self.chunks)
        return HashSketch(self.scheme.total_bits, values, self.scheme_id)


def exact_jaccard(u: SparseBinaryVector, v: SparseBinaryVector) -> float:
    """|u ∩ v| / |u ∪ v| of the two position sets."""
    return float(exact_jaccard_fraction(u, v))


def exact_jaccard_fraction(u: SparseBinaryVector, v: SparseBinaryVector) -> Fraction:
    """Exact rational form of :func:`exact_jaccard`."""
    if u.universe_size != v.universe_size:
        raise ConfigurationError(
            f"universe sizes differ: {u.universe_size} vs {v.universe_size}"
        )
    a, b = u.as_set(), v.as_set()
    union = len(a | b)
    if union == 0:
        raise UndefinedSimilarityError("Jaccard similarity of two empty vectors is undefined")
    return Fraction(len(a & b), union)


def exact_weighted_jaccard(u: SparseWeightedVector, v: SparseWeightedVector) -> float:
    """sum(min(u_i, v_i)) / sum(max(u_i, v_i)) over all coordinates."""
    if u.universe_size != v.universe_size:
        raise ConfigurationError(
            f"universe sizes differ: {u.universe_size} vs {v.universe_size}"
        )
    wu, wv = dict(u.entries), dict(v.entries)
    num = den = 0.0
    for p in sorted(wu.keys() | wv.keys()):
        x, y = wu.get(p, 0.0), wv.get(p, 0.0)
        num += min(x, y)
        den += max(x, y)
    if den <= 0:
        raise UndefinedSimilarityError("weighted Jaccard of two all-zero vectors is undefined")
    return num / den


def lowest_bits(value: int, b: int, total_bits: int = MAX_BITS) -> int:
    """``value mod 2**b``."""
    if not 1 <= b <= total_bits:
        raise ConfigurationError(f"b must be in [1, {total_bits}], got {b}")
    if not 0 <= value < (1 << total_bits):
        raise DomainError(f"value {value} does not fit in {total_bits} bits")
    return value & ((1 << b) - 1)


def partition_value(value: int, scheme: PartitionScheme) -> list[int]:
    """Split a B-bit value into chunks, least-significant chunk first."""
    if not 0 <= value < (1 << scheme.total_bits):
        raise DomainError(f"value {value} does not fit in {scheme.total_bits} bits")
    out = []
    for b in scheme.chunk_widths:
        out.append(value & ((1 << b) - 1))
        value >>= b
    return out


def reassemble_value(chunks: Sequence[int], scheme: PartitionScheme) -> int:
    """Inverse of :func:`partition_value`."""
    if len(chunks) != scheme.m:
        raise ConfigurationError(f"expected {scheme.m} chunks, got {len(chunks)}")
    value = 0
    for c, off in zip(chunks, scheme.offsets):
        value |= int(c) << off
    return value


def partition_array(values: np.ndarray, scheme: PartitionScheme) -> np.ndarray:
    """Vectorized :func:`partition_value`; appends a trailing axis of length m."""
    values = np.asarray(values, dtype=np.uint64)
    out = np.empty(values.shape + (scheme.m,), dtype=np.uint64)
    for i, (b, off) in enumerate(zip(scheme.chunk_widths, scheme.offsets)):
        out[..., i] = (values >> np.uint64(off)) & np.uint64((1 << b) - 1)
    return out


def partition_sketch(sketch: HashSketch, scheme: PartitionScheme) -> ChunkedSketch:
    """Apply :func:`partition_value` to each of the ``k`` values of ``sketch``."""
    if sketch.bit_width != scheme.total_bits:
        raise ConfigurationError(
            f"sketch has {sketch.bit_width} bits but scheme {scheme} covers {scheme.total_bits}"
        )
    return ChunkedSketch(
        scheme, tuple(tuple(partition_value(v, scheme)) for v in sketch.values), sketch.scheme_id
    )


def check_comparable(a, b) -> None:
    """Raise :class:`ComparabilityError` unless two (chunked) sketches can be compared."""
    if a.scheme_id != b.scheme_id:
        raise ComparabilityError(f"scheme ids differ: {a.scheme_id!r} vs {b.scheme_id!r}")
    if isinstance(a, HashSketch) and a.bit_width != b.bit_width:
        raise ComparabilityError(f"bit widths differ: {a.bit_width} vs {b.bit_width}")
    if isinstance(a, ChunkedSketch) and a.scheme != b.scheme:
        raise ComparabilityError(f"partition schemes differ: {a.scheme} vs {b.scheme}")
    if a.k != b.k:
        raise ComparabilityError(f"sketch lengths differ: {a.k} vs {b.k}")
