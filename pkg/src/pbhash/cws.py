"""Consistent weighted sampling (Ioffe's ICWS) for non-negative vectors.

For hash index ``j`` and every coordinate ``i`` the variates ``r_i, c_i``
(Gamma(2, 1)) and ``beta_i`` (Uniform[0, 1)) come from streams keyed by
``(master_seed, j, i, role)``. They depend on the coordinate, never on the
vector, which is what makes the sample consistent across vectors: the
probability that two vectors draw the same ``(i*, t*)`` equals their
weighted Jaccard similarity.

The selection score ``a_i = c_i / (y_i * exp(r_i))`` is compared in log
space, ``ln a_i = ln c_i - r_i * (t_i - beta_i + 1)``, which is monotone in
``a_i`` and cannot overflow for large weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import HashSketch, SparseWeightedVector
from .errors import ConfigurationError, UndefinedHashError
from .randomness import (
    PRNG_ID,
    ROLE_CWS_BETA,
    ROLE_CWS_C,
    ROLE_CWS_R,
    ROLE_REHASH,
    RandomStream,
    derive_seed,
    derive_seed_array,
    exponential_from_uniform,
    stream_outputs,
    uniform_from_u64,
)

MIN_WEIGHT = 1e-300
_BATCH_CELLS = 1 << 21


@dataclass(frozen=True)
class CwsSample:
    star_index: int
    t_value: int


class CwsStreams:
    """Per-coordinate streams for one hash index."""

    def __init__(self, master_seed: int, hash_index: int):
        self.master_seed = int(master_seed)
        self.hash_index = int(hash_index)

    def stream(self, coordinate: int, role: int) -> RandomStream:
        return RandomStream(derive_seed(self.master_seed, self.hash_index, coordinate, role))


def cws_scheme_id(master_seed: int) -> str:
    return f"cws/{PRNG_ID}/seed={master_seed & (2**64 - 1)}"


def icws_sample(u: SparseWeightedVector, streams: CwsStreams) -> CwsSample:
    """One ICWS draw, coordinate by coordinate."""
    _check_vector(u)
    best = None
    for i, s in u.entries:
        r = streams.stream(i, ROLE_CWS_R).gamma21()
        c = streams.stream(i, ROLE_CWS_C).gamma21()
        beta = streams.stream(i, ROLE_CWS_BETA).uniform01()
        t = int(np.floor(np.log(np.float64(s)) / r + beta))
        log_a = float(np.log(np.float64(c)) - r * (t - beta + 1.0))
        if best is None or log_a < best[0]:
            best = (log_a, i, t)
    return CwsSample(best[1], best[2])


def cws_sketch(u: SparseWeightedVector, k: int, B: int, master_seed: int) -> HashSketch:
    """``k`` ICWS samples, each mixed down to ``B`` bits."""
    return cws_sketches([u], k, B, master_seed)[0]


def cws_sketches(vectors: Sequence[SparseWeightedVector], k: int, B: int, master_seed: int) -> list[HashSketch]:
    if k < 1:
        raise ConfigurationError(f"need at least one hash, got k={k}")
    if not 1 <= B <= 64:
        raise ConfigurationError(f"bits must be in [1, 64], got {B}")
    for u in vectors:
        _check_vector(u)
    seed = int(master_seed) & (2**64 - 1)
    values = cws_values(vectors, np.array([seed], dtype=np.uint64), k, B)[0]
    sid = cws_scheme_id(seed)
    return [HashSketch(B, tuple(row.tolist()), sid) for row in values]


def cws_values(
    vectors: Sequence[SparseWeightedVector],
    master_seeds: np.ndarray,
    k: int,
    bits: int,
) -> np.ndarray:
    """Mixed ``bits``-wide hash values, shape ``(len(master_seeds), len(vectors), k)``."""
    master_seeds = np.asarray(master_seeds, dtype=np.uint64).ravel()
    j = np.arange(k, dtype=np.uint64)
    keys = derive_seed_array(master_seeds[:, None], j[None, :], ROLE_REHASH)
    out = np.empty((master_seeds.size, len(vectors), k), dtype=np.uint64)
    mask = np.uint64((1 << bits) - 1)
    for vi, u in enumerate(vectors):
        star, t = cws_samples_array(u, master_seeds, k)
        out[:, vi, :] = derive_seed_array(keys, star, t) & mask
    return out


def cws_samples_array(u: SparseWeightedVector, master_seeds: np.ndarray, k: int):
    """``(star_index, t_value)`` arrays of shape ``(len(master_seeds), k)``."""
    _check_vector(u)
    master_seeds = np.asarray(master_seeds, dtype=np.uint64).ravel()
    pos = np.asarray(u.positions, dtype=np.int64)
    log_w = np.log(np.asarray(u.weights, dtype=np.float64))
    n_seed = master_seeds.size
    star = np.empty((n_seed, k), dtype=np.int64)
    tval = np.empty((n_seed, k), dtype=np.int64)
    rows = max(1, _BATCH_CELLS // (k * pos.size))
    j = np.arange(k, dtype=np.uint64)[None, :, None]
    coord = pos.astype(np.uint64)[None, None, :]
    for start in range(0, n_seed, rows):
        ms = master_seeds[start : start + rows, None, None]
        r = _gamma21(derive_seed_array(ms, j, coord, ROLE_CWS_R))
        c = _gamma21(derive_seed_array(ms, j, coord, ROLE_CWS_C))
        beta = uniform_from_u64(stream_outputs(derive_seed_array(ms, j, coord, ROLE_CWS_BETA), 1))
        t = np.floor(log_w / r + beta)
        log_a = np.log(c) - r * (t - beta + 1.0)
        arg = np.argmin(log_a, axis=-1)
        star[start : start + rows] = pos[arg]
        tval[start : start + rows] = np.take_along_axis(t, arg[..., None], axis=-1)[..., 0].astype(np.int64)
    return star, tval


def _gamma21(seeds: np.ndarray) -> np.ndarray:
    e1 = exponential_from_uniform(uniform_from_u64(stream_outputs(seeds, 1)))
    e2 = exponential_from_uniform(uniform_from_u64(stream_outputs(seeds, 2)))
    return e1 + e2


def _check_vector(u: SparseWeightedVector) -> None:
    if not u.entries:
        raise UndefinedHashError("cannot sample an all-zero vector")
    for i, w in u.entries:
        if w < MIN_WEIGHT:
            raise ConfigurationError(f"weight {w} at coordinate {i} is below {MIN_WEIGHT}")
