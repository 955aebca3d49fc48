"""Permutation MinHash for binary vectors.

Hash ``j`` of a vector ``u`` is ``min(perm_j[p] for p in u)`` where
``perm_j`` is the shuffle driven by stream ``(master_seed, j)``. When the
universe size is exactly ``2**B`` the minimum is emitted as is; otherwise it
is re-hashed by the keyed mixer and masked to ``B`` bits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import HashSketch, SparseBinaryVector
from .errors import ConfigurationError, ResourceLimitError, UndefinedHashError
from .randomness import (
    PRNG_ID,
    ROLE_PERMUTATION,
    ROLE_REHASH,
    RandomStream,
    derive_seed,
    derive_seed_array,
    permutation_matrix,
    random_permutation,
)

MAX_UNIVERSE = 1 << 20
MAX_BRUTE_FORCE_UNIVERSE = 8
# above this the per-stream shuffle beats the lock-step one
_MATRIX_PATH_MAX_D = 1024
_BATCH_CELLS = 1 << 22


@dataclass(frozen=True)
class MinHashConfig:
    universe_size: int
    num_hashes: int
    master_seed: int
    output_bits: int

    def __post_init__(self):
        if not 1 <= self.universe_size <= MAX_UNIVERSE:
            raise ConfigurationError(f"universe size must be in [1, 2**20], got {self.universe_size}")
        if self.num_hashes < 1:
            raise ConfigurationError(f"need at least one hash, got k={self.num_hashes}")
        if not 1 <= self.output_bits <= 64:
            raise ConfigurationError(f"output bits must be in [1, 64], got {self.output_bits}")

    @property
    def rehash(self) -> bool:
        return self.universe_size != (1 << self.output_bits)

    @property
    def scheme_id(self) -> str:
        return f"minhash/{PRNG_ID}/D={self.universe_size}/seed={self.master_seed & (2**64 - 1)}"


def minhash_sketch(u: SparseBinaryVector, cfg: MinHashConfig) -> HashSketch:
    """MinHash sketch of one vector."""
    return minhash_sketches([u], cfg)[0]


def minhash_sketches(vectors: Sequence[SparseBinaryVector], cfg: MinHashConfig) -> list[HashSketch]:
    """Sketch many vectors, building each permutation once."""
    for u in vectors:
        _check_vector(u, cfg.universe_size)
    values = minhash_values(
        [np.asarray(u.positions, dtype=np.intp) for u in vectors],
        cfg.universe_size,
        np.array([cfg.master_seed & (2**64 - 1)], dtype=np.uint64),
        cfg.num_hashes,
        cfg.output_bits,
    )[0]
    return [HashSketch(cfg.output_bits, tuple(row.tolist()), cfg.scheme_id) for row in values]


def minhash_values(
    position_sets: Sequence[np.ndarray],
    universe_size: int,
    master_seeds: np.ndarray,
    k: int,
    bits: int,
) -> np.ndarray:
    """Hash values for every (master seed, vector, hash index).

    Returns a ``uint64`` array of shape ``(len(master_seeds), len(position_sets), k)``.
    Each master seed plays the role of an independent :class:`MinHashConfig`;
    the simulator passes one per trial.
    """
    master_seeds = np.asarray(master_seeds, dtype=np.uint64).ravel()
    n_seeds, n_vec = master_seeds.size, len(position_sets)
    if any(len(p) == 0 for p in position_sets):
        raise UndefinedHashError("cannot MinHash an empty vector")
    j = np.arange(k, dtype=np.uint64)
    perm_seeds = derive_seed_array(master_seeds[:, None], j[None, :], ROLE_PERMUTATION).ravel()
    mins = np.empty((perm_seeds.size, n_vec), dtype=np.int64)
    lanes = max(1, _BATCH_CELLS // universe_size)
    for start in range(0, perm_seeds.size, lanes):
        perms = _permutations(universe_size, perm_seeds[start : start + lanes])
        for vi, pos in enumerate(position_sets):
            mins[start : start + lanes, vi] = perms[:, pos].min(axis=1)
    mins = mins.reshape(n_seeds, k, n_vec).transpose(0, 2, 1)
    if universe_size == (1 << bits):
        return mins.astype(np.uint64)
    keys = derive_seed_array(master_seeds[:, None], j[None, :], ROLE_REHASH)
    mixed = derive_seed_array(keys[:, None, :], mins)
    return mixed & np.uint64((1 << bits) - 1 if bits < 64 else 2**64 - 1)


def _permutations(D: int, seeds: np.ndarray) -> np.ndarray:
    if D <= _MATRIX_PATH_MAX_D:
        return permutation_matrix(D, seeds)
    return np.stack([random_permutation(D, RandomStream(int(s))) for s in seeds])


def minhash_sketch_reference(u: SparseBinaryVector, cfg: MinHashConfig) -> HashSketch:
    """Hash-by-hash definition of :func:`minhash_sketch`, kept for cross-checking."""
    _check_vector(u, cfg.universe_size)
    values = []
    for j in range(cfg.num_hashes):
        perm = random_permutation(cfg.universe_size, RandomStream.derive(cfg.master_seed, j, ROLE_PERMUTATION))
        lowest = int(min(perm[p] for p in u.positions))
        if cfg.rehash:
            key = derive_seed(cfg.master_seed, j, ROLE_REHASH)
            lowest = derive_seed(key, lowest) & ((1 << cfg.output_bits) - 1)
        values.append(lowest)
    return HashSketch(cfg.output_bits, tuple(values), cfg.scheme_id)


def brute_force_collision_prob(u: SparseBinaryVector, v: SparseBinaryVector) -> Fraction:
    """Exact fraction of all ``D!`` permutations under which the minima coincide."""
    D = u.universe_size
    if v.universe_size != D:
        raise ConfigurationError(f"universe sizes differ: {D} vs {v.universe_size}")
    if D > MAX_BRUTE_FORCE_UNIVERSE:
        raise ResourceLimitError(f"enumeration limited to D <= {MAX_BRUTE_FORCE_UNIVERSE}, got {D}")
    if not u.positions or not v.positions:
        raise UndefinedHashError("cannot MinHash an empty vector")
    hits = total = 0
    for perm in itertools.permutations(range(D)):
        total += 1
        if min(perm[p] for p in u.positions) == min(perm[p] for p in v.positions):
            hits += 1
    return Fraction(hits, total)


def _check_vector(u: SparseBinaryVector, universe_size: int) -> None:
    if u.universe_size != universe_size:
        raise ConfigurationError(f"vector universe {u.universe_size} != config universe {universe_size}")
    if not u.positions:
        raise UndefinedHashError("cannot MinHash an empty vector")
