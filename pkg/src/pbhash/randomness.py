"""Seed-reproducible random streams.

Every random quantity in the package comes from SplitMix64 (Steele, Lea &
Flood 2014). The generator is counter based: the n-th output of a stream
with seed ``s`` is ``mix64(s + n * GOLDEN_GAMMA)``. That makes it trivial to
evaluate many independent streams in lock-step with numpy, which the
simulator relies on. The scalar and vectorized paths in this module are
required to agree bit for bit.

Stream seeds are never used sequentially. Each (master seed, index, role)
tuple is folded through :func:`mix64` by :func:`derive_seed`, so adding a
hash function or a trial never perturbs the ones before it.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError

PRNG_ID = "splitmix64"
MIXER_ID = "splitmix64-fmix/fold-v1"

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_C1 = 0xBF58476D1CE4E5B9
_MIX_C2 = 0x94D049BB133111EB
# fractional part of sqrt(2); keeps derive_seed() away from the fixed point mix64(0) == 0
_FOLD_INIT = 0x6A09E667F3BCC908

_U53 = 1.0 / (1 << 53)
_MAX_BOUND = (1 << 32) - 1

# role tags for derive_seed()
ROLE_PERMUTATION = 1
ROLE_REHASH = 2
ROLE_CWS_R = 3
ROLE_CWS_C = 4
ROLE_CWS_BETA = 5
ROLE_TRIAL = 6
ROLE_PAIR = 7


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (taken mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_C1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_C2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64`; ``z`` must be ``uint64``."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_C1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_C2)
    return z ^ (z >> np.uint64(31))


def derive_seed(*parts: int) -> int:
    """Fold integer key parts into a 64-bit seed.

    Negative parts are taken in two's complement, so ``-1`` and ``2**64 - 1``
    are the same key.
    """
    h = _FOLD_INIT
    for p in parts:
        h = mix64(((h + GOLDEN_GAMMA) & MASK64) ^ (int(p) & MASK64))
    return h


def derive_seed_array(*parts) -> np.ndarray:
    """Vectorized :func:`derive_seed`; parts broadcast against each other."""
    arrays = [_as_u64(p) for p in parts]
    shape = np.broadcast_shapes(*(np.shape(a) for a in arrays)) if arrays else ()
    h = np.full(shape, _FOLD_INIT, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for a in arrays:
            h = mix64_array((h + np.uint64(GOLDEN_GAMMA)) ^ a)
    return h


def _as_u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return np.uint64(int(x) & MASK64)
    arr = np.asarray(x)
    if arr.dtype.kind == "u":
        return arr.astype(np.uint64)
    if arr.dtype.kind == "i":
        return arr.astype(np.int64).view(np.uint64)
    if arr.dtype == object:
        flat = [int(v) & MASK64 for v in arr.ravel()]
        return np.array(flat, dtype=np.uint64).reshape(arr.shape)
    raise TypeError(f"cannot use {arr.dtype} values as seed parts")


def stream_outputs(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Output number ``counters`` (1-based) of each stream in ``seeds``."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    return mix64_array(seeds + counters * np.uint64(GOLDEN_GAMMA))


def uniform_from_u64(x: np.ndarray) -> np.ndarray:
    """Map uint64 outputs to doubles in [0, 1) using the top 53 bits."""
    return (np.asarray(x, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * _U53


def exponential_from_uniform(u):
    # 1 - u is exact for 53-bit u and never 0; the clamp only matters if a caller passes u == 1
    return -np.log(np.maximum(1.0 - u, _U53))


class RandomStream:
    """One independent SplitMix64 stream.

    A stream is single-owner and stateful: each draw advances an internal
    counter. Construct it either from a raw 64-bit seed or through
    :meth:`derive`, which keys it by ``(master_seed, stream_index, role)``.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.counter = 0

    @classmethod
    def derive(cls, master_seed: int, stream_index: int, role: int = 0) -> "RandomStream":
        return cls(derive_seed(master_seed, stream_index, role))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed:#018x}, counter={self.counter})"

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.seed + self.counter * GOLDEN_GAMMA)

    def uniform01(self) -> float:
        return (self.next_u64() >> 11) * _U53

    def exponential(self) -> float:
        u = self.uniform01()
        return -math.log(max(1.0 - u, _U53))

    def gamma21(self) -> float:
        """Gamma(shape=2, scale=1) as the sum of two unit exponentials."""
        return self.exponential() + self.exponential()

    def bounded(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by Lemire's multiply-and-reject method."""
        if not 1 <= n <= _MAX_BOUND:
            raise ValueError(f"bound must be in [1, 2**32), got {n}")
        threshold = ((1 << 64) - n) % n
        while True:
            prod = self.next_u64() * n
            if (prod & MASK64) >= threshold:
                return prod >> 64

    def bounded_many(self, bounds: np.ndarray) -> np.ndarray:
        """``[self.bounded(n) for n in bounds]``, vectorized.

        Rejections are astronomically rare (probability below ``n / 2**64``);
        when one happens the remainder of the sequence falls back to the
        scalar path so the counter stays exact.
        """
        bounds = np.asarray(bounds, dtype=np.uint64)
        if bounds.size == 0:
            return np.zeros(0, dtype=np.int64)
        if int(bounds.min()) < 1 or int(bounds.max()) > _MAX_BOUND:
            raise ValueError("bounds must be in [1, 2**32)")
        counters = np.arange(self.counter + 1, self.counter + 1 + bounds.size, dtype=np.uint64)
        x = stream_outputs(np.uint64(self.seed), counters)
        hi, lo = _mul_hi_lo(x, bounds)
        rejected = lo < (np.uint64(0) - bounds) % bounds
        if not rejected.any():
            self.counter += int(bounds.size)
            return hi.astype(np.int64)
        first = int(np.argmax(rejected))
        self.counter += first
        tail = [self.bounded(int(n)) for n in bounds[first:]]
        return np.concatenate([hi[:first].astype(np.int64), np.array(tail, dtype=np.int64)])


def _mul_hi_lo(x: np.ndarray, n: np.ndarray):
    """High and low 64-bit words of ``x * n`` for ``n < 2**32``."""
    x = np.asarray(x, dtype=np.uint64)
    n = np.asarray(n, dtype=np.uint64)
    lo = x * n
    mid = (x >> np.uint64(32)) * n + (((x & np.uint64(0xFFFFFFFF)) * n) >> np.uint64(32))
    return mid >> np.uint64(32), lo


def uniform01(stream: RandomStream) -> float:
    """Next uniform variate in [0, 1) from ``stream``."""
    return stream.uniform01()


def gamma21(stream: RandomStream) -> float:
    """Next Gamma(2, 1) variate from ``stream``."""
    return stream.gamma21()


def random_permutation(D: int, stream: RandomStream) -> np.ndarray:
    """Uniform random permutation of ``range(D)`` (Durstenfeld shuffle).

    ``perm[p]`` is the image of position ``p``. For ``i = D-1, ..., 1`` the
    shuffle swaps slot ``i`` with slot ``stream.bounded(i + 1)``.
    """
    if D < 1:
        raise ConfigurationError(f"permutation length must be >= 1, got {D}")
    draws = stream.bounded_many(np.arange(D, 1, -1, dtype=np.uint64)).tolist()
    perm = list(range(D))
    for i, j in zip(range(D - 1, 0, -1), draws):
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def permutation_matrix(D: int, seeds: np.ndarray) -> np.ndarray:
    """Permutations for many streams at once, shape ``(len(seeds), D)``.

    Row ``r`` equals ``random_permutation(D, RandomStream(seeds[r]))``. The
    loop runs over the D shuffle steps and is vectorized across streams, so
    it pays off when there are many short permutations.
    """
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    lanes = seeds.size
    if D < 1:
        raise ConfigurationError(f"permutation length must be >= 1, got {D}")
    dtype = np.int32 if D < 2**31 else np.int64
    # slot-major layout keeps arr[i] contiguous
    arr = np.broadcast_to(np.arange(D, dtype=dtype)[:, None], (D, lanes)).copy()
    counters = np.zeros(lanes, dtype=np.uint64)
    cols = np.arange(lanes)
    for i in range(D - 1, 0, -1):
        n = i + 1
        counters += np.uint64(1)
        x = stream_outputs(seeds, counters)
        j, lo = _mul_hi_lo(x, np.uint64(n))
        threshold = np.uint64(((1 << 64) - n) % n)
        rejected = lo < threshold
        while rejected.any():
            idx = np.nonzero(rejected)[0]
            counters[idx] += np.uint64(1)
            x2 = stream_outputs(seeds[idx], counters[idx])
            j2, lo2 = _mul_hi_lo(x2, np.uint64(n))
            j[idx] = j2
            rejected = np.zeros(lanes, dtype=bool)
            rejected[idx] = lo2 < threshold
        j = j.astype(np.intp)
        tmp = arr[j, cols]
        arr[j, cols] = arr[i]
        arr[i] = tmp
    return arr.T.astype(np.int64)
