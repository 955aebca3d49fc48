import math
import random
from fractions import Fraction

import numpy as np
import pytest

from pbhash.core import SparseBinaryVector, exact_jaccard, exact_jaccard_fraction
from pbhash.errors import ConfigurationError, ResourceLimitError, UndefinedHashError
from pbhash.minhash import (
    MinHashConfig,
    brute_force_collision_prob,
    minhash_sketch,
    minhash_sketch_reference,
    minhash_sketches,
    minhash_values,
)


def sbv(D, positions):
    return SparseBinaryVector.from_iterable(D, positions)


def collisions(a, b):
    return sum(x == y for x, y in zip(a.values, b.values))


def test_full_universe_minimum_is_zero():
    cfg = MinHashConfig(16, 50, 7, 4)
    assert not cfg.rehash
    assert minhash_sketch(sbv(16, range(16)), cfg).values == (0,) * 50


def test_values_fit_output_bits():
    for bits in (1, 3, 16, 64):
        s = minhash_sketch(sbv(40, {1, 5, 30}), MinHashConfig(40, 200, 1, bits))
        assert all(0 <= v < 2**bits for v in s.values)


def test_deterministic_and_seed_sensitive():
    u = sbv(30, {2, 3, 17, 29})
    a = minhash_sketch(u, MinHashConfig(30, 64, 5, 16))
    b = minhash_sketch(u, MinHashConfig(30, 64, 5, 16))
    c = minhash_sketch(u, MinHashConfig(30, 64, 6, 16))
    assert a == b
    assert a.values != c.values
    assert a.scheme_id != c.scheme_id


def test_nested_hashes_are_prefixes():
    u = sbv(25, {0, 4, 9})
    long = minhash_sketch(u, MinHashConfig(25, 100, 3, 16))
    short = minhash_sketch(u, MinHashConfig(25, 10, 3, 16))
    assert long.head(10) == short


@pytest.mark.parametrize("D,bits", [(4, 2), (7, 16), (40, 16), (2000, 12)])
def test_matches_hash_by_hash_reference(D, bits):
    rng = random.Random(D)
    cfg = MinHashConfig(D, 20, 99, bits)
    for _ in range(5):
        u = sbv(D, rng.sample(range(D), rng.randint(1, D)))
        assert minhash_sketch(u, cfg) == minhash_sketch_reference(u, cfg)


def test_batch_matches_single():
    cfg = MinHashConfig(12, 30, 4, 8)
    vecs = [sbv(12, {0, 1}), sbv(12, {5}), sbv(12, range(12))]
    assert minhash_sketches(vecs, cfg) == [minhash_sketch(v, cfg) for v in vecs]


def test_values_array_shape():
    out = minhash_values([np.array([0, 1]), np.array([2])], 5, np.arange(3, dtype=np.uint64), 4, 8)
    assert out.shape == (3, 2, 4) and out.dtype == np.uint64


def test_collision_rate_small_universe():
    u, v = sbv(4, {1, 3}), sbv(4, {1, 2})
    k = 10**4
    cfg = MinHashConfig(4, k, 2024, 2)
    rate = collisions(minhash_sketch(u, cfg), minhash_sketch(v, cfg)) / k
    sigma = math.sqrt((1 / 3) * (2 / 3) / k)
    assert abs(rate - 1 / 3) < 3 * sigma


def test_collision_rate_band_over_many_seeds():
    u, v = sbv(40, range(0, 20)), sbv(40, range(10, 30))
    J = exact_jaccard(u, v)
    k = 1000
    # B = 32 keeps the re-hash chance collision 2**-32 out of the picture
    p = J + (1 - J) * 2.0**-32
    sigma = math.sqrt(p * (1 - p) / k)
    inside = 0
    for seed in range(100):
        cfg = MinHashConfig(40, k, seed, 32)
        rate = collisions(minhash_sketch(u, cfg), minhash_sketch(v, cfg)) / k
        inside += abs(rate - p) < 4 * sigma
    assert inside >= 99


def test_rehash_collision_rate_matches_b_bit_law():
    u, v = sbv(40, range(0, 20)), sbv(40, range(10, 30))
    J = exact_jaccard(u, v)
    k, b = 20000, 2
    cfg = MinHashConfig(40, k, 11, b)
    rate = collisions(minhash_sketch(u, cfg), minhash_sketch(v, cfg)) / k
    p = 2.0**-b + (1 - 2.0**-b) * J
    assert abs(rate - p) < 4 * math.sqrt(p * (1 - p) / k)


def test_brute_force_small_pair():
    assert brute_force_collision_prob(sbv(4, {1, 3}), sbv(4, {1, 2})) == Fraction(8, 24)


def test_brute_force_matches_jaccard_on_random_pairs():
    rng = random.Random(17)
    for _ in range(40):
        D = rng.randint(1, 6)
        a = set(rng.sample(range(D), rng.randint(1, D)))
        b = set(rng.sample(range(D), rng.randint(1, D)))
        u, v = sbv(D, a), sbv(D, b)
        assert brute_force_collision_prob(u, v) == exact_jaccard_fraction(u, v)


def test_brute_force_limits():
    with pytest.raises(ResourceLimitError):
        brute_force_collision_prob(sbv(9, {0}), sbv(9, {1}))
    with pytest.raises(UndefinedHashError):
        brute_force_collision_prob(sbv(3, ()), sbv(3, {1}))


def test_errors():
    with pytest.raises(UndefinedHashError):
        minhash_sketch(sbv(8, ()), MinHashConfig(8, 4, 0, 3))
    with pytest.raises(ConfigurationError):
        minhash_sketch(sbv(9, {1}), MinHashConfig(8, 4, 0, 3))
    with pytest.raises(ConfigurationError):
        MinHashConfig(0, 4, 0, 3)
    with pytest.raises(ConfigurationError):
        MinHashConfig(2**20 + 1, 4, 0, 3)
    with pytest.raises(ConfigurationError):
        MinHashConfig(8, 0, 0, 3)
    with pytest.raises(ConfigurationError):
        MinHashConfig(8, 4, 0, 65)
