import math
import random

import numpy as np
import pytest

from pbhash.core import SparseBinaryVector, SparseWeightedVector, exact_jaccard, exact_weighted_jaccard
from pbhash.cws import CwsStreams, cws_samples_array, cws_sketch, cws_sketches, icws_sample
from pbhash.errors import ConfigurationError, UndefinedHashError
from pbhash.minhash import MinHashConfig, minhash_sketch


def dense(ws):
    return SparseWeightedVector.from_dense(ws)


def collision_count(a, b):
    return sum(x == y for x, y in zip(a.values, b.values))


def test_symmetric_pair_collides_half_the_time():
    k = 10**4
    a, b = cws_sketches([dense([1, 2]), dense([2, 1])], k, 32, 5)
    rate = collision_count(a, b) / k
    assert abs(rate - 0.5) < 3 * math.sqrt(0.25 / k)


def test_symmetric_pair_at_sixteen_bits():
    k = 10**4
    a, b = cws_sketches([dense([1, 2]), dense([2, 1])], k, 16, 6)
    assert abs(collision_count(a, b) / k - 0.5) < 0.016


def test_scaled_copy_has_similarity_half():
    u = dense([1.0, 3.0, 0.5, 2.0])
    v = dense([2.0, 6.0, 1.0, 4.0])
    assert exact_weighted_jaccard(u, v) == pytest.approx(0.5)
    k = 10**4
    a, b = cws_sketches([u, v], k, 32, 7)
    assert abs(collision_count(a, b) / k - 0.5) < 4 * math.sqrt(0.25 / k)


def test_agrees_with_minhash_on_binary_input():
    D, k = 30, 10**4
    u = SparseBinaryVector.from_iterable(D, range(0, 15))
    v = SparseBinaryVector.from_iterable(D, range(8, 25))
    J = exact_jaccard(u, v)
    cfg = MinHashConfig(D, k, 3, 32)
    n_mh = collision_count(minhash_sketch(u, cfg), minhash_sketch(v, cfg))
    wu, wv = SparseWeightedVector.from_binary(u), SparseWeightedVector.from_binary(v)
    n_cws = collision_count(*cws_sketches([wu, wv], k, 32, 3))
    pooled = (n_mh + n_cws) / (2 * k)
    z = (n_mh - n_cws) / k / math.sqrt(2 * pooled * (1 - pooled) / k)
    assert abs(z) < 2.576
    assert abs(n_cws / k - J) < 4 * math.sqrt(J * (1 - J) / k)


def test_scalar_and_vector_samples_agree():
    rng = random.Random(1)
    for trial in range(20):
        ws = [rng.choice([0.0, rng.uniform(0.01, 50)]) for _ in range(12)]
        ws[trial % 12] = 1.5
        u = dense(ws)
        star, t = cws_samples_array(u, np.array([trial], dtype=np.uint64), 15)
        for j in range(15):
            s = icws_sample(u, CwsStreams(trial, j))
            assert (s.star_index, s.t_value) == (star[0, j], t[0, j])


def test_single_coordinate_always_selected():
    u = SparseWeightedVector(10, ((4, 2.5),))
    star, _ = cws_samples_array(u, np.array([0, 1, 2], dtype=np.uint64), 50)
    assert (star == 4).all()


def test_identical_vectors_always_collide():
    u = dense([0.2, 0, 5, 1e-3, 7])
    a, b = cws_sketches([u, u], 500, 8, 9)
    assert a == b


def test_deterministic():
    u = dense([1, 0, 2, 3])
    assert cws_sketch(u, 40, 16, 12) == cws_sketch(u, 40, 16, 12)
    assert cws_sketch(u, 40, 16, 12).values != cws_sketch(u, 40, 16, 13).values


def test_bit_width_respected():
    s = cws_sketch(dense([3, 1, 4, 1, 5]), 300, 3, 0)
    assert set(s.values) <= set(range(8))


def test_rejects_bad_input():
    with pytest.raises(UndefinedHashError):
        cws_sketch(SparseWeightedVector(4, ()), 4, 8, 0)
    with pytest.raises(ConfigurationError):
        cws_sketch(SparseWeightedVector(4, ((0, 1e-301),)), 4, 8, 0)
    with pytest.raises(ConfigurationError):
        cws_sketch(dense([1]), 0, 8, 0)
    with pytest.raises(ConfigurationError):
        cws_sketch(dense([1]), 4, 65, 0)
