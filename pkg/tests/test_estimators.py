import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbhash.core import ChunkedSketch, HashSketch, PartitionScheme, partition_sketch
from pbhash.errors import ComparabilityError, ConfigurationError, DomainError
from pbhash.estimators import (
    CollisionStats,
    c_b,
    collision_rate,
    estimate_j_b,
    estimate_j_m,
    lemma_f,
    p_b_theory,
    theorem1_exact_pb,
    theory_report,
    variance_j_m_equal_chunks,
    variance_j_m_theory,
    variance_ratio_rb,
    variance_ratio_rmb,
)


def pooled_variance_by_enumeration(J, widths, k=1):
    """Exact Var of the pooled estimator from the joint law of the chunk indicators.

    The full hashes agree with probability J, in which case every chunk
    agrees. Otherwise the two B-bit values are independent uniforms, so chunk
    i agrees independently with probability 2**-b_i.
    """
    J = Fraction(J)
    cs = [Fraction(1, 2**b) for b in widths]
    mean = second = Fraction(0)
    for pattern in itertools.product((0, 1), repeat=len(widths)):
        prob = (1 - J) * math.prod(c if x else 1 - c for c, x in zip(cs, pattern))
        if all(pattern):
            prob += J
        s = sum(pattern)
        mean += prob * s
        second += prob * s * s
    return (second - mean**2) / sum(1 - c for c in cs) ** 2 / k


def closed_form_rmb(J, b, m):
    return 1 + 1 / (m * (2**b - 1) * J)


class TestCollisionLaw:
    def test_c_b(self):
        assert c_b(1) == 0.5 and c_b(16) == 2**-16
        with pytest.raises(ConfigurationError):
            c_b(0)

    def test_endpoints(self):
        for b in (1, 4, 16):
            assert p_b_theory(0.0, b) == 2.0**-b
            assert p_b_theory(1.0, b) == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            p_b_theory(1.5, 2)
        with pytest.raises(DomainError):
            p_b_theory(-0.1, 2)

    @given(st.floats(0, 1), st.integers(1, 32))
    def test_estimator_inverts_collision_law(self, J, b):
        assert estimate_j_b(p_b_theory(J, b), b) == pytest.approx(J, abs=1e-12)


class TestRatios:
    def test_r_b_exact_value(self):
        assert variance_ratio_rb(0.1, 1) == 11.0

    def test_r_b_matches_definition(self):
        for J, b in [(0.1, 1), (0.3, 4), (0.9, 8)]:
            p, c = p_b_theory(J, b), c_b(b)
            assert variance_ratio_rb(J, b) == pytest.approx(p * (1 - p) / (1 - c) ** 2 / (J * (1 - J)), rel=1e-12)

    def test_r_b_at_zero(self):
        assert variance_ratio_rb(0.0, 3) == math.inf

    def test_rmb_closed_form(self):
        for B in (12, 18, 24, 30):
            for m in [d for d in range(1, B + 1) if B % d == 0]:
                for J in (0.01, 0.1, 0.5, 0.95):
                    assert variance_ratio_rmb(J, B // m, m) == pytest.approx(closed_form_rmb(J, B // m, m), rel=1e-12)

    def test_rmb_single_chunk_equals_rb(self):
        for J, b in [(0.1, 1), (0.4, 6)]:
            assert variance_ratio_rmb(J, b, 1) == pytest.approx(variance_ratio_rb(J, b), rel=1e-12)

    def test_rmb_degenerate(self):
        assert variance_ratio_rmb(0.0, 4, 2) == math.inf
        assert math.isnan(variance_ratio_rmb(1.0, 4, 2))


class TestPooledVariance:
    def test_single_full_width_chunk(self):
        assert variance_j_m_theory(0.5, PartitionScheme((16,))) == 0.25000762951094835
        assert float(pooled_variance_by_enumeration(Fraction(1, 2), (16,))) == pytest.approx(
            0.25000762951094835, rel=1e-15
        )

    @pytest.mark.parametrize(
        "widths", [(1,), (4,), (8, 8), (1, 2, 3), (4, 4, 4, 4), (1,) * 8, (5, 11), (2, 2, 2, 2, 8)]
    )
    @pytest.mark.parametrize("J", [0, Fraction(1, 10), Fraction(1, 2), Fraction(4, 5), 1])
    def test_matches_enumeration(self, widths, J):
        got = variance_j_m_theory(float(J), PartitionScheme(widths), k=7)
        want = float(pooled_variance_by_enumeration(J, widths, k=7))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-15)

    def test_equal_chunk_special_case(self):
        rng = random.Random(5)
        for _ in range(100):
            b = rng.randint(1, 16)
            m = rng.randint(1, min(8, 64 // b))
            J, k = rng.random(), rng.randint(1, 1000)
            general = variance_j_m_theory(J, PartitionScheme((b,) * m), k)
            assert variance_j_m_equal_chunks(J, b, m, k) == pytest.approx(general, rel=1e-12, abs=1e-18)

    def test_scales_with_k(self):
        s = PartitionScheme((4, 4))
        assert variance_j_m_theory(0.3, s, 10) == pytest.approx(variance_j_m_theory(0.3, s) / 10, rel=1e-15)

    def test_report(self):
        r = theory_report(0.3, PartitionScheme((3, 3)), k=5)
        assert r.variance_theory == variance_j_m_theory(0.3, PartitionScheme((3, 3)), 5)
        assert r.variance_ratio == pytest.approx(variance_ratio_rmb(0.3, 3, 2), rel=1e-12)
        assert r.chunk_probs == (p_b_theory(0.3, 3),) * 2


class TestChunkCovariance:
    def test_equals_product_form(self):
        for b1, b2 in [(1, 1), (2, 5), (16, 3)]:
            for J in (0.0, 0.2, 0.5, 0.77, 1.0):
                want = (1 - 2.0**-b1) * (1 - 2.0**-b2) * J * (1 - J)
                assert lemma_f(J, b1, b2) == pytest.approx(want, abs=1e-12)

    def test_non_negative_and_concave(self):
        grid = [i / 100 for i in range(101)]
        for b1 in range(1, 17):
            for b2 in range(1, 17):
                vals = [lemma_f(J, b1, b2) for J in grid]
                assert min(vals) >= -1e-15
                assert abs(vals[0]) < 1e-12 and abs(vals[-1]) < 1e-12
                second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, 100)]
                assert max(second) <= 1e-12
                assert abs(grid[vals.index(max(vals))] - 0.5) <= 0.01


class TestExactSmallSetProbability:
    @staticmethod
    def oracle(J, r1, r2, b):
        with mpmath.workdps(50):
            J, r1, r2 = mpmath.mpf(J), mpmath.mpf(r1), mpmath.mpf(r2)
            n = mpmath.mpf(2) ** b
            A1 = r1 * (1 - r1) ** (n - 1) / (1 - (1 - r1) ** n)
            A2 = r2 * (1 - r2) ** (n - 1) / (1 - (1 - r2) ** n)
            C1 = A1 * r2 / (r1 + r2) + A2 * r1 / (r1 + r2)
            C2 = A1 * r1 / (r1 + r2) + A2 * r2 / (r1 + r2)
            return float(C1 + (1 - C2) * J)

    def test_matches_high_precision(self):
        for J, r1, r2, b in [(0.4, 0.3, 0.2, 2), (0.1, 1e-4, 0.5, 1), (0.9, 0.05, 0.05, 8), (0.5, 1e-8, 2e-8, 4)]:
            assert theorem1_exact_pb(J, r1, r2, b) == pytest.approx(self.oracle(J, r1, r2, b), rel=1e-12)

    def test_small_density_limit(self):
        for J in (0, 0.3, 0.7, 1):
            for b in (1, 2, 4, 8):
                assert abs(theorem1_exact_pb(J, 1e-9, 1e-9, b) - p_b_theory(J, b)) < 1e-6

    def test_boundaries(self):
        assert theorem1_exact_pb(0.3, 0.0, 0.0, 2) == pytest.approx(p_b_theory(0.3, 2))
        assert math.isfinite(theorem1_exact_pb(0.3, 1.0, 0.5, 2))
        with pytest.raises(DomainError):
            theorem1_exact_pb(0.3, 0.0, 0.2, 2, strict=True)
        with pytest.raises(DomainError):
            theorem1_exact_pb(0.3, 1.2, 0.2, 2)


class TestSketchEstimates:
    def _pair(self):
        scheme = PartitionScheme((2, 2))
        a = partition_sketch(HashSketch(4, (0b0110, 0b1111, 0b0001, 0b1000), "s"), scheme)
        b = partition_sketch(HashSketch(4, (0b0110, 0b0011, 0b0101, 0b0000), "s"), scheme)
        return a, b

    def test_collision_rates_per_chunk(self):
        a, b = self._pair()
        stats = collision_rate(a, b)
        # low chunks agree on every hash, high chunks only on hash 0
        assert stats.per_chunk_rates == (1.0, 0.25)
        assert stats.num_hashes == 4

    def test_pooled_estimate(self):
        a, b = self._pair()
        est = estimate_j_m(collision_rate(a, b))
        assert est == pytest.approx((1.0 + 0.25 - 0.5) / 1.5)

    def test_pooled_estimate_single_chunk_is_b_bit_estimate(self):
        stats = CollisionStats((0.6,), 10, PartitionScheme((3,)))
        assert estimate_j_m(stats) == pytest.approx(estimate_j_b(0.6, 3), rel=1e-15)

    def test_comparability(self):
        a, _ = self._pair()
        other = partition_sketch(HashSketch(4, (0, 0, 0, 0), "t"), PartitionScheme((2, 2)))
        with pytest.raises(ComparabilityError):
            collision_rate(a, other)
        other = partition_sketch(HashSketch(4, (0, 0, 0, 0), "s"), PartitionScheme((1, 3)))
        with pytest.raises(ComparabilityError):
            collision_rate(a, other)
        short = ChunkedSketch(PartitionScheme((2, 2)), ((0, 0),), "s")
        with pytest.raises(ComparabilityError):
            collision_rate(a, short)

    def test_stats_validate_length(self):
        with pytest.raises(ConfigurationError):
            CollisionStats((0.5,), 3, PartitionScheme((2, 2)))
