"""Closed-form theory for b-bit hashing and for hashes split into bit chunks.

Under the working model, two b-bit hash values collide with probability
``P_b = c_b + (1 - c_b) J`` where ``c_b = 2**-b``. For a partition of one
B-bit hash into chunks ``b_1..b_m``, chunks ``i`` and ``i'`` both collide
exactly when the ``b_i + b_i'`` bits they jointly cover collide, which
gives the covariance term ``P_{b_i+b_i'} - P_{b_i} P_{b_i'}``.

:func:`variance_j_m_theory` (arbitrary chunk widths) is the single source of
truth for the variance. The equal-chunk closed form in
:func:`variance_j_m_equal_chunks` is only there to cross-check it.

Estimates are never clamped to [0, 1]; clamping would bias them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ChunkedSketch, PartitionScheme, check_comparable
from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class CollisionStats:
    per_chunk_rates: tuple[float, ...]
    num_hashes: int
    scheme: PartitionScheme

    def __post_init__(self):
        object.__setattr__(self, "per_chunk_rates", tuple(float(r) for r in self.per_chunk_rates))
        if len(self.per_chunk_rates) != self.scheme.m:
            raise ConfigurationError(
                f"{len(self.per_chunk_rates)} rates for a {self.scheme.m}-chunk scheme"
            )


@dataclass(frozen=True)
class TheoryReport:
    j_true: float
    variance_theory: float
    variance_ratio: float
    chunk_probs: tuple[float, ...]


def c_b(b: int) -> float:
    """Chance collision probability ``2**-b`` of two unrelated b-bit values."""
    if b < 1:
        raise ConfigurationError(f"chunk width must be >= 1, got {b}")
    return 2.0 ** -b


def _check_j(J: float) -> None:
    if not 0.0 <= J <= 1.0:
        raise DomainError(f"similarity must lie in [0, 1], got {J}")


def p_b_theory(J: float, b: int) -> float:
    """Collision probability of b-bit values for similarity ``J``."""
    _check_j(J)
    c = c_b(b)
    return c + (1.0 - c) * J


def collision_rate(a: ChunkedSketch, b: ChunkedSketch) -> CollisionStats:
    """Per-chunk fraction of hashes on which the two sketches agree."""
    check_comparable(a, b)
    k = a.k
    if k == 0:
        raise ConfigurationError("cannot compare empty sketches")
    ca, cb = np.asarray(a.chunks, dtype=np.uint64), np.asarray(b.chunks, dtype=np.uint64)
    hits = (ca == cb).sum(axis=0)
    return CollisionStats(tuple(int(h) / k for h in hits), k, a.scheme)


def estimate_j_b(p_hat: float, b: int) -> float:
    """Unbiased similarity estimate from one b-bit collision rate."""
    c = c_b(b)
    return (p_hat - c) / (1.0 - c)


def estimate_j_m(stats: CollisionStats) -> float:
    """Unbiased similarity estimate pooling all chunk collision rates."""
    cs = [c_b(b) for b in stats.scheme.chunk_widths]
    denom = sum(1.0 - c for c in cs)
    return sum(stats.per_chunk_rates) / denom - sum(cs) / denom


def variance_ratio_rb(J: float, b: int) -> float:
    """Sample-size multiplier for keeping b bits; ``inf`` at ``J == 0``."""
    _check_j(J)
    if b < 1:
        raise ConfigurationError(f"b must be >= 1, got {b}")
    if J == 0:
        return math.inf
    return 1.0 + 1.0 / ((2.0**b - 1.0) * J)


def variance_j_m_theory(J: float, scheme: PartitionScheme, k: int = 1) -> float:
    """Variance of the pooled estimator over ``k`` independent hashes.

    Sums the per-chunk Bernoulli variances and all ordered-pair covariances,
    then divides by the squared normalizer and by ``k``.
    """
    _check_j(J)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    widths = scheme.chunk_widths
    probs = [p_b_theory(J, b) for b in widths]
    total = sum(p * (1.0 - p) for p in probs)
    for i, bi in enumerate(widths):
        for i2, bi2 in enumerate(widths):
            if i != i2:
                total += p_b_theory(J, bi + bi2) - probs[i] * probs[i2]
    denom = sum(1.0 - c_b(b) for b in widths)
    return total / denom**2 / k


def variance_j_m_equal_chunks(J: float, b: int, m: int, k: int = 1) -> float:
    """Equal-width special case of :func:`variance_j_m_theory` (cross-check only)."""
    _check_j(J)
    c = c_b(b)
    pb = p_b_theory(J, b)
    p2b = p_b_theory(J, 2 * b)
    return (pb * (1.0 - pb) + (m - 1) * (p2b - pb * pb)) / (m * (1.0 - c) ** 2) / k


def variance_ratio_rmb(J: float, b: int, m: int) -> float:
    """Variance of the m-chunk estimator relative to ``J (1 - J)``.

    Returns ``inf`` at ``J == 0`` and ``nan`` at ``J == 1``, where the
    reference variance vanishes.
    """
    _check_j(J)
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    var = variance_j_m_theory(J, PartitionScheme((b,) * m))
    if J == 0:
        return math.inf
    if J == 1:
        return math.nan
    return var / (J * (1.0 - J))


def lemma_f(J: float, b1: int, b2: int) -> float:
    """Covariance of the collision indicators of two chunks of one hash."""
    return p_b_theory(J, b1 + b2) - p_b_theory(J, b1) * p_b_theory(J, b2)


def theory_report(J: float, scheme: PartitionScheme, k: int = 1) -> TheoryReport:
    var = variance_j_m_theory(J, scheme, k)
    ratio = math.inf if J == 0 else (math.nan if J == 1 else var * k / (J * (1.0 - J)))
    return TheoryReport(J, var, ratio, tuple(p_b_theory(J, b) for b in scheme.chunk_widths))


def _a_term(r: float, b: int) -> float:
    # r (1-r)^(n-1) / (1 - (1-r)^n) with n = 2**b, evaluated without cancellation
    n = 2.0**b
    if r == 0.0:
        return 1.0 / n
    if r == 1.0:
        return 0.0
    log_q = math.log1p(-r)
    return r * math.exp((n - 1.0) * log_q) / -math.expm1(n * log_q)


def theorem1_exact_pb(J: float, r1: float, r2: float, b: int, strict: bool = False) -> float:
    """Exact b-bit collision probability of MinHash for set densities ``r1, r2``.

    ``r1`` and ``r2`` are the fractions of the universe occupied by the two
    sets. The endpoints 0 and 1 use the analytic limits of the ``A`` terms
    unless ``strict`` is set, in which case they raise.
    """
    _check_j(J)
    if b < 1:
        raise ConfigurationError(f"b must be >= 1, got {b}")
    for r in (r1, r2):
        if not 0.0 <= r <= 1.0:
            raise DomainError(f"density must lie in [0, 1], got {r}")
        if strict and r in (0.0, 1.0):
            raise DomainError(f"density {r} is on the boundary")
    a1, a2 = _a_term(r1, b), _a_term(r2, b)
    if r1 + r2 == 0.0:
        w1 = w2 = 0.5  # a1 == a2 here, so the split is irrelevant
    else:
        w1, w2 = r1 / (r1 + r2), r2 / (r1 + r2)
    c1 = a1 * w2 + a2 * w1
    c2 = a1 * w1 + a2 * w2
    return c1 + (1.0 - c2) * J
