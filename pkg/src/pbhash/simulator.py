"""Monte Carlo harness for the pooled chunk estimator.

One vector pair is hashed ``trials`` times, each trial under its own
derived master seed. Every trial produces ``max(k_grid)`` hashes per vector;
the estimate for a smaller ``k`` uses the first ``k`` of them, so all cells
of one trial are nested. Per-trial estimates are kept in a
``(trials, len(m_list), len(k_grid))`` array and aggregated once at the end,
which makes the report independent of batch sizes or execution order.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .core import (
    PartitionScheme,
    SparseBinaryVector,
    SparseWeightedVector,
    exact_jaccard_fraction,
    exact_weighted_jaccard,
)
from .cws import cws_values
from .errors import ConfigurationError, InputFormatError
from .estimators import c_b, variance_j_m_theory
from .formats import read_vectors
from .minhash import minhash_values
from .randomness import ROLE_PAIR, ROLE_TRIAL, RandomStream, derive_seed_array, random_permutation

log = logging.getLogger(__name__)

CSV_COLUMNS = ("m", "k", "j_true", "bias", "var_emp", "var_theory", "rel_dev")
NOT_AVAILABLE = "NA"
HASH_FAMILIES = ("minhash", "cws")

_BATCH_HASHES = 1 << 18


class UnrealizableSimilarityWarning(UserWarning):
    """The requested similarity is not a ratio of integers at the given sizes."""


@dataclass(frozen=True)
class SyntheticPair:
    j_target: float
    universe_size: int = 40
    density: float = 0.5


@dataclass(frozen=True)
class FilePair:
    path: str
    ids: tuple[int, int] = (0, 1)


@dataclass(frozen=True)
class SimConfig:
    pair_source: Union[SyntheticPair, FilePair]
    hash_family: str = "minhash"
    bits: int = 16
    k_grid: tuple[int, ...] = (10, 100, 1000)
    m_list: tuple[int, ...] = (1, 2, 4, 8, 16)
    trials: int = 10_000
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        if self.hash_family not in HASH_FAMILIES:
            raise ConfigurationError(f"hash family must be one of {HASH_FAMILIES}, got {self.hash_family!r}")
        if not 1 <= self.bits <= 64:
            raise ConfigurationError(f"bits must be in [1, 64], got {self.bits}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not self.k_grid or min(self.k_grid) < 1:
            raise ConfigurationError(f"k grid must hold positive integers, got {self.k_grid}")
        for m in self.m_list:
            if m < 1 or self.bits % m:
                raise ConfigurationError(f"m={m} does not divide B={self.bits}")
        if not self.m_list:
            raise ConfigurationError("m list is empty")


@dataclass(frozen=True)
class ReportRow:
    m: int
    k: int
    j_true: float
    bias: float
    var_emp: float  # nan when trials == 1
    var_theory: float
    rel_dev: float  # nan when var_emp is unavailable


@dataclass
class BiasVarianceReport:
    rows: list[ReportRow]
    j_true: float
    trials: int
    flagged: list[tuple[int, int]] = field(default_factory=list)

    def to_csv(self, fh, header: bool = True) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.m, r.k, _fmt(r.j_true), _fmt(r.bias), _fmt(r.var_emp), _fmt(r.var_theory), _fmt(r.rel_dev)])


def _fmt(x: float) -> str:
    return NOT_AVAILABLE if math.isnan(x) else repr(float(x))


def make_pair_with_jaccard(
    j_target: float,
    universe_size: int,
    stream: RandomStream,
    union_size: int | None = None,
) -> tuple[SparseBinaryVector, SparseBinaryVector, Fraction]:
    """Two binary vectors whose Jaccard similarity is the ratio closest to ``j_target``.

    The union has ``union_size`` positions (default: the whole universe),
    chosen at random; ``round(j_target * union_size)`` of them are shared and
    the rest are split between the two vectors as evenly as possible. The
    realized similarity is returned as an exact fraction and a warning is
    issued when it differs from the target.
    """
    if not 0.0 <= j_target <= 1.0:
        raise ConfigurationError(f"target similarity must lie in [0, 1], got {j_target}")
    c = universe_size if union_size is None else int(union_size)
    if not 1 <= c <= universe_size:
        raise ConfigurationError(f"union size must be in [1, {universe_size}], got {c}")
    a = int(math.floor(j_target * c + 0.5))
    if a < c and c < 2:
        raise ConfigurationError("a union of one position cannot hold two different non-empty sets")
    rest = c - a
    only_u = (rest + 1) // 2
    if a == 0 and rest - only_u == 0:
        raise ConfigurationError("cannot realize the target without an empty vector")
    realized = Fraction(a, c)
    if realized != Fraction(j_target).limit_denominator(10**12):
        warnings.warn(
            f"J={j_target} is not realizable with union size {c}; using {realized} = {float(realized):.6g}",
            UnrealizableSimilarityWarning,
            stacklevel=2,
        )
    chosen = random_permutation(universe_size, stream)[:c].tolist()
    shared, u_only, v_only = chosen[:a], chosen[a : a + only_u], chosen[a + only_u :]
    u = SparseBinaryVector.from_iterable(universe_size, shared + u_only)
    v = SparseBinaryVector.from_iterable(universe_size, shared + v_only)
    return u, v, realized


def load_pair(cfg: SimConfig):
    """The vector pair under study and its exact similarity."""
    src = cfg.pair_source
    if isinstance(src, SyntheticPair):
        union = max(1, int(math.floor(src.density * src.universe_size + 0.5)))
        stream = RandomStream.derive(cfg.master_seed, 0, ROLE_PAIR)
        u, v, realized = make_pair_with_jaccard(src.j_target, src.universe_size, stream, union)
        return SparseWeightedVector.from_binary(u), SparseWeightedVector.from_binary(v), float(realized)
    vectors = read_vectors(src.path)
    try:
        u, v = vectors[src.ids[0]], vectors[src.ids[1]]
    except IndexError:
        raise InputFormatError(f"{src.path} has {len(vectors)} vectors; ids {src.ids} not found") from None
    if cfg.hash_family == "minhash":
        return u, v, float(exact_jaccard_fraction(u.support(), v.support()))
    return u, v, exact_weighted_jaccard(u, v)


def trial_seeds(master_seed: int, trials: int) -> np.ndarray:
    """Master seed of each trial; trial ``t`` does not depend on the trial count."""
    return derive_seed_array(np.uint64(master_seed & (2**64 - 1)), np.arange(trials, dtype=np.uint64), ROLE_TRIAL)


def _hash_pair(cfg: SimConfig, u, v, seeds: np.ndarray, k: int) -> np.ndarray:
    if cfg.hash_family == "minhash":
        pos = [np.asarray(x.positions, dtype=np.intp) for x in (u, v)]
        return minhash_values(pos, u.universe_size, seeds, k, cfg.bits)
    return cws_values([u, v], seeds, k, cfg.bits)


def trial_estimates(cfg: SimConfig, u, v) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial estimates and total chunk-collision counts.

    Returns ``(estimates, collisions)``; both have shape
    ``(trials, len(m_list), len(k_grid))``.
    """
    k_max = max(cfg.k_grid)
    k_idx = np.array(cfg.k_grid) - 1
    ks = np.array(cfg.k_grid, dtype=np.float64)
    seeds = trial_seeds(cfg.master_seed, cfg.trials)
    schemes = [PartitionScheme.equal(cfg.bits, m) for m in cfg.m_list]
    est = np.empty((cfg.trials, len(schemes), len(ks)))
    hits = np.empty((cfg.trials, len(schemes), len(ks)), dtype=np.int64)
    batch = max(1, _BATCH_HASHES // k_max)
    for start in range(0, cfg.trials, batch):
        vals = _hash_pair(cfg, u, v, seeds[start : start + batch], k_max)
        a, b = vals[:, 0, :], vals[:, 1, :]
        for mi, scheme in enumerate(schemes):
            agree = np.zeros(a.shape, dtype=np.int64)
            for width, off in zip(scheme.chunk_widths, scheme.offsets):
                mask, shift = np.uint64((1 << width) - 1), np.uint64(off)
                agree += ((a >> shift) & mask) == ((b >> shift) & mask)
            cum = np.cumsum(agree, axis=1)[:, k_idx]
            cs = [c_b(w) for w in scheme.chunk_widths]
            denom = sum(1.0 - c for c in cs)
            est[start : start + batch, mi] = (cum / ks) / denom - sum(cs) / denom
            hits[start : start + batch, mi] = cum
    return est, hits


def run_trials(cfg: SimConfig) -> BiasVarianceReport:
    """Bias and variance of the estimator for every (m, k) cell."""
    u, v, j_true = load_pair(cfg)
    est, hits = trial_estimates(cfg, u, v)
    rows, flagged = [], []
    for mi, m in enumerate(cfg.m_list):
        scheme = PartitionScheme.equal(cfg.bits, m)
        for ki, k in enumerate(cfg.k_grid):
            col = est[:, mi, ki]
            bias = float(col.mean()) - j_true
            var_emp = float(col.var(ddof=1)) if cfg.trials > 1 else math.nan
            var_th = variance_j_m_theory(j_true, scheme, k)
            rel = _relative_deviation(var_emp, var_th)
            total = int(hits[:, mi, ki].sum())
            if total == 0 or total == k * m * cfg.trials:
                flagged.append((m, k))
                log.warning("cell m=%d k=%d: collision count is degenerate (%d)", m, k, total)
            rows.append(ReportRow(m, k, j_true, bias, var_emp, var_th, rel))
    return BiasVarianceReport(rows, j_true, cfg.trials, flagged)


def _relative_deviation(var_emp: float, var_th: float) -> float:
    if math.isnan(var_emp):
        return math.nan
    if var_th == 0:
        # J == 1: every estimate is exactly 1
        return 0.0 if var_emp == 0 else math.inf
    return abs(var_emp - var_th) / var_th


def check_report(report: BiasVarianceReport, rel_tol: float = 0.05, bias_sigmas: float = 4.0) -> list[str]:
    """Cells violating the variance or bias tolerance, as readable messages."""
    failures = []
    for r in report.rows:
        if math.isnan(r.var_emp):
            failures.append(f"m={r.m} k={r.k}: empirical variance unavailable")
            continue
        if not r.rel_dev < rel_tol:
            failures.append(f"m={r.m} k={r.k}: rel_dev {r.rel_dev:.4f} >= {rel_tol}")
        band = bias_sigmas * math.sqrt(r.var_theory / report.trials)
        if not (abs(r.bias) < band or (band == 0 and r.bias == 0)):
            failures.append(f"m={r.m} k={r.k}: |bias| {abs(r.bias):.3g} >= {band:.3g}")
    return failures
