"""Chunked b-bit hashing: sketches, estimators and their variance theory."""

__version__ = "0.1.0"

from .core import (
    ChunkedSketch,
    HashSketch,
    PartitionScheme,
    SparseBinaryVector,
    SparseWeightedVector,
    exact_jaccard,
    exact_weighted_jaccard,
    lowest_bits,
    partition_sketch,
    partition_value,
    reassemble_value,
)
from .cws import cws_sketch, icws_sample
from .errors import PbHashError
from .estimators import (
    CollisionStats,
    collision_rate,
    estimate_j_b,
    estimate_j_m,
    lemma_f,
    p_b_theory,
    theorem1_exact_pb,
    variance_j_m_theory,
    variance_ratio_rb,
    variance_ratio_rmb,
)
from .featurizer import emit_dataset, featurize, one_hot_dims
from .minhash import MinHashConfig, brute_force_collision_prob, minhash_sketch
from .randomness import RandomStream
from .simulator import SimConfig, SyntheticPair, run_trials
