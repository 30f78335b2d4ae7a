"""cpforge: learned constructive primitives for a tile platformer.

The pipeline: sample a segment dataset, cluster it to find annotation
seeds, learn a quality classifier through an (oracle- or human-driven)
active labeling loop, filter generated segments through rules plus the
classifier into a binned CP set, assemble controllable levels from the
CPs, and adapt served difficulty to a player with tabular Q-learning.
"""

from .active import (
    ALSession,
    init_session,
    next_query,
    oracle_label,
    run_with_oracle,
    submit_label,
)
from .clustering import ClusterResult, Standardization, kmeans, select_k, silhouette
from .dda import PlayerSim, QPolicy, converged_difficulty, run_adaptive, simulate_play
from .levels import Level, compatible, generate_level, matches_control, read_level, write_level
from .pipeline import CP, CPSet, RuleVerdict, generate_cps, is_cp, rule_filter
from .quality import QualityModel, load_model, predict, save_model, train, uncertainty
from .sampler import DatasetRecord, SamplerParams, sample_dataset, sample_segment
from .segments import (
    ContentFeatures,
    ControlParams,
    SegmentGrid,
    decode_segment,
    difficulty_bin,
    difficulty_score,
    encode_segment,
    extract_features,
)

__version__ = "0.1.0"

__all__ = [
    "ALSession",
    "CP",
    "CPSet",
    "ClusterResult",
    "ContentFeatures",
    "ControlParams",
    "DatasetRecord",
    "Level",
    "PlayerSim",
    "QPolicy",
    "QualityModel",
    "RuleVerdict",
    "SamplerParams",
    "SegmentGrid",
    "Standardization",
    "compatible",
    "converged_difficulty",
    "decode_segment",
    "difficulty_bin",
    "difficulty_score",
    "encode_segment",
    "extract_features",
    "generate_cps",
    "generate_level",
    "init_session",
    "is_cp",
    "kmeans",
    "load_model",
    "matches_control",
    "next_query",
    "oracle_label",
    "predict",
    "read_level",
    "rule_filter",
    "run_adaptive",
    "run_with_oracle",
    "sample_dataset",
    "sample_segment",
    "save_model",
    "select_k",
    "silhouette",
    "simulate_play",
    "submit_label",
    "train",
    "uncertainty",
    "write_level",
]
