"""Deterministic emotion-cause pair extraction over conversation graphs.

The pipeline consumes a corpus of conversations with precomputed utterance
embeddings, builds a typed conversation graph per conversation, encodes two
semantic spaces with graph attention, aligns them by fused entropic optimal
transport, and fuses the transport plan with a pairwise classifier into
emotion-cause pair decisions.
"""

from .align import TransportPlan, attr_cost, fgw_align, fused_objective, sinkhorn, struct_cost_linearized, struct_loss
from .core import (
    AttentionLayerParams,
    ConfigError,
    ContractViolation,
    ConversationRecord,
    Corpus,
    CorpusFormatError,
    EvalInputError,
    HyperParams,
    MlpParams,
    ModelParams,
    Utterance,
    block_seed,
    cosine_similarity,
    seeded_init,
    stable_softmax,
)
from .encoder import EncoderOutput, attention_layer, encode
from .evaluate import (
    EvalReport,
    binary_f1,
    evaluate_corpus,
    multi_cause_subset,
    per_cause_count_recall,
    score_pairs,
)
from .graph import ConversationGraph, EdgeType, build_edges, build_graph, build_node_features
from .predict import (
    LossReport,
    PairPredictionSet,
    decide_pairs,
    ee_ce_heads,
    fuse_scores,
    gold_pair_matrix,
    losses,
    pair_score,
    predict_pairs,
)
from .cli import RunConfig, load_corpus, load_params_blocks, process_conversation, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AttentionLayerParams",
    "ConfigError",
    "ContractViolation",
    "ConversationGraph",
    "ConversationRecord",
    "Corpus",
    "CorpusFormatError",
    "EdgeType",
    "EncoderOutput",
    "EvalInputError",
    "EvalReport",
    "HyperParams",
    "LossReport",
    "MlpParams",
    "ModelParams",
    "PairPredictionSet",
    "RunConfig",
    "TransportPlan",
    "Utterance",
    "attention_layer",
    "attr_cost",
    "binary_f1",
    "block_seed",
    "build_edges",
    "build_graph",
    "build_node_features",
    "cosine_similarity",
    "decide_pairs",
    "ee_ce_heads",
    "encode",
    "evaluate_corpus",
    "fgw_align",
    "fuse_scores",
    "fused_objective",
    "gold_pair_matrix",
    "load_corpus",
    "load_params_blocks",
    "losses",
    "multi_cause_subset",
    "pair_score",
    "per_cause_count_recall",
    "predict_pairs",
    "process_conversation",
    "run_pipeline",
    "score_pairs",
    "seeded_init",
    "sinkhorn",
    "stable_softmax",
    "struct_cost_linearized",
    "struct_loss",
]
