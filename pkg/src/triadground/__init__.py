"""Weakly-supervised referring-expression grounding.

Queries arrive as dependency parses and are converted into discriminative
triads (target, reference, cue).  Three attention scorers match triads to
proposal pairs; training reconstructs the triad's word embeddings from
attention-aggregated features, so no grounding labels are needed.  The
synthetic scene generator plants brute-force-checkable structure, which
is how the weak supervision is verified end to end.
"""

__version__ = "0.1.0"

from .corpus_io import (
    DependencyParse,
    DependencyToken,
    EmbeddingTable,
    load_checkpoint,
    load_embeddings,
    random_embeddings,
    read_parses,
    save_checkpoint,
    write_parses,
)
from .grounding import GroundingResult, ScoreWeights, evaluate, ground, iou
from .model import ModelConfig, ModelParams
from .scenes import (
    Box,
    GenConfig,
    Proposal,
    Scene,
    SceneVocabulary,
    generate_scene,
    generate_scenes,
    load_scenes,
    pair_feature,
    spatial_feature,
    write_scenes,
)
from .training import AblationConfig, TrainConfig, ablate, train
from .triads import DiscriminativeTriad, ParsedQuery, extract_triads, triads_to_embeddings

__all__ = [
    "AblationConfig",
    "Box",
    "DependencyParse",
    "DependencyToken",
    "DiscriminativeTriad",
    "EmbeddingTable",
    "GenConfig",
    "GroundingResult",
    "ModelConfig",
    "ModelParams",
    "ParsedQuery",
    "Proposal",
    "Scene",
    "SceneVocabulary",
    "ScoreWeights",
    "TrainConfig",
    "ablate",
    "evaluate",
    "extract_triads",
    "generate_scene",
    "generate_scenes",
    "ground",
    "iou",
    "load_checkpoint",
    "load_embeddings",
    "load_scenes",
    "pair_feature",
    "random_embeddings",
    "read_parses",
    "save_checkpoint",
    "spatial_feature",
    "train",
    "triads_to_embeddings",
    "write_parses",
    "write_scenes",
]
