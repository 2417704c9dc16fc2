"""Quality phrase mining: features, ensemble quality model, segmentation."""

from .features import (FEATURE_NAMES, OccurrenceContext, PhraseCandidate,
                       PhraseFeatures, best_split, collect_occurrence_contexts,
                       compute_features, extract_candidates, load_phrase_list,
                       load_stopwords, pkl, pmi)
from .mine import (MinerConfig, MiningResult, mine_phrases, read_phrases_tsv,
                   rectify_and_retrain, run_mining, write_phrases_tsv)
from .quality import (DecisionTree, QualityModel, split_pools,
                      train_quality_model)
from .segmentation import (KERNEL, OOV_PROB, ScoreTable, SegmentationResult,
                           pos_tag_profile, segment_sentence)

__all__ = [
    "FEATURE_NAMES",
    "KERNEL",
    "OOV_PROB",
    "DecisionTree",
    "MinerConfig",
    "MiningResult",
    "OccurrenceContext",
    "PhraseCandidate",
    "PhraseFeatures",
    "QualityModel",
    "ScoreTable",
    "SegmentationResult",
    "best_split",
    "collect_occurrence_contexts",
    "compute_features",
    "extract_candidates",
    "load_phrase_list",
    "load_stopwords",
    "mine_phrases",
    "pkl",
    "pmi",
    "pos_tag_profile",
    "read_phrases_tsv",
    "rectify_and_retrain",
    "run_mining",
    "segment_sentence",
    "split_pools",
    "train_quality_model",
    "write_phrases_tsv",
]
