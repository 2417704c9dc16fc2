"""skillex: occupational skill detection from job listings.

Four-layer pipeline: quality phrase mining, SIF text embedding, cosine
ranking against the requirements section, and a small neural classifier.
"""

from .corpus import (CorpusStats, Document, Ngram, Section, Token,
                     TokenizedSentence, count_ngrams, load_corpus, popularity,
                     save_corpus, tokenize_corpus)
from .errors import (CorpusFormatError, EmbeddingError, EvaluationError,
                     PipelineOrderError, SkillexError, TrainingError,
                     VectorFormatError)

__version__ = "0.1.0"

__all__ = [
    "CorpusFormatError",
    "CorpusStats",
    "Document",
    "EmbeddingError",
    "EvaluationError",
    "Ngram",
    "PipelineOrderError",
    "Section",
    "SkillexError",
    "Token",
    "TokenizedSentence",
    "TrainingError",
    "VectorFormatError",
    "__version__",
    "count_ngrams",
    "load_corpus",
    "popularity",
    "save_corpus",
    "tokenize_corpus",
]
