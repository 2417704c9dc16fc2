"""Exception hierarchy shared across the pipeline."""


class SkillexError(Exception):
    """Base class for all errors raised by this package."""

    category = "general"


class CorpusFormatError(SkillexError):
    """Malformed corpus input (bad JSONL line, duplicate document id)."""

    category = "corpus"


class VectorFormatError(SkillexError):
    """Malformed word-vector file."""

    category = "vectors"


class EmbeddingError(SkillexError):
    """A text piece could not be embedded (e.g. every token out of vocabulary)."""

    category = "embedding"


class TrainingError(SkillexError):
    """Invalid training setup (empty pool, single-class data)."""

    category = "training"


class PipelineOrderError(SkillexError):
    """A pipeline stage was invoked before its prerequisites were produced."""

    category = "pipeline"


class EvaluationError(SkillexError):
    """Invalid evaluation input (unknown document id, bad spans)."""

    category = "evaluation"
