"""Aspect-based sentiment indices from policy meeting minutes."""

from ._core import (
    MAX_SENTENCE_WORDS,
    MIN_SENTENCE_WORDS,
    SENTIMENT_LABELS,
    ConfigError,
    EmbeddingError,
    InputError,
    MacroSpec,
    MissingArtifactError,
    NumericError,
    Pipeline,
    PipelineConfig,
    WordPieceTokenizer,
    __version__,
    basic_tokenize,
    classify_aspect,
    cosine_similarity,
    distribution_entropy,
    model_backend_available,
    ols_fit,
    predict_sentiment,
    preprocess_sentence,
    segment_document,
    softmax,
    student_t_cdf,
    student_t_two_sided_p,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
