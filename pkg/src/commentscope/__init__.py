"""CommentScope: anchor article comments to the text they talk about.

The package implements a two-axis comment classifier (pragmatic function and
anchor location) built as rule filtering followed by LLM judgment, plus the
machinery around it: corpus loading and segmentation, similarity primitives,
an evaluation harness, and an HTTP service feeding the reader UI.
"""

from commentscope.corpus import (
    Comment,
    CommentSentence,
    CorpusError,
    GoldLabel,
    Paragraph,
    SegmentedArticle,
    Sentence,
    load_corpus,
    segment_text,
    tokenize,
)
from commentscope.labels import (
    UNDETERMINED,
    LocationLevel,
    SemanticLabel,
)

__all__ = [
    "Comment",
    "CommentSentence",
    "CorpusError",
    "GoldLabel",
    "LocationLevel",
    "Paragraph",
    "SegmentedArticle",
    "SemanticLabel",
    "Sentence",
    "UNDETERMINED",
    "load_corpus",
    "segment_text",
    "tokenize",
]
