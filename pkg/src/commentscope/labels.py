"""Label vocabularies shared across the pipeline."""

from __future__ import annotations

from enum import Enum

#: Sentinel string used wherever neither rules nor the judge can commit.
UNDETERMINED = "Undetermined"


class SemanticLabel(str, Enum):
    """Pragmatic function of a comment."""

    STATEMENT = "Statement"
    QUESTION = "Question"
    EXCLAMATION = "Exclamation"
    SUGGESTION = "Suggestion"
    SARCASM = "Sarcasm"


class LocationLevel(str, Enum):
    """Granularity of the article span a comment refers to."""

    SENTENCE = "SentenceLevel"
    PARAGRAPH = "ParagraphLevel"
    GLOBAL = "GlobalLevel"


ALL_SEMANTIC_LABELS = frozenset(SemanticLabel)
ALL_LOCATION_LEVELS = frozenset(LocationLevel)
