"""Rule-stage semantic classification.

Produces candidate pragmatic labels per comment by layered matching:
trailing-symbol cues, keyword and sarcasm-contrast cues, then embedding
similarity for sentences the earlier layers left unlabeled. Per-sentence
candidates are merged and deduplicated into the comment's candidate set.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from commentscope.corpus import Comment, CommentSentence, detect_profile, trailing_punctuation_run
from commentscope.labels import SemanticLabel
from commentscope.similarity import EmbeddingProvider, cosine


@dataclass(frozen=True)
class CueTable:
    symbols: dict[SemanticLabel, frozenset[str]]
    keywords: dict[SemanticLabel, tuple[str, ...]]
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    semantic_threshold: float = 0.6

    def __post_init__(self):
        if set(self.positive) & set(self.negative):
            raise ValueError("positive and negative sentiment cue sets must be disjoint")
        if not 0.0 < self.semantic_threshold < 1.0:
            raise ValueError("semantic_threshold must be in (0,1)")


@dataclass
class Evidence:
    rule: str
    cue: str
    sentence_index: int


@dataclass
class SemanticCandidates:
    labels: set[SemanticLabel] = field(default_factory=set)
    evidence: dict[SemanticLabel, list[Evidence]] = field(default_factory=dict)

    def add(self, label: SemanticLabel, ev: Evidence) -> None:
        self.labels.add(label)
        self.evidence.setdefault(label, []).append(ev)


def load_cue_table(path: Optional[str | Path] = None) -> CueTable:
    """Load a cue table JSON file; None loads the bundled bilingual default."""
    if path is None:
        raw = json.loads(
            resources.files("commentscope.data").joinpath("cues_default.json").read_text("utf-8")
        )
    else:
        raw = json.loads(Path(path).read_text("utf-8"))
    return CueTable(
        symbols={SemanticLabel(k): frozenset(v) for k, v in raw.get("symbols", {}).items()},
        keywords={SemanticLabel(k): tuple(v) for k, v in raw.get("keywords", {}).items()},
        positive=tuple(raw.get("positive", [])),
        negative=tuple(raw.get("negative", [])),
        semantic_threshold=float(raw.get("semantic_threshold", 0.6)),
    )


_CJK_RE = re.compile(r"[㐀-䶿一-鿿]")


def cue_in_text(cue: str, text: str) -> bool:
    """Keyword containment: word-boundary match for latin cues, substring for CJK."""
    if _CJK_RE.search(cue):
        return cue in text
    return re.search(r"(?<![a-z0-9])" + re.escape(cue.lower()) + r"(?![a-z0-9])", text.lower()) is not None


def match_symbols(s: CommentSentence, cues: CueTable) -> set[SemanticLabel]:
    """Labels whose symbol set intersects the sentence's trailing punctuation run."""
    run = trailing_punctuation_run(s.text)
    hits: set[SemanticLabel] = set()
    for label, symbols in cues.symbols.items():
        if any(ch in symbols for ch in run):
            hits.add(label)
    return hits


def match_keywords(s: CommentSentence, cues: CueTable) -> set[SemanticLabel]:
    hits: set[SemanticLabel] = set()
    for label, words in cues.keywords.items():
        if any(cue_in_text(w, s.text) for w in words):
            hits.add(label)
    return hits


def match_sarcasm(s: CommentSentence, cues: CueTable) -> Optional[SemanticLabel]:
    """Sarcasm fires only on a positive-sentiment + negative-context contrast."""
    has_pos = any(cue_in_text(w, s.text) for w in cues.positive)
    has_neg = any(cue_in_text(w, s.text) for w in cues.negative)
    if has_pos and has_neg:
        return SemanticLabel.SARCASM
    return None


def match_semantic(
    s: CommentSentence, cues: CueTable, provider: EmbeddingProvider
) -> set[SemanticLabel]:
    """Labels whose keyword set contains an embedding-similar keyword.

    For each label the sentence is compared against every keyword; the label
    is included when the maximum cosine exceeds the configured threshold.
    """
    if not s.text.strip():
        return set()
    sent_vec = provider.embed(s.text)
    hits: set[SemanticLabel] = set()
    for label, words in cues.keywords.items():
        best = 0.0
        for w in words:
            best = max(best, cosine(sent_vec, provider.embed(w)))
            if best > cues.semantic_threshold:
                break
        if best > cues.semantic_threshold:
            hits.add(label)
    return hits


def classify_rules_semantic(
    c: Comment, cues: CueTable, provider: EmbeddingProvider
) -> SemanticCandidates:
    """Union of all matchers over the comment's sentences, layered.

    Symbol matching runs first; keyword and sarcasm-contrast matching run for
    sentences not captured by symbols; embedding similarity only for sentences
    that produced no label in either earlier layer.
    """
    out = SemanticCandidates()
    for s in c.sentences:
        symbol_hits = match_symbols(s, cues)
        for label in symbol_hits:
            out.add(label, Evidence("symbol", trailing_punctuation_run(s.text), s.index))
        layer2: set[SemanticLabel] = set()
        if not symbol_hits:
            keyword_hits = match_keywords(s, cues)
            for label in keyword_hits:
                out.add(label, Evidence("keyword", _first_keyword_hit(s, cues, label), s.index))
            sarcasm = match_sarcasm(s, cues)
            if sarcasm is not None:
                out.add(sarcasm, Evidence("sarcasm_contrast", s.text, s.index))
            layer2 = keyword_hits | ({sarcasm} if sarcasm else set())
        if not symbol_hits and not layer2:
            for label in match_semantic(s, cues, provider):
                out.add(label, Evidence("semantic", s.text, s.index))
    return out


def _first_keyword_hit(s: CommentSentence, cues: CueTable, label: SemanticLabel) -> str:
    for w in cues.keywords.get(label, ()):
        if cue_in_text(w, s.text):
            return w
    return ""
