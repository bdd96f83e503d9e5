"""Corpus data model: articles, comments, segmentation, tokenization.

Articles are segmented into paragraphs (blank-line separated) and sentences
(terminal-punctuation runs, closing quotes attached to the preceding
sentence). Sentence indices are global across the article so that positional
indicators like "last sentence" can be resolved without a paragraph context.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional, Sequence

from commentscope.labels import UNDETERMINED, LocationLevel, SemanticLabel


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid gold labels."""


# Sentence terminals: CJK and ASCII full stops, question and exclamation
# marks, plus ellipsis characters. Runs of these are absorbed into one
# sentence boundary so "!?", "..." and "……" do not split.
SENTENCE_TERMINALS = "。！？!?.…"
# Closing quotes / brackets that belong to the sentence they close.
CLOSING_MARKS = "”』」》）\")'"

_CJK_RE = re.compile(r"[㐀-䶿一-鿿]")
_WORD_RE = re.compile(r"[a-z0-9']+")
_RAW_WORD_RE = re.compile(r"[A-Za-z0-9']+|[㐀-䶿一-鿿]")


def _load_stopwords(name: str) -> frozenset[str]:
    text = resources.files("commentscope.data").joinpath(f"stopwords/{name}.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


_STOPWORDS: dict[str, frozenset[str]] = {}


def stopwords(profile: str) -> frozenset[str]:
    """Stop-word set for a language profile ('en', 'zh', or 'auto' = union)."""
    if not _STOPWORDS:
        _STOPWORDS["en"] = _load_stopwords("en")
        _STOPWORDS["zh"] = _load_stopwords("zh")
        _STOPWORDS["auto"] = _STOPWORDS["en"] | _STOPWORDS["zh"]
    return _STOPWORDS[profile]


def detect_profile(text: str) -> str:
    """'zh' when the text contains CJK characters, else 'en'."""
    return "zh" if _CJK_RE.search(text) else "en"


def tokenize(text: str, language_profile: str = "auto") -> list[str]:
    """Tokenize text and drop stop words.

    Latin-script runs become lowercased word tokens. CJK runs become
    overlapping character bigrams plus single characters, so keyword and
    overlap matching work without an external segmenter.
    """
    stops = stopwords(language_profile)
    tokens: list[str] = []
    for run in re.finditer(r"[㐀-䶿一-鿿]+|[A-Za-z0-9']+", text):
        chunk = run.group(0)
        if _CJK_RE.match(chunk):
            for i, ch in enumerate(chunk):
                if ch not in stops:
                    tokens.append(ch)
                if i + 1 < len(chunk):
                    bigram = chunk[i : i + 2]
                    if bigram not in stops:
                        tokens.append(bigram)
        else:
            word = chunk.lower()
            if word not in stops:
                tokens.append(word)
    return tokens


def raw_tokens(text: str) -> list[str]:
    """Word-level tokens without stop-word removal (latin words, CJK chars)."""
    return [m.group(0).lower() for m in _RAW_WORD_RE.finditer(text)]


def _ending_punctuation(text: str) -> Optional[str]:
    stripped = text.rstrip()
    if not stripped:
        return None
    last = stripped[-1]
    if unicodedata.category(last).startswith("P") or last in SENTENCE_TERMINALS:
        return last
    return None


def trailing_punctuation_run(text: str) -> str:
    """Maximal suffix of punctuation symbols of a sentence."""
    stripped = text.rstrip()
    i = len(stripped)
    while i > 0:
        ch = stripped[i - 1]
        if unicodedata.category(ch).startswith("P") or ch in SENTENCE_TERMINALS:
            i -= 1
        else:
            break
    return stripped[i:]


@dataclass(frozen=True)
class Sentence:
    global_index: int
    paragraph_index: int
    text: str
    tokens: tuple[str, ...]
    ending_punctuation: Optional[str]


@dataclass(frozen=True)
class Paragraph:
    index: int
    sentences: tuple[Sentence, ...]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class SegmentedArticle:
    id: str
    title: str
    body: str
    paragraphs: tuple[Paragraph, ...]

    @property
    def paragraph_count(self) -> int:
        return len(self.paragraphs)

    @property
    def sentence_count(self) -> int:
        return sum(len(p.sentences) for p in self.paragraphs)

    def sentences(self) -> Iterator[Sentence]:
        for p in self.paragraphs:
            yield from p.sentences

    def sentence(self, global_index: int) -> Sentence:
        for p in self.paragraphs:
            for s in p.sentences:
                if s.global_index == global_index:
                    return s
        raise IndexError(f"no sentence with global index {global_index}")

    def paragraph(self, index: int) -> Paragraph:
        if not 1 <= index <= len(self.paragraphs):
            raise IndexError(f"no paragraph with index {index}")
        return self.paragraphs[index - 1]


@dataclass(frozen=True)
class CommentSentence:
    index: int
    text: str
    tokens: tuple[str, ...]
    ending_punctuation: Optional[str]


@dataclass(frozen=True)
class GoldLabel:
    semantic: SemanticLabel
    level: LocationLevel
    indices: frozenset[int]


@dataclass(frozen=True)
class Comment:
    id: str
    text: str
    likes: int
    replies: int
    sentences: tuple[CommentSentence, ...]
    gold: Optional[GoldLabel] = None


def _split_sentence_spans(text: str) -> list[tuple[int, int]]:
    """Tile the paragraph text with sentence spans (every char in one span)."""
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in SENTENCE_TERMINALS:
            j = i + 1
            while j < n and text[j] in SENTENCE_TERMINALS:
                j += 1
            while j < n and text[j] in CLOSING_MARKS:
                j += 1
            spans.append((start, j))
            start = j
            i = j
        else:
            i += 1
    if start < n:
        spans.append((start, n))
    return spans


def segment_text(body: str, language_profile: str = "auto") -> list[Paragraph]:
    """Split a body into indexed paragraphs and globally indexed sentences."""
    if not body.strip():
        raise CorpusError("empty body")
    blocks = [b for b in re.split(r"\n\s*\n", body.strip()) if b.strip()]
    paragraphs: list[Paragraph] = []
    global_index = 0
    for p_idx, block in enumerate(blocks, start=1):
        flat = re.sub(r"\s*\n\s*", " ", block.strip())
        sentences: list[Sentence] = []
        for s_start, s_end in _split_sentence_spans(flat):
            text = flat[s_start:s_end].strip()
            if not text:
                continue
            global_index += 1
            sentences.append(
                Sentence(
                    global_index=global_index,
                    paragraph_index=p_idx,
                    text=text,
                    tokens=tuple(tokenize(text, language_profile)),
                    ending_punctuation=_ending_punctuation(text),
                )
            )
        paragraphs.append(Paragraph(index=p_idx, sentences=tuple(sentences)))
    return paragraphs


def segment_comment(text: str, language_profile: str = "auto") -> tuple[CommentSentence, ...]:
    """Split a comment into its sentence sequence with the same tokenization."""
    flat = re.sub(r"\s+", " ", text.strip())
    if not flat:
        return ()
    out: list[CommentSentence] = []
    for i, (start, end) in enumerate(_split_sentence_spans(flat), start=1):
        chunk = flat[start:end].strip()
        if not chunk:
            continue
        out.append(
            CommentSentence(
                index=len(out) + 1,
                text=chunk,
                tokens=tuple(tokenize(chunk, language_profile)),
                ending_punctuation=_ending_punctuation(chunk),
            )
        )
    return tuple(out)


def _parse_gold(raw: dict, article: SegmentedArticle, comment_id: str) -> GoldLabel:
    try:
        semantic = SemanticLabel(raw["semantic"])
        level = LocationLevel(raw["level"])
    except (KeyError, ValueError) as exc:
        raise CorpusError(f"comment {comment_id}: malformed gold label: {exc}") from exc
    indices = frozenset(int(i) for i in raw.get("indices", []))
    if level is LocationLevel.GLOBAL:
        if indices:
            raise CorpusError(f"comment {comment_id}: global gold label must have empty indices")
    else:
        if not indices:
            raise CorpusError(f"comment {comment_id}: gold label needs indices for level {level.value}")
        limit = article.sentence_count if level is LocationLevel.SENTENCE else article.paragraph_count
        for idx in indices:
            if not 1 <= idx <= limit:
                raise CorpusError(f"comment {comment_id}: gold index out of range: {idx}")
    return GoldLabel(semantic=semantic, level=level, indices=indices)


def build_comment(
    comment_id: str,
    text: str,
    likes: int = 0,
    replies: int = 0,
    gold: Optional[GoldLabel] = None,
    language_profile: str = "auto",
) -> Comment:
    if likes < 0 or replies < 0:
        raise CorpusError(f"comment {comment_id}: likes/replies must be non-negative")
    return Comment(
        id=comment_id,
        text=text,
        likes=likes,
        replies=replies,
        sentences=segment_comment(text, language_profile),
        gold=gold,
    )


def load_corpus(path: str | Path) -> tuple[SegmentedArticle, list[Comment]]:
    """Load a Corpus JSON file and segment its article and comments."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"missing file: {path}")
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed corpus file {path}: {exc}") from exc
    return parse_corpus(raw)


def parse_corpus(raw: dict) -> tuple[SegmentedArticle, list[Comment]]:
    try:
        art = raw["article"]
        body = art["body"]
        article = SegmentedArticle(
            id=str(art["id"]),
            title=str(art.get("title", "")),
            body=body,
            paragraphs=tuple(segment_text(body)),
        )
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed article block: {exc}") from exc

    comments: list[Comment] = []
    seen: set[str] = set()
    for entry in raw.get("comments", []):
        try:
            cid = str(entry["id"])
            text = str(entry["text"])
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"malformed comment entry: {exc}") from exc
        if cid in seen:
            raise CorpusError(f"duplicate comment id: {cid}")
        seen.add(cid)
        gold = _parse_gold(entry["gold"], article, cid) if entry.get("gold") else None
        comments.append(
            build_comment(
                cid,
                text,
                likes=int(entry.get("likes", 0)),
                replies=int(entry.get("replies", 0)),
                gold=gold,
            )
        )
    return article, comments


def serialize_corpus(article: SegmentedArticle, comments: Sequence[Comment]) -> dict:
    """Inverse of parse_corpus for round-tripping."""
    out_comments = []
    for c in comments:
        entry: dict = {"id": c.id, "text": c.text, "likes": c.likes, "replies": c.replies}
        if c.gold is not None:
            entry["gold"] = {
                "semantic": c.gold.semantic.value,
                "level": c.gold.level.value,
                "indices": sorted(c.gold.indices),
            }
        out_comments.append(entry)
    return {
        "article": {"id": article.id, "title": article.title, "body": article.body},
        "comments": out_comments,
    }
