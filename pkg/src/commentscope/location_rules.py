"""Rule-stage location classification.

Three stages, executed in priority order and stopping at the first that
yields candidates: positional indicator words, original-citation matching,
and entity matching. Output is the candidate anchor set handed to the LLM
verification step.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from commentscope.corpus import (
    Comment,
    SegmentedArticle,
    raw_tokens,
    tokenize,
)
from commentscope.labels import LocationLevel
from commentscope.similarity import EmbeddingProvider, cosine, keyword_overlap

logger = logging.getLogger(__name__)

_CJK_RE = re.compile(r"[㐀-䶿一-鿿]")

_EN_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
    "1st": 1, "2nd": 2, "3rd": 3, "4th": 4, "5th": 5,
    "6th": 6, "7th": 7, "8th": 8, "9th": 9, "10th": 10,
}
_ZH_DIGITS = {"一": 1, "二": 2, "三": 3, "四": 4, "五": 5, "六": 6, "七": 7, "八": 8, "九": 9, "两": 2}

_EN_NUM_PATTERN = r"(\d+|" + "|".join(_EN_NUMBER_WORDS) + r")"
_ZH_NUM_PATTERN = r"([0-9一二三四五六七八九十两]+)"


def parse_number(token: str) -> Optional[int]:
    """Parse an Arabic, English ordinal/cardinal, or Chinese numeral."""
    token = token.strip().lower()
    if token.isdigit():
        return int(token)
    if token in _EN_NUMBER_WORDS:
        return _EN_NUMBER_WORDS[token]
    if _CJK_RE.search(token) or token in _ZH_DIGITS:
        # Chinese numerals up to 99: [X]十[Y], plain digits, or single chars.
        if "十" in token:
            tens, _, units = token.partition("十")
            t = _ZH_DIGITS.get(tens, 1) if tens else 1
            u = _ZH_DIGITS.get(units, 0) if units else 0
            return t * 10 + u
        value = 0
        for ch in token:
            if ch.isdigit():
                value = value * 10 + int(ch)
            elif ch in _ZH_DIGITS:
                value = value * 10 + _ZH_DIGITS[ch]
            else:
                return None
        return value or None
    return None


@dataclass(frozen=True)
class IndicatorPattern:
    phrase: str
    resolve: str  # "n" | "ordinal" | "first" | "last" | "last-n"

    def compiled(self) -> re.Pattern:
        esc = re.escape(self.phrase)
        num = _ZH_NUM_PATTERN if _CJK_RE.search(self.phrase) else _EN_NUM_PATTERN
        esc = esc.replace(re.escape("{n}"), num)
        if _CJK_RE.search(self.phrase):
            return re.compile(esc)
        return re.compile(r"(?<![a-z0-9])" + esc + r"(?![a-z0-9])", re.IGNORECASE)


@dataclass(frozen=True)
class SpanPattern:
    phrase: str
    section: str  # "beginning" | "middle" | "ending"


@dataclass(frozen=True)
class IndicatorTable:
    sentence: tuple[IndicatorPattern, ...]
    paragraph: tuple[IndicatorPattern, ...]
    global_words: tuple[str, ...]
    ambiguous: tuple[str, ...]
    spans: tuple[SpanPattern, ...]
    loc_threshold: float = 0.65
    overlap_threshold: float = 0.7


def load_indicator_table(path: Optional[str | Path] = None) -> IndicatorTable:
    """Load an indicator table JSON file; None loads the bundled default."""
    if path is None:
        raw = json.loads(
            resources.files("commentscope.data").joinpath("indicators_default.json").read_text("utf-8")
        )
    else:
        raw = json.loads(Path(path).read_text("utf-8"))
    return IndicatorTable(
        sentence=tuple(IndicatorPattern(e["phrase"], e["resolve"]) for e in raw.get("sentence", [])),
        paragraph=tuple(IndicatorPattern(e["phrase"], e["resolve"]) for e in raw.get("paragraph", [])),
        global_words=tuple(raw.get("global", [])),
        ambiguous=tuple(raw.get("ambiguous", [])),
        spans=tuple(SpanPattern(e["phrase"], e["section"]) for e in raw.get("span", [])),
        loc_threshold=float(raw.get("loc_threshold", 0.65)),
        overlap_threshold=float(raw.get("overlap_threshold", 0.7)),
    )


@dataclass
class LocationEvidence:
    rule: str
    cue: str
    level: LocationLevel
    indices: frozenset[int]


@dataclass
class LocationCandidates:
    anchors: dict[LocationLevel, frozenset[int]] = field(default_factory=dict)
    evidence: list[LocationEvidence] = field(default_factory=list)

    def add(self, level: LocationLevel, indices: frozenset[int], ev: LocationEvidence) -> None:
        if level is LocationLevel.GLOBAL:
            indices = frozenset()
        current = self.anchors.get(level, frozenset())
        self.anchors[level] = current | indices
        self.evidence.append(ev)

    @property
    def empty(self) -> bool:
        return not self.anchors

    def validate(self, article: SegmentedArticle) -> None:
        for level, indices in self.anchors.items():
            if level is LocationLevel.GLOBAL:
                assert not indices, "global anchors carry no indices"
                continue
            assert indices, f"{level.value} anchor without indices"
            limit = article.sentence_count if level is LocationLevel.SENTENCE else article.paragraph_count
            for idx in indices:
                assert 1 <= idx <= limit, f"index {idx} out of range for {level.value}"


def resolve_ambiguous_span(section: str, article: SegmentedArticle) -> frozenset[int]:
    """Map a vague span word to contiguous paragraph thirds.

    Paragraphs are split into three contiguous sections of (near-)equal size,
    distributing any remainder to the front sections first. Articles with
    fewer than three paragraphs degenerate to beginning={1}, ending={last},
    middle=all.
    """
    n = article.paragraph_count
    if n < 3:
        if section == "beginning":
            return frozenset({1})
        if section == "ending":
            return frozenset({n})
        return frozenset(range(1, n + 1))
    base, rem = divmod(n, 3)
    sizes = [base + (1 if i < rem else 0) for i in range(3)]
    starts = [1, 1 + sizes[0], 1 + sizes[0] + sizes[1]]
    idx = {"beginning": 0, "middle": 1, "ending": 2}[section]
    return frozenset(range(starts[idx], starts[idx] + sizes[idx]))


def _resolve_indicator(pattern: IndicatorPattern, match: re.Match, last_index: int) -> Optional[int]:
    if pattern.resolve == "first":
        return 1
    if pattern.resolve == "last":
        return last_index
    if pattern.resolve in ("n", "ordinal", "last-n"):
        num = parse_number(match.group(1)) if match.groups() else None
        if num is None or num < 1:
            return None
        if pattern.resolve == "last-n":
            return last_index - (num - 1)
        return num
    return None


def match_indicators(
    c: Comment,
    article: SegmentedArticle,
    ind: IndicatorTable,
    provider: EmbeddingProvider,
) -> LocationCandidates:
    """Keyword-priority positional matching with an embedding fallback.

    Explicit numeric/positional indicators resolve directly to indices; vague
    span words resolve to paragraph thirds; global words mark the whole
    article; ambiguous tail words produce both last-sentence and
    last-paragraph candidates. Only when no indicator matched at all is the
    comment compared against every sentence and paragraph by embedding
    similarity.
    """
    out = LocationCandidates()
    text = c.text
    n_sent = article.sentence_count
    n_para = article.paragraph_count

    for pattern in ind.sentence:
        for m in pattern.compiled().finditer(text):
            idx = _resolve_indicator(pattern, m, n_sent)
            if idx is not None and 1 <= idx <= n_sent:
                out.add(
                    LocationLevel.SENTENCE,
                    frozenset({idx}),
                    LocationEvidence("indicator", m.group(0), LocationLevel.SENTENCE, frozenset({idx})),
                )
    # Span words are matched before single-paragraph indicators so that
    # e.g. "ending paragraphs" is not also consumed as "ending paragraph".
    span_hits: list[re.Match] = []
    for span in ind.spans:
        pat = (
            re.compile(re.escape(span.phrase))
            if _CJK_RE.search(span.phrase)
            else re.compile(r"(?<![a-z0-9])" + re.escape(span.phrase) + r"(?![a-z0-9])", re.IGNORECASE)
        )
        for m in pat.finditer(text):
            span_hits.append(m)
            indices = resolve_ambiguous_span(span.section, article)
            out.add(
                LocationLevel.PARAGRAPH,
                indices,
                LocationEvidence("indicator_span", m.group(0), LocationLevel.PARAGRAPH, indices),
            )
    covered = [(m.start(), m.end()) for m in span_hits]
    for pattern in ind.paragraph:
        for m in pattern.compiled().finditer(text):
            if any(s <= m.start() and m.end() <= e for s, e in covered):
                continue
            idx = _resolve_indicator(pattern, m, n_para)
            if idx is not None and 1 <= idx <= n_para:
                out.add(
                    LocationLevel.PARAGRAPH,
                    frozenset({idx}),
                    LocationEvidence("indicator", m.group(0), LocationLevel.PARAGRAPH, frozenset({idx})),
                )
    for word in ind.global_words:
        pat = (
            re.compile(re.escape(word))
            if _CJK_RE.search(word)
            else re.compile(r"(?<![a-z0-9])" + re.escape(word) + r"(?![a-z0-9])", re.IGNORECASE)
        )
        if pat.search(text):
            out.add(
                LocationLevel.GLOBAL,
                frozenset(),
                LocationEvidence("indicator_global", word, LocationLevel.GLOBAL, frozenset()),
            )
            break
    for word in ind.ambiguous:
        pat = (
            re.compile(re.escape(word))
            if _CJK_RE.search(word)
            else re.compile(r"(?<![a-z0-9])" + re.escape(word) + r"(?![a-z0-9])", re.IGNORECASE)
        )
        if pat.search(text):
            out.add(
                LocationLevel.SENTENCE,
                frozenset({n_sent}),
                LocationEvidence("indicator_ambiguous", word, LocationLevel.SENTENCE, frozenset({n_sent})),
            )
            out.add(
                LocationLevel.PARAGRAPH,
                frozenset({n_para}),
                LocationEvidence("indicator_ambiguous", word, LocationLevel.PARAGRAPH, frozenset({n_para})),
            )
            break

    if out.empty:
        comment_vec = provider.embed(c.text)
        sent_hits = frozenset(
            s.global_index
            for s in article.sentences()
            if cosine(comment_vec, provider.embed(s.text)) > ind.loc_threshold
        )
        if sent_hits:
            out.add(
                LocationLevel.SENTENCE,
                sent_hits,
                LocationEvidence("indicator_similarity", c.text, LocationLevel.SENTENCE, sent_hits),
            )
        para_hits = frozenset(
            p.index
            for p in article.paragraphs
            if cosine(comment_vec, provider.embed(p.text)) > ind.loc_threshold
        )
        if para_hits:
            out.add(
                LocationLevel.PARAGRAPH,
                para_hits,
                LocationEvidence("indicator_similarity", c.text, LocationLevel.PARAGRAPH, para_hits),
            )
    out.validate(article)
    return out


_QUOTE_RE = re.compile(r"“([^”]+)”|\"([^\"]+)\"|『([^』]+)』|「([^」]+)」")


def _implicit_fragments(text: str, min_tokens: int = 5) -> list[str]:
    """Maximal punctuation-free token runs of at least `min_tokens` tokens.

    Runs use the raw token stream (stop words kept) because quoted article
    fragments usually contain stop words.
    """
    fragments = []
    for piece in re.split(r"[,;:!?。！？；：，、()（）\[\]]", text):
        piece = piece.strip().strip(".").strip()
        if len(raw_tokens(piece)) >= min_tokens:
            fragments.append(piece)
    return fragments


def match_citation(
    c: Comment,
    article: SegmentedArticle,
    ind: IndicatorTable,
    provider: EmbeddingProvider,
) -> LocationCandidates:
    """Match quoted or long verbatim fragments against article sentences.

    Explicit candidates are spans inside quotation marks; implicit candidates
    are token runs of at least five words. Each candidate is compared to every
    sentence first by keyword overlap, then by embedding similarity.
    """
    out = LocationCandidates()
    explicit = [next(g for g in m.groups() if g) for m in _QUOTE_RE.finditer(c.text)]
    fragments = explicit if explicit else _implicit_fragments(c.text)
    for frag in fragments:
        frag_tokens = tokenize(frag)
        frag_vec = None
        for s in article.sentences():
            overlap = keyword_overlap(frag_tokens, s.tokens)
            matched = overlap >= ind.overlap_threshold
            if not matched:
                if frag_vec is None:
                    frag_vec = provider.embed(frag)
                matched = cosine(frag_vec, provider.embed(s.text)) > ind.loc_threshold
            if matched:
                out.add(
                    LocationLevel.SENTENCE,
                    frozenset({s.global_index}),
                    LocationEvidence(
                        "citation", frag, LocationLevel.SENTENCE, frozenset({s.global_index})
                    ),
                )
    out.validate(article)
    return out


@dataclass(frozen=True)
class Entity:
    surface: str
    kind: str  # person | location | organization | event | temporal
    occurrences: tuple[tuple[int, int], ...] = ()  # (paragraph_index, sentence_global_index)


ENTITY_KINDS = frozenset({"person", "location", "organization", "event", "temporal"})


def locate_entity(surface: str, article: SegmentedArticle) -> tuple[tuple[int, int], ...]:
    """All (paragraph, sentence) positions whose text contains the surface."""
    occ = []
    low = surface.lower()
    for s in article.sentences():
        if low in s.text.lower():
            occ.append((s.paragraph_index, s.global_index))
    return tuple(occ)


def extract_article_entities(article: SegmentedArticle, judge) -> list[Entity]:
    """Article-side entity extraction via the LLM judge, with occurrences.

    Judge failures degrade to an empty list (entity matching silently
    skipped). Callers should cache the result per article.
    """
    try:
        raw_entities = judge.extract_entities(article.body)
    except Exception as exc:  # transport/parse exhaustion
        logger.warning("article entity extraction failed, skipping entity matching: %s", exc)
        return []
    out = []
    for ent in raw_entities:
        occurrences = locate_entity(ent.surface, article)
        if occurrences:
            out.append(Entity(surface=ent.surface, kind=ent.kind, occurrences=occurrences))
    return out


def _entities_match(a: Entity, b: Entity, provider: EmbeddingProvider, ind: IndicatorTable) -> bool:
    sa, sb = a.surface.lower(), b.surface.lower()
    if sa in sb or sb in sa:
        return True
    if keyword_overlap(tokenize(a.surface), tokenize(b.surface)) >= ind.overlap_threshold:
        return True
    return cosine(provider.embed(a.surface), provider.embed(b.surface)) > ind.loc_threshold


def match_entities(
    c: Comment,
    comment_entities: list[Entity],
    article_entities: list[Entity],
    article: SegmentedArticle,
    ind: IndicatorTable,
    provider: EmbeddingProvider,
) -> LocationCandidates:
    """Anchor a comment through shared named entities.

    The level is chosen from the distribution of all matched occurrences:
    one sentence -> that sentence; one paragraph -> that paragraph; spread
    over at least 30% of paragraphs -> global; otherwise paragraph-level over
    the occurrence paragraphs.
    """
    import math

    out = LocationCandidates()
    occurrences: set[tuple[int, int]] = set()
    matched_surfaces: list[str] = []
    for ce in comment_entities:
        for ae in article_entities:
            if _entities_match(ce, ae, provider, ind):
                occurrences.update(ae.occurrences)
                matched_surfaces.append(ae.surface)
    if not occurrences:
        return out
    sentences = {s for _, s in occurrences}
    paragraphs = {p for p, _ in occurrences}
    cue = ", ".join(sorted(set(matched_surfaces)))
    if len(sentences) == 1:
        idx = frozenset(sentences)
        out.add(LocationLevel.SENTENCE, idx, LocationEvidence("entity", cue, LocationLevel.SENTENCE, idx))
    elif len(paragraphs) == 1:
        idx = frozenset(paragraphs)
        out.add(LocationLevel.PARAGRAPH, idx, LocationEvidence("entity", cue, LocationLevel.PARAGRAPH, idx))
    elif len(paragraphs) >= math.ceil(0.3 * article.paragraph_count):
        out.add(LocationLevel.GLOBAL, frozenset(), LocationEvidence("entity", cue, LocationLevel.GLOBAL, frozenset()))
    else:
        idx = frozenset(paragraphs)
        out.add(LocationLevel.PARAGRAPH, idx, LocationEvidence("entity", cue, LocationLevel.PARAGRAPH, idx))
    out.validate(article)
    return out


def classify_rules_location(
    c: Comment,
    article: SegmentedArticle,
    ind: IndicatorTable,
    provider: EmbeddingProvider,
    judge=None,
    article_entities: Optional[list[Entity]] = None,
) -> LocationCandidates:
    """Run the three rule stages in priority order, stopping at the first hit.

    Entity matching needs the LLM for extraction; with no judge configured
    (rule-only strategy) that stage is skipped.
    """
    candidates = match_indicators(c, article, ind, provider)
    if not candidates.empty:
        return candidates
    candidates = match_citation(c, article, ind, provider)
    if not candidates.empty:
        return candidates
    if judge is None:
        return LocationCandidates()
    if article_entities is None:
        article_entities = extract_article_entities(article, judge)
    if not article_entities:
        return LocationCandidates()
    try:
        comment_entities = judge.extract_entities(c.text)
    except Exception as exc:
        logger.warning("comment entity extraction failed for %s: %s", c.id, exc)
        return LocationCandidates()
    return match_entities(c, comment_entities, article_entities, article, ind, provider)
