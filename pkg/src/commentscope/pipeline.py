"""End-to-end hybrid classification and annotated-document assembly.

`run_pipeline` classifies every comment on both axes under one of three
strategies (rule-only, LLM-only, hybrid); `assemble_document` turns the
results into the location-grouped structure the reader UI consumes;
`apply_filters` produces filtered views without mutating the document.
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from commentscope.config import Config, make_chat_provider, make_embedder
from commentscope.corpus import Comment, SegmentedArticle
from commentscope.judge import (
    Anchor,
    ChatParseError,
    ChatProvider,
    ChatTransportError,
    Judge,
)
from commentscope.labels import (
    ALL_SEMANTIC_LABELS,
    UNDETERMINED,
    LocationLevel,
    SemanticLabel,
)
from commentscope.location_rules import (
    Entity,
    IndicatorTable,
    classify_rules_location,
    extract_article_entities,
    load_indicator_table,
)
from commentscope.semantic_rules import CueTable, classify_rules_semantic, load_cue_table
from commentscope.similarity import EmbeddingProvider


class Strategy(str, Enum):
    RULE_ONLY = "rule-only"
    LLM_ONLY = "llm-only"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class ClassifiedComment:
    id: str
    semantic: Union[SemanticLabel, str]  # str only for UNDETERMINED
    location: Union[Anchor, str]
    gamma_semantic: float
    gamma_location: float
    provenance_semantic: str  # rule_only | rule_verified | llm_inferred | llm_unavailable
    provenance_location: str
    latency_semantic: float
    latency_location: float

    @property
    def semantic_undetermined(self) -> bool:
        return self.semantic == UNDETERMINED

    @property
    def location_undetermined(self) -> bool:
        return self.location == UNDETERMINED


def _provenance_for_infer(result) -> str:
    return "llm_unavailable" if result.raw_response == "llm_unavailable" else "llm_inferred"


def classify_semantic_hybrid(
    c: Comment,
    article: SegmentedArticle,
    cues: CueTable,
    provider: EmbeddingProvider,
    judge: Judge,
) -> tuple[Union[SemanticLabel, str], float, str, float]:
    """Rule candidates -> cheap verification -> full inference fallback."""
    start = time.perf_counter()
    candidates = classify_rules_semantic(c, cues, provider)
    label: Union[SemanticLabel, str] = UNDETERMINED
    gamma = 0.0
    provenance = "llm_inferred"
    verified = False
    if candidates.labels:
        try:
            if len(candidates.labels) == 1:
                result = judge.verify_semantic_single(c, next(iter(candidates.labels)))
            else:
                result = judge.select_semantic_best(c, candidates.labels)
            if not result.undetermined:
                label, gamma, provenance = result.label, result.confidence, "rule_verified"
                verified = True
        except (ChatParseError, ChatTransportError):
            pass  # escalate to full inference
    if not verified:
        result = judge.infer_semantic_full(c, article)
        label, gamma = result.label, result.confidence
        provenance = _provenance_for_infer(result)
    return label, gamma, provenance, time.perf_counter() - start


def classify_location_hybrid(
    c: Comment,
    article: SegmentedArticle,
    ind: IndicatorTable,
    provider: EmbeddingProvider,
    judge: Judge,
    article_entities: Optional[list[Entity]] = None,
) -> tuple[Union[Anchor, str], float, str, float]:
    """Rule anchors -> segment-only verification -> global search fallback."""
    start = time.perf_counter()
    candidates = classify_rules_location(
        c, article, ind, provider, judge=judge, article_entities=article_entities
    )
    anchor: Union[Anchor, str] = UNDETERMINED
    gamma = 0.0
    provenance = "llm_inferred"
    verified = False
    if not candidates.empty:
        try:
            result = judge.verify_location(c, candidates, article)
            if not result.undetermined:
                anchor, gamma, provenance = result.label, result.confidence, "rule_verified"
                verified = True
        except (ChatParseError, ChatTransportError):
            pass
    if not verified:
        result = judge.infer_location_global(c, article)
        anchor, gamma = result.label, result.confidence
        provenance = _provenance_for_infer(result)
    return anchor, gamma, provenance, time.perf_counter() - start


def classify_semantic_rule_only(
    c: Comment, cues: CueTable, provider: EmbeddingProvider
) -> tuple[Union[SemanticLabel, str], float, str, float]:
    """Rule stage alone: commit only when exactly one candidate remains."""
    start = time.perf_counter()
    candidates = classify_rules_semantic(c, cues, provider)
    if len(candidates.labels) == 1:
        return next(iter(candidates.labels)), 1.0, "rule_only", time.perf_counter() - start
    return UNDETERMINED, 0.0, "rule_only", time.perf_counter() - start


def classify_location_rule_only(
    c: Comment, article: SegmentedArticle, ind: IndicatorTable, provider: EmbeddingProvider
) -> tuple[Union[Anchor, str], float, str, float]:
    """Rule stage alone: commit only when exactly one anchor level remains.

    Entity matching is unavailable without the LLM extractor, so this path
    covers only indicator and citation evidence.
    """
    start = time.perf_counter()
    candidates = classify_rules_location(c, article, ind, provider, judge=None)
    if len(candidates.anchors) == 1:
        level, indices = next(iter(candidates.anchors.items()))
        return (level, indices), 1.0, "rule_only", time.perf_counter() - start
    return UNDETERMINED, 0.0, "rule_only", time.perf_counter() - start


def run_pipeline(
    article: SegmentedArticle,
    comments: Sequence[Comment],
    config: Config,
    strategy: Strategy,
    embedder: Optional[EmbeddingProvider] = None,
    judge: Optional[Judge] = None,
) -> list[ClassifiedComment]:
    """Classify every comment on both axes under the given strategy."""
    embedder = embedder or make_embedder(config)
    cues = dataclasses.replace(
        load_cue_table(config.cue_table_path or None), semantic_threshold=config.tau_sem
    )
    ind = dataclasses.replace(
        load_indicator_table(config.indicator_table_path or None),
        loc_threshold=config.tau_loc,
        overlap_threshold=config.tau_overlap,
    )
    if strategy is not Strategy.RULE_ONLY and judge is None:
        provider = make_chat_provider(config)
        if provider is None:
            raise ValueError(f"strategy {strategy.value} needs a chat provider; configure chat_mode")
        judge = Judge(provider, tau_conf=config.tau_conf, retries=config.chat_retries)

    entity_lock = threading.Lock()
    entity_cache: dict[str, list[Entity]] = {}

    def article_entities() -> list[Entity]:
        with entity_lock:
            if "entities" not in entity_cache:
                entity_cache["entities"] = _load_or_extract_entities(article, judge, config)
            return entity_cache["entities"]

    def classify(c: Comment) -> ClassifiedComment:
        if strategy is Strategy.RULE_ONLY:
            sem = classify_semantic_rule_only(c, cues, embedder)
            loc = classify_location_rule_only(c, article, ind, embedder)
        elif strategy is Strategy.LLM_ONLY:
            t0 = time.perf_counter()
            sres = judge.infer_semantic_full(c, article)
            sem = (sres.label, sres.confidence, _provenance_for_infer(sres), time.perf_counter() - t0)
            t1 = time.perf_counter()
            lres = judge.infer_location_global(c, article)
            loc = (lres.label, lres.confidence, _provenance_for_infer(lres), time.perf_counter() - t1)
        else:
            sem = classify_semantic_hybrid(c, article, cues, embedder, judge)
            loc = classify_location_hybrid(
                c, article, ind, embedder, judge, article_entities=article_entities()
            )
        return ClassifiedComment(
            id=c.id,
            semantic=sem[0],
            location=loc[0],
            gamma_semantic=sem[1],
            gamma_location=loc[1],
            provenance_semantic=sem[2],
            provenance_location=loc[2],
            latency_semantic=sem[3],
            latency_location=loc[3],
        )

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(classify, comments))
    return [classify(c) for c in comments]


def _load_or_extract_entities(
    article: SegmentedArticle, judge: Judge, config: Config
) -> list[Entity]:
    """Per-article entity cache persisted beside the corpus when configured."""
    cache_path = None
    if config.entity_cache_dir:
        cache_path = Path(config.entity_cache_dir) / f"{article.id}.entities.json"
        if cache_path.exists():
            raw = json.loads(cache_path.read_text("utf-8"))
            return [
                Entity(
                    surface=e["surface"],
                    kind=e["kind"],
                    occurrences=tuple((p, s) for p, s in e["occurrences"]),
                )
                for e in raw
            ]
    entities = extract_article_entities(article, judge)
    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        cache_path.write_text(
            json.dumps(
                [
                    {"surface": e.surface, "kind": e.kind, "occurrences": [list(o) for o in e.occurrences]}
                    for e in entities
                ],
                ensure_ascii=False,
                indent=2,
            ),
            "utf-8",
        )
    return entities


# ---------------------------------------------------------------------------
# Annotated document
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnotatedComment:
    """A comment joined with its classification, as rendered by the UI."""

    id: str
    text: str
    likes: int
    replies: int
    semantic: Union[SemanticLabel, str]
    location: Union[Anchor, str]
    gamma_semantic: float
    gamma_location: float
    provenance_semantic: str
    provenance_location: str


@dataclass(frozen=True)
class FilterSpec:
    min_likes: int = 0
    min_replies: int = 0
    visible_labels: frozenset[SemanticLabel] = field(default_factory=lambda: frozenset(ALL_SEMANTIC_LABELS))

    def __post_init__(self):
        if self.min_likes < 0 or self.min_replies < 0:
            raise ValueError("filter thresholds must be non-negative")

    def admits(self, comment: AnnotatedComment) -> bool:
        if comment.likes < self.min_likes or comment.replies < self.min_replies:
            return False
        if self.visible_labels == ALL_SEMANTIC_LABELS:
            return True  # default set hides nothing, Undetermined included
        return comment.semantic in self.visible_labels


@dataclass(frozen=True)
class AnnotatedDocument:
    article: SegmentedArticle
    sentence_groups: dict[int, tuple[AnnotatedComment, ...]]
    paragraph_groups: dict[int, tuple[AnnotatedComment, ...]]
    global_comments: tuple[AnnotatedComment, ...]
    top_comment: dict[int, str]
    pie_data: dict[int, dict[str, int]]
    keyword_highlights: tuple[tuple[int, str], ...]  # (sentence global index, token)
    undetermined: tuple[str, ...]  # comment ids with undetermined location


def _sort_group(group: list[AnnotatedComment]) -> tuple[AnnotatedComment, ...]:
    # Likes descending; ties broken by ascending comment id for determinism.
    return tuple(sorted(group, key=lambda c: (-c.likes, c.id)))


def assemble_document(
    article: SegmentedArticle,
    classified: Sequence[ClassifiedComment],
    comments: Sequence[Comment],
    highlight_k: int = 3,
) -> AnnotatedDocument:
    """Group classified comments by anchor and precompute the UI aggregates."""
    by_id = {c.id: c for c in comments}
    annotated: list[AnnotatedComment] = []
    for cc in classified:
        src = by_id[cc.id]
        annotated.append(
            AnnotatedComment(
                id=cc.id,
                text=src.text,
                likes=src.likes,
                replies=src.replies,
                semantic=cc.semantic,
                location=cc.location,
                gamma_semantic=cc.gamma_semantic,
                gamma_location=cc.gamma_location,
                provenance_semantic=cc.provenance_semantic,
                provenance_location=cc.provenance_location,
            )
        )

    sentence_groups: dict[int, list[AnnotatedComment]] = {}
    paragraph_groups: dict[int, list[AnnotatedComment]] = {}
    global_comments: list[AnnotatedComment] = []
    undetermined: list[str] = []
    for ac in annotated:
        if ac.location == UNDETERMINED:
            undetermined.append(ac.id)
            continue
        level, indices = ac.location
        if level is LocationLevel.GLOBAL:
            global_comments.append(ac)
        elif level is LocationLevel.SENTENCE:
            for idx in indices:
                sentence_groups.setdefault(idx, []).append(ac)
        else:
            for idx in indices:
                paragraph_groups.setdefault(idx, []).append(ac)

    sorted_sentences = {i: _sort_group(g) for i, g in sorted(sentence_groups.items())}
    sorted_paragraphs = {i: _sort_group(g) for i, g in sorted(paragraph_groups.items())}
    return AnnotatedDocument(
        article=article,
        sentence_groups=sorted_sentences,
        paragraph_groups=sorted_paragraphs,
        global_comments=_sort_group(global_comments),
        top_comment={i: g[0].id for i, g in sorted_sentences.items() if g},
        pie_data={i: _pie_counts(g) for i, g in sorted_sentences.items()},
        keyword_highlights=_keyword_highlights(article, comments, highlight_k),
        undetermined=tuple(sorted(undetermined)),
    )


def _pie_counts(group: Sequence[AnnotatedComment]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for ac in group:
        if ac.semantic == UNDETERMINED:
            continue
        key = ac.semantic.value
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def _keyword_highlights(
    article: SegmentedArticle, comments: Sequence[Comment], k: int
) -> tuple[tuple[int, str], ...]:
    """Article token positions for tokens used by >= k distinct comments."""
    comment_token_sets = [set() for _ in comments]
    for i, c in enumerate(comments):
        for s in c.sentences:
            comment_token_sets[i].update(s.tokens)
    article_tokens = {t for s in article.sentences() for t in s.tokens}
    hot = {
        t
        for t in article_tokens
        if sum(1 for ts in comment_token_sets if t in ts) >= k
    }
    positions = []
    for s in article.sentences():
        for t in sorted(set(s.tokens)):
            if t in hot:
                positions.append((s.global_index, t))
    return tuple(positions)


def apply_filters(doc: AnnotatedDocument, spec: FilterSpec) -> AnnotatedDocument:
    """Filtered view: same article, visible comments only, aggregates rebuilt."""
    sentence_groups = {
        i: tuple(c for c in g if spec.admits(c)) for i, g in doc.sentence_groups.items()
    }
    sentence_groups = {i: g for i, g in sentence_groups.items() if g}
    paragraph_groups = {
        i: tuple(c for c in g if spec.admits(c)) for i, g in doc.paragraph_groups.items()
    }
    paragraph_groups = {i: g for i, g in paragraph_groups.items() if g}
    return AnnotatedDocument(
        article=doc.article,
        sentence_groups=sentence_groups,
        paragraph_groups=paragraph_groups,
        global_comments=tuple(c for c in doc.global_comments if spec.admits(c)),
        top_comment={i: g[0].id for i, g in sentence_groups.items()},
        pie_data={i: _pie_counts(g) for i, g in sentence_groups.items()},
        keyword_highlights=doc.keyword_highlights,
        undetermined=doc.undetermined,
    )


# ---------------------------------------------------------------------------
# Serialization (wire format, see docs/annotated-doc.md)
# ---------------------------------------------------------------------------


def _location_to_dict(location: Union[Anchor, str]):
    if location == UNDETERMINED:
        return UNDETERMINED
    level, indices = location
    return {"level": level.value, "indices": sorted(indices)}


def _semantic_to_str(semantic: Union[SemanticLabel, str]) -> str:
    return semantic if isinstance(semantic, str) else semantic.value


def classified_to_dict(cc: ClassifiedComment, include_timing: bool = True) -> dict:
    out = {
        "id": cc.id,
        "semantic": _semantic_to_str(cc.semantic),
        "location": _location_to_dict(cc.location),
        "gamma_semantic": round(cc.gamma_semantic, 6),
        "gamma_location": round(cc.gamma_location, 6),
        "provenance_semantic": cc.provenance_semantic,
        "provenance_location": cc.provenance_location,
    }
    if include_timing:
        out["latency_semantic"] = cc.latency_semantic
        out["latency_location"] = cc.latency_location
    return out


def classified_to_json(classified: Sequence[ClassifiedComment], include_timing: bool = True) -> str:
    return json.dumps(
        [classified_to_dict(c, include_timing) for c in classified],
        ensure_ascii=False,
        indent=2,
    )


def _annotated_comment_to_dict(ac: AnnotatedComment) -> dict:
    return {
        "id": ac.id,
        "text": ac.text,
        "likes": ac.likes,
        "replies": ac.replies,
        "semantic": _semantic_to_str(ac.semantic),
        "location": _location_to_dict(ac.location),
        "gamma_semantic": round(ac.gamma_semantic, 6),
        "gamma_location": round(ac.gamma_location, 6),
        "provenance_semantic": ac.provenance_semantic,
        "provenance_location": ac.provenance_location,
    }


def document_to_dict(doc: AnnotatedDocument) -> dict:
    article = doc.article
    return {
        "article": {
            "id": article.id,
            "title": article.title,
            "paragraphs": [
                {
                    "index": p.index,
                    "sentences": [
                        {"global_index": s.global_index, "text": s.text} for s in p.sentences
                    ],
                }
                for p in article.paragraphs
            ],
        },
        "sentence_groups": {
            str(i): [_annotated_comment_to_dict(c) for c in g]
            for i, g in doc.sentence_groups.items()
        },
        "paragraph_groups": {
            str(i): [_annotated_comment_to_dict(c) for c in g]
            for i, g in doc.paragraph_groups.items()
        },
        "global_comments": [_annotated_comment_to_dict(c) for c in doc.global_comments],
        "top_comment": {str(i): cid for i, cid in doc.top_comment.items()},
        "pie_data": {str(i): counts for i, counts in doc.pie_data.items()},
        "keyword_highlights": [
            {"sentence_index": i, "token": t} for i, t in doc.keyword_highlights
        ],
        "undetermined": list(doc.undetermined),
    }


def document_to_json(doc: AnnotatedDocument) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2, sort_keys=True)
