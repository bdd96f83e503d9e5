"""HTTP service exposing annotated documents and filtered views.

The service is stateless over an immutable registry of documents loaded at
startup; filtering shares `apply_filters` semantics with the CLI by
reconstructing the document object from its wire form.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from commentscope.corpus import Paragraph, SegmentedArticle, Sentence
from commentscope.labels import UNDETERMINED, LocationLevel, SemanticLabel
from commentscope.pipeline import (
    AnnotatedComment,
    AnnotatedDocument,
    FilterSpec,
    apply_filters,
    document_to_json,
)


def _comment_from_dict(raw: dict) -> AnnotatedComment:
    loc = raw["location"]
    if loc == UNDETERMINED:
        location = UNDETERMINED
    else:
        location = (LocationLevel(loc["level"]), frozenset(loc["indices"]))
    semantic = raw["semantic"]
    if semantic != UNDETERMINED:
        semantic = SemanticLabel(semantic)
    return AnnotatedComment(
        id=raw["id"],
        text=raw["text"],
        likes=raw["likes"],
        replies=raw["replies"],
        semantic=semantic,
        location=location,
        gamma_semantic=raw["gamma_semantic"],
        gamma_location=raw["gamma_location"],
        provenance_semantic=raw["provenance_semantic"],
        provenance_location=raw["provenance_location"],
    )


def document_from_dict(raw: dict) -> AnnotatedDocument:
    """Rebuild an AnnotatedDocument from its wire form (article text only)."""
    art = raw["article"]
    paragraphs = []
    for p in art["paragraphs"]:
        sentences = tuple(
            Sentence(
                global_index=s["global_index"],
                paragraph_index=p["index"],
                text=s["text"],
                tokens=(),
                ending_punctuation=None,
            )
            for s in p["sentences"]
        )
        paragraphs.append(Paragraph(index=p["index"], sentences=sentences))
    article = SegmentedArticle(
        id=art["id"], title=art.get("title", ""), body="", paragraphs=tuple(paragraphs)
    )
    return AnnotatedDocument(
        article=article,
        sentence_groups={
            int(i): tuple(_comment_from_dict(c) for c in g)
            for i, g in raw["sentence_groups"].items()
        },
        paragraph_groups={
            int(i): tuple(_comment_from_dict(c) for c in g)
            for i, g in raw["paragraph_groups"].items()
        },
        global_comments=tuple(_comment_from_dict(c) for c in raw["global_comments"]),
        top_comment={int(i): cid for i, cid in raw["top_comment"].items()},
        pie_data={int(i): dict(counts) for i, counts in raw["pie_data"].items()},
        keyword_highlights=tuple(
            (e["sentence_index"], e["token"]) for e in raw["keyword_highlights"]
        ),
        undetermined=tuple(raw["undetermined"]),
    )


def _parse_int_param(value: str, name: str) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"malformed query parameter: {name}")
    if parsed < 0:
        raise HTTPException(status_code=400, detail=f"malformed query parameter: {name}")
    return parsed


def _parse_labels_param(value: str) -> frozenset[SemanticLabel]:
    if value.strip().lower() in ("", "all"):
        return frozenset(SemanticLabel)
    labels = set()
    for part in value.split(","):
        part = part.strip().lower()
        try:
            labels.add(next(l for l in SemanticLabel if l.value.lower() == part))
        except StopIteration:
            raise HTTPException(status_code=400, detail="malformed query parameter: labels")
    return frozenset(labels)


def load_documents(paths: Iterable[str | Path]) -> dict[str, tuple[str, dict]]:
    """Load annotated-document JSON files into an id-keyed registry."""
    registry: dict[str, tuple[str, dict]] = {}
    for path in paths:
        text = Path(path).read_text("utf-8")
        raw = json.loads(text)
        registry[raw["article"]["id"]] = (text, raw)
    return registry


def create_app(doc_paths: Iterable[str | Path]) -> FastAPI:
    registry = load_documents(doc_paths)
    app = FastAPI(title="commentscope")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/documents")
    def list_documents():
        return [
            {"id": doc_id, "title": raw["article"].get("title", "")}
            for doc_id, (_, raw) in sorted(registry.items())
        ]

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        if doc_id not in registry:
            raise HTTPException(status_code=404, detail=f"unknown document: {doc_id}")
        text, _ = registry[doc_id]
        return Response(content=text, media_type="application/json")

    @app.get("/documents/{doc_id}/view")
    def get_view(
        doc_id: str, min_likes: str = "0", min_replies: str = "0", labels: str = "all"
    ):
        if doc_id not in registry:
            raise HTTPException(status_code=404, detail=f"unknown document: {doc_id}")
        spec = FilterSpec(
            min_likes=_parse_int_param(min_likes, "min_likes"),
            min_replies=_parse_int_param(min_replies, "min_replies"),
            visible_labels=_parse_labels_param(labels),
        )
        _, raw = registry[doc_id]
        filtered = apply_filters(document_from_dict(raw), spec)
        return Response(content=document_to_json(filtered), media_type="application/json")

    return app
