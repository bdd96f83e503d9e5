"""LLM judgment orchestration.

Two cheap verification prompts confirm rule-stage candidates; two full
inference prompts handle comments the rules could not cover; one extraction
prompt pulls named entities. All prompts demand strict JSON and are retried
on parse failure before escalating or giving up.

Providers are pluggable. The replay provider answers from a recorded JSONL
transcript keyed by a whitespace-insensitive prompt hash, which makes the
whole hybrid pipeline deterministic and offline-testable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union

from commentscope.corpus import SegmentedArticle
from commentscope.labels import UNDETERMINED, LocationLevel, SemanticLabel
from commentscope.location_rules import ENTITY_KINDS, Entity, LocationCandidates

logger = logging.getLogger(__name__)


class ChatTransportError(RuntimeError):
    """Provider unreachable or transcript miss; retriable upstream."""


class ChatParseError(ValueError):
    """Response did not match the demanded JSON shape."""


class PromptKind(str, Enum):
    VERIFY_SINGLE = "VerifySingle"
    SELECT_BEST = "SelectBest"
    FULL_INFER = "FullInfer"
    VERIFY_ANCHOR = "VerifyAnchor"
    GLOBAL_SEARCH = "GlobalSearch"
    ENTITY_EXTRACT = "EntityExtract"


Anchor = tuple[LocationLevel, frozenset[int]]


@dataclass(frozen=True)
class JudgeResult:
    label: Union[SemanticLabel, Anchor, str]  # str only for UNDETERMINED
    confidence: float
    raw_response: str
    prompt_kind: PromptKind

    def __post_init__(self):
        assert 0.0 <= self.confidence <= 1.0, "confidence must be in [0,1]"

    @property
    def undetermined(self) -> bool:
        return self.label == UNDETERMINED


def normalize_prompt(prompt: str) -> str:
    return " ".join(prompt.split())


def request_hash(prompt: str) -> str:
    return hashlib.sha256(normalize_prompt(prompt).encode("utf-8")).hexdigest()


class ChatProvider(Protocol):
    name: str
    calls: int

    def complete(self, prompt: str) -> str: ...


class ReplayChatProvider:
    """Deterministic provider answering from a JSONL transcript.

    Transcript lines are {"request_hash": ..., "response_text": ...}; hashing
    is over the whitespace-normalized prompt so transcripts survive template
    reformatting.
    """

    def __init__(self, transcript_path: str | Path):
        self.name = f"replay:{transcript_path}"
        self.calls = 0
        self._responses: dict[str, str] = {}
        self._lock = threading.Lock()
        path = Path(transcript_path)
        if not path.exists():
            raise FileNotFoundError(f"transcript not found: {path}")
        for line in path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            self._responses[entry["request_hash"]] = entry["response_text"]

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls += 1
        key = request_hash(prompt)
        if key not in self._responses:
            raise ChatTransportError(f"no transcript entry for request hash {key[:12]}…")
        return self._responses[key]


class HttpChatProvider:
    """Remote chat completion: POST endpoint {"model", "prompt"} -> {"text"}."""

    def __init__(
        self,
        endpoint: str,
        model: str = "",
        api_key: str | None = None,
        timeout: float = 60.0,
        max_in_flight: int = 4,
    ):
        self.name = f"http:{endpoint}"
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.calls = 0
        self._lock = threading.Lock()
        self._sem = threading.Semaphore(max_in_flight)

    def complete(self, prompt: str) -> str:
        import requests

        with self._lock:
            self.calls += 1
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._sem:
            try:
                resp = requests.post(
                    self.endpoint,
                    json={"model": self.model, "prompt": prompt},
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["text"]
            except requests.RequestException as exc:
                raise ChatTransportError(f"chat provider unreachable: {exc}") from exc


class TranscriptRecorder:
    """Wraps a provider and appends (hash, response) pairs to a JSONL file.

    Run the pipeline once against a live provider through this wrapper, keep
    the file, and replay it forever after.
    """

    def __init__(self, inner: ChatProvider, out_path: str | Path, keep_prompts: bool = True):
        self.name = f"record({inner.name})"
        self.inner = inner
        self.out_path = Path(out_path)
        self.keep_prompts = keep_prompts
        self.calls = 0
        self._seen: set[str] = set()
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        key = request_hash(prompt)
        with self._lock:
            self.calls += 1
            if key not in self._seen:
                self._seen.add(key)
                entry = {"request_hash": key, "response_text": response}
                if self.keep_prompts:
                    entry["prompt"] = prompt
                with self.out_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return response


_TEMPLATES: dict[str, str] = {}


def _template(name: str) -> str:
    if name not in _TEMPLATES:
        _TEMPLATES[name] = (
            resources.files("commentscope.prompts").joinpath(f"{name}.txt").read_text("utf-8")
        )
    return _TEMPLATES[name]


def render_prompt(name: str, **values: str) -> str:
    text = _template(name)
    for key, val in values.items():
        text = text.replace("{" + key + "}", val)
    return text


def _anchor_description(level: LocationLevel, indices: frozenset[int]) -> str:
    if level is LocationLevel.GLOBAL:
        return "GlobalLevel (the article as a whole)"
    return f"{level.value} {sorted(indices)}"


def _anchor_segments(article: SegmentedArticle, level: LocationLevel, indices: frozenset[int]) -> str:
    if level is LocationLevel.GLOBAL:
        return "(the article as a whole)"
    if level is LocationLevel.SENTENCE:
        return "\n".join(f"[s{i}] {article.sentence(i).text}" for i in sorted(indices))
    return "\n".join(f"[p{i}] {article.paragraph(i).text}" for i in sorted(indices))


def render_article_indexed(article: SegmentedArticle) -> str:
    lines = []
    for p in article.paragraphs:
        lines.append(f"[p{p.index}]")
        for s in p.sentences:
            lines.append(f"[s{s.global_index}] {s.text}")
    return "\n".join(lines)


class Judge:
    """Stateful wrapper over a chat provider implementing the judgment ops.

    Keeps a request log of (kind, prompt) for auditing; the log backs the
    context-reduction assertion that anchor-verification prompts never carry
    the full article.
    """

    def __init__(self, provider: ChatProvider, tau_conf: float = 0.5, retries: int = 2):
        if not 0.0 < tau_conf < 1.0:
            raise ValueError("tau_conf must be in (0,1)")
        self.provider = provider
        self.tau_conf = tau_conf
        self.retries = retries
        self.request_log: list[tuple[PromptKind, str]] = []
        self._log_lock = threading.Lock()

    # -- plumbing ----------------------------------------------------------

    def _ask(self, kind: PromptKind, prompt: str) -> str:
        with self._log_lock:
            self.request_log.append((kind, prompt))
        return self.provider.complete(prompt)

    def _ask_json(self, kind: PromptKind, prompt: str, validate) -> dict:
        """Ask, parse, validate; retry on parse failure; raise on exhaustion."""
        last_exc: Exception | None = None
        for _ in range(self.retries + 1):
            raw = self._ask(kind, prompt)
            try:
                data = json.loads(raw.strip())
                validate(data)
                data["_raw"] = raw
                return data
            except (json.JSONDecodeError, ChatParseError, KeyError, TypeError, ValueError) as exc:
                last_exc = exc
                logger.debug("parse failure on %s prompt, retrying: %s", kind.value, exc)
        raise ChatParseError(f"{kind.value}: unparseable response after retries: {last_exc}")

    def _confidence(self, data: dict) -> float:
        gamma = float(data["confidence"])
        if not 0.0 <= gamma <= 1.0:
            raise ChatParseError(f"confidence out of range: {gamma}")
        return gamma

    # -- semantic ops -------------------------------------------------------

    def verify_semantic_single(self, comment, candidate: SemanticLabel) -> JudgeResult:
        prompt = render_prompt(
            "verify_semantic_single", comment=comment.text, candidates=candidate.value
        )

        def validate(d):
            if not isinstance(d.get("match"), bool):
                raise ChatParseError("missing boolean 'match'")
            float(d["confidence"])

        data = self._ask_json(PromptKind.VERIFY_SINGLE, prompt, validate)
        gamma = self._confidence(data)
        if data["match"] and gamma >= self.tau_conf:
            return JudgeResult(candidate, gamma, data["_raw"], PromptKind.VERIFY_SINGLE)
        return JudgeResult(UNDETERMINED, gamma, data["_raw"], PromptKind.VERIFY_SINGLE)

    def select_semantic_best(self, comment, candidates: set[SemanticLabel]) -> JudgeResult:
        ordered = sorted(candidates, key=lambda l: l.value)
        prompt = render_prompt(
            "select_semantic_best",
            comment=comment.text,
            candidates=", ".join(l.value for l in ordered),
        )

        def validate(d):
            label = SemanticLabel(d["label"])
            if label not in candidates:
                raise ChatParseError(f"label {label.value} outside candidate set")
            float(d["confidence"])

        data = self._ask_json(PromptKind.SELECT_BEST, prompt, validate)
        gamma = self._confidence(data)
        label = SemanticLabel(data["label"])
        if gamma >= self.tau_conf:
            return JudgeResult(label, gamma, data["_raw"], PromptKind.SELECT_BEST)
        return JudgeResult(UNDETERMINED, gamma, data["_raw"], PromptKind.SELECT_BEST)

    def infer_semantic_full(self, comment, article: SegmentedArticle) -> JudgeResult:
        prompt = render_prompt(
            "infer_semantic_full", comment=comment.text, article=article.body
        )

        def validate(d):
            if d["label"] != UNDETERMINED:
                SemanticLabel(d["label"])
            float(d["confidence"])

        try:
            data = self._ask_json(PromptKind.FULL_INFER, prompt, validate)
        except ChatTransportError:
            return JudgeResult(UNDETERMINED, 0.0, "llm_unavailable", PromptKind.FULL_INFER)
        except ChatParseError:
            return JudgeResult(UNDETERMINED, 0.0, "parse_failure", PromptKind.FULL_INFER)
        gamma = self._confidence(data)
        if data["label"] == UNDETERMINED or gamma < self.tau_conf:
            return JudgeResult(UNDETERMINED, min(gamma, 1.0), data["_raw"], PromptKind.FULL_INFER)
        return JudgeResult(SemanticLabel(data["label"]), gamma, data["_raw"], PromptKind.FULL_INFER)

    # -- location ops -------------------------------------------------------

    def verify_location(
        self, comment, candidates: LocationCandidates, article: SegmentedArticle
    ) -> JudgeResult:
        anchors: list[Anchor] = [
            (level, candidates.anchors[level])
            for level in (LocationLevel.SENTENCE, LocationLevel.PARAGRAPH, LocationLevel.GLOBAL)
            if level in candidates.anchors
        ]
        if not anchors:
            raise ValueError("verify_location requires non-empty candidates")
        if len(anchors) == 1:
            level, indices = anchors[0]
            prompt = render_prompt(
                "verify_anchor_single",
                comment=comment.text,
                candidates=_anchor_description(level, indices),
                segments=_anchor_segments(article, level, indices),
            )

            def validate(d):
                if not isinstance(d.get("match"), bool):
                    raise ChatParseError("missing boolean 'match'")
                float(d["confidence"])

            data = self._ask_json(PromptKind.VERIFY_ANCHOR, prompt, validate)
            gamma = self._confidence(data)
            if data["match"] and gamma >= self.tau_conf:
                return JudgeResult((level, indices), gamma, data["_raw"], PromptKind.VERIFY_ANCHOR)
            return JudgeResult(UNDETERMINED, gamma, data["_raw"], PromptKind.VERIFY_ANCHOR)

        options = "\n".join(
            f"{i + 1}. {_anchor_description(level, idx)}" for i, (level, idx) in enumerate(anchors)
        )
        segments = "\n\n".join(
            f"Option {i + 1}:\n{_anchor_segments(article, level, idx)}"
            for i, (level, idx) in enumerate(anchors)
        )
        prompt = render_prompt(
            "verify_anchor_multi", comment=comment.text, candidates=options, segments=segments
        )

        def validate(d):
            choice = int(d["choice"])
            if not 1 <= choice <= len(anchors):
                raise ChatParseError(f"choice {choice} outside candidate options")
            float(d["confidence"])

        data = self._ask_json(PromptKind.VERIFY_ANCHOR, prompt, validate)
        gamma = self._confidence(data)
        if gamma >= self.tau_conf:
            anchor = anchors[int(data["choice"]) - 1]
            return JudgeResult(anchor, gamma, data["_raw"], PromptKind.VERIFY_ANCHOR)
        return JudgeResult(UNDETERMINED, gamma, data["_raw"], PromptKind.VERIFY_ANCHOR)

    def infer_location_global(self, comment, article: SegmentedArticle) -> JudgeResult:
        prompt = render_prompt(
            "global_search", comment=comment.text, article=render_article_indexed(article)
        )

        def validate(d):
            level = d["level"]
            if level == UNDETERMINED:
                float(d["confidence"])
                return
            level = LocationLevel(level)
            indices = [int(i) for i in d.get("indices", [])]
            if level is LocationLevel.GLOBAL:
                pass
            else:
                if not indices:
                    raise ChatParseError("sentence/paragraph level needs indices")
                limit = (
                    article.sentence_count
                    if level is LocationLevel.SENTENCE
                    else article.paragraph_count
                )
                for i in indices:
                    if not 1 <= i <= limit:
                        raise ChatParseError(f"index {i} out of range")
            float(d["confidence"])

        try:
            data = self._ask_json(PromptKind.GLOBAL_SEARCH, prompt, validate)
        except ChatTransportError:
            return JudgeResult(UNDETERMINED, 0.0, "llm_unavailable", PromptKind.GLOBAL_SEARCH)
        except ChatParseError:
            return JudgeResult(UNDETERMINED, 0.0, "parse_failure", PromptKind.GLOBAL_SEARCH)
        gamma = self._confidence(data)
        if data["level"] == UNDETERMINED or gamma < self.tau_conf:
            return JudgeResult(UNDETERMINED, gamma, data["_raw"], PromptKind.GLOBAL_SEARCH)
        level = LocationLevel(data["level"])
        indices = frozenset(int(i) for i in data.get("indices", []))
        if level is LocationLevel.GLOBAL:
            indices = frozenset()
        return JudgeResult((level, indices), gamma, data["_raw"], PromptKind.GLOBAL_SEARCH)

    # -- entities -----------------------------------------------------------

    def extract_entities(self, text: str) -> list[Entity]:
        prompt = render_prompt("extract_entities", comment=text)

        def validate(d):
            if not isinstance(d.get("entities"), list):
                raise ChatParseError("missing 'entities' list")

        try:
            data = self._ask_json(PromptKind.ENTITY_EXTRACT, prompt, validate)
        except ChatParseError:
            logger.warning("entity extraction response unparseable; returning no entities")
            return []
        out: list[Entity] = []
        for ent in data["entities"]:
            surface = str(ent.get("surface", "")).strip()
            kind = str(ent.get("kind", "")).strip().lower()
            if not surface:
                continue
            if kind not in ENTITY_KINDS:
                logger.warning("dropping entity %r with unknown kind %r", surface, kind)
                continue
            out.append(Entity(surface=surface, kind=kind))
        return out
