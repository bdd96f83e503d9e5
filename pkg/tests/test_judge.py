import json

import pytest

from commentscope.corpus import build_comment
from commentscope.judge import (
    ChatParseError,
    ChatTransportError,
    Judge,
    PromptKind,
    ReplayChatProvider,
    TranscriptRecorder,
    normalize_prompt,
    render_prompt,
    request_hash,
)
from commentscope.labels import UNDETERMINED, LocationLevel, SemanticLabel
from commentscope.location_rules import LocationCandidates, LocationEvidence

from conftest import make_transcript


class QueueProvider:
    """Feeds canned responses in order, recording the prompts it saw."""

    name = "queue"

    def __init__(self, responses):
        self.responses = list(responses)
        self.prompts = []
        self.calls = 0

    def complete(self, prompt):
        self.calls += 1
        self.prompts.append(prompt)
        if not self.responses:
            raise ChatTransportError("queue exhausted")
        return self.responses.pop(0)


def judge_with(responses, tau_conf=0.5, retries=2):
    return Judge(QueueProvider(responses), tau_conf=tau_conf, retries=retries)


COMMENT = build_comment("c7", "Is this really true?")


def candidates_of(*anchors):
    cands = LocationCandidates()
    for level, indices in anchors:
        cands.add(level, frozenset(indices), LocationEvidence("t", "", level, frozenset(indices)))
    return cands


class TestVerifySemanticSingle:
    def test_match_passes_through(self):
        j = judge_with(['{"match": true, "confidence": 0.9}'])
        r = j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION)
        assert r.label is SemanticLabel.QUESTION
        assert r.confidence == 0.9

    def test_no_match_is_undetermined(self):
        j = judge_with(['{"match": false, "confidence": 0.8}'])
        r = j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION)
        assert r.undetermined

    def test_low_confidence_is_undetermined(self):
        j = judge_with(['{"match": true, "confidence": 0.4}'])
        assert j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION).undetermined

    def test_malformed_raises_after_retries(self):
        j = judge_with(["garbage", "more garbage", "still not json"])
        with pytest.raises(ChatParseError):
            j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION)
        assert j.provider.calls == 3  # initial try + 2 retries

    def test_retry_recovers_from_one_bad_line(self):
        j = judge_with(["garbage", '{"match": true, "confidence": 0.7}'])
        r = j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION)
        assert r.label is SemanticLabel.QUESTION


class TestSelectSemanticBest:
    CANDS = {SemanticLabel.QUESTION, SemanticLabel.EXCLAMATION}

    def test_selects_member(self):
        j = judge_with(['{"label": "Exclamation", "confidence": 0.8}'])
        r = j.select_semantic_best(COMMENT, self.CANDS)
        assert r.label is SemanticLabel.EXCLAMATION
        assert r.confidence == 0.8

    def test_nonmember_is_parse_failure(self):
        j = judge_with(['{"label": "Statement", "confidence": 0.8}'] * 3)
        with pytest.raises(ChatParseError):
            j.select_semantic_best(COMMENT, self.CANDS)

    def test_low_confidence_undetermined(self):
        j = judge_with(['{"label": "Question", "confidence": 0.3}'])
        assert j.select_semantic_best(COMMENT, self.CANDS).undetermined


class TestInferSemanticFull:
    def test_picks_label(self, article):
        j = judge_with(['{"label": "Sarcasm", "confidence": 0.77}'])
        r = j.infer_semantic_full(COMMENT, article)
        assert r.label is SemanticLabel.SARCASM
        assert r.confidence == 0.77

    def test_low_confidence_undetermined(self, article):
        j = judge_with(['{"label": "Sarcasm", "confidence": 0.2}'])
        assert j.infer_semantic_full(COMMENT, article).undetermined

    def test_provider_down_marks_unavailable(self, article):
        j = judge_with([])  # queue exhausted -> transport error
        r = j.infer_semantic_full(COMMENT, article)
        assert r.undetermined
        assert r.confidence == 0.0
        assert r.raw_response == "llm_unavailable"

    def test_parse_exhaustion_marks_parse_failure(self, article):
        j = judge_with(["nope"] * 3)
        r = j.infer_semantic_full(COMMENT, article)
        assert r.undetermined
        assert r.raw_response == "parse_failure"

    def test_prompt_contains_full_article(self, article):
        j = judge_with(['{"label": "Statement", "confidence": 0.9}'])
        j.infer_semantic_full(COMMENT, article)
        assert article.body in j.provider.prompts[0]


class TestVerifyLocation:
    def test_single_anchor_yes(self, article):
        j = judge_with(['{"match": true, "confidence": 0.88}'])
        cands = candidates_of((LocationLevel.SENTENCE, {12}))
        r = j.verify_location(COMMENT, cands, article)
        assert r.label == (LocationLevel.SENTENCE, frozenset({12}))
        assert r.confidence == 0.88

    def test_single_anchor_no_escalates_to_undetermined(self, article):
        j = judge_with(['{"match": false, "confidence": 0.9}'])
        cands = candidates_of((LocationLevel.SENTENCE, {12}))
        assert j.verify_location(COMMENT, cands, article).undetermined

    def test_multi_anchor_choice(self, article):
        j = judge_with(['{"choice": 2, "confidence": 0.7}'])
        cands = candidates_of(
            (LocationLevel.SENTENCE, {30}), (LocationLevel.PARAGRAPH, {2})
        )
        r = j.verify_location(COMMENT, cands, article)
        assert r.label == (LocationLevel.PARAGRAPH, frozenset({2}))

    def test_choice_out_of_range_is_parse_failure(self, article):
        j = judge_with(['{"choice": 9, "confidence": 0.7}'] * 3)
        cands = candidates_of(
            (LocationLevel.SENTENCE, {30}), (LocationLevel.PARAGRAPH, {2})
        )
        with pytest.raises(ChatParseError):
            j.verify_location(COMMENT, cands, article)

    def test_empty_candidates_rejected(self, article):
        j = judge_with([])
        with pytest.raises(ValueError):
            j.verify_location(COMMENT, LocationCandidates(), article)

    def test_prompt_carries_segments_not_article(self, article):
        j = judge_with(['{"match": true, "confidence": 0.9}'])
        cands = candidates_of((LocationLevel.SENTENCE, {12}))
        j.verify_location(COMMENT, cands, article)
        prompt = j.provider.prompts[0]
        assert article.sentence(12).text in prompt
        assert article.body not in prompt


class TestInferLocationGlobal:
    def test_sentence_anchor(self, article):
        j = judge_with(['{"level": "SentenceLevel", "indices": [5], "confidence": 0.81}'])
        r = j.infer_location_global(COMMENT, article)
        assert r.label == (LocationLevel.SENTENCE, frozenset({5}))

    def test_invalid_index_retried_then_undetermined(self, article):
        j = judge_with(
            ['{"level": "SentenceLevel", "indices": [999], "confidence": 0.9}'] * 3
        )
        r = j.infer_location_global(COMMENT, article)
        assert r.undetermined
        assert r.raw_response == "parse_failure"
        assert j.provider.calls == 3

    def test_global_level(self, article):
        j = judge_with(['{"level": "GlobalLevel", "indices": [], "confidence": 0.9}'])
        r = j.infer_location_global(COMMENT, article)
        assert r.label == (LocationLevel.GLOBAL, frozenset())

    def test_transport_failure_unavailable(self, article):
        j = judge_with([])
        r = j.infer_location_global(COMMENT, article)
        assert r.undetermined
        assert r.raw_response == "llm_unavailable"


class TestExtractEntities:
    def test_one_entity(self):
        j = judge_with(
            ['{"entities": [{"surface": "People\'s Daily", "kind": "organization"}]}']
        )
        out = j.extract_entities("People's Daily reported it")
        assert len(out) == 1
        assert out[0].surface == "People's Daily"
        assert out[0].kind == "organization"

    def test_empty(self):
        j = judge_with(['{"entities": []}'])
        assert j.extract_entities("nothing here") == []

    def test_unknown_kind_dropped(self, caplog):
        j = judge_with(['{"entities": [{"surface": "Rex", "kind": "animal"}]}'])
        with caplog.at_level("WARNING"):
            out = j.extract_entities("Rex barked")
        assert out == []
        assert any("unknown kind" in r.message for r in caplog.records)

    def test_parse_failure_degrades_to_empty(self):
        j = judge_with(["not json"] * 3)
        assert j.extract_entities("x") == []


class TestConcreteLabelConfidenceInvariant:
    def test_concrete_results_meet_threshold(self, article):
        cases = [
            judge_with(['{"match": true, "confidence": 0.51}']).verify_semantic_single(
                COMMENT, SemanticLabel.QUESTION
            ),
            judge_with(['{"label": "Sarcasm", "confidence": 0.55}']).infer_semantic_full(
                COMMENT, article
            ),
            judge_with(
                ['{"level": "GlobalLevel", "indices": [], "confidence": 0.6}']
            ).infer_location_global(COMMENT, article),
        ]
        for r in cases:
            if r.label != UNDETERMINED:
                assert r.confidence >= 0.5


class TestReplayProvider:
    def test_whitespace_insensitive_hashing(self):
        assert request_hash("a  b\nc") == request_hash("a b c")
        assert normalize_prompt("  a \t b ") == "a b"

    def test_replay_roundtrip(self, tmp_path):
        prompt = render_prompt(
            "verify_semantic_single", comment="Is it true?", candidates="Question"
        )
        path = make_transcript(tmp_path, {prompt: '{"match": true, "confidence": 0.9}'})
        provider = ReplayChatProvider(path)
        judge = Judge(provider)
        r = judge.verify_semantic_single(build_comment("c", "Is it true?"), SemanticLabel.QUESTION)
        assert r.label is SemanticLabel.QUESTION
        assert provider.calls == 1

    def test_transcript_miss_is_transport_error(self, tmp_path):
        path = make_transcript(tmp_path, {"some prompt": "x"})
        with pytest.raises(ChatTransportError):
            ReplayChatProvider(path).complete("a different prompt")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ReplayChatProvider(tmp_path / "absent.jsonl")


class TestTranscriptRecorder:
    def test_records_and_dedupes(self, tmp_path):
        inner = QueueProvider(['{"match": true, "confidence": 0.9}'] * 2)
        out = tmp_path / "rec.jsonl"
        recorder = TranscriptRecorder(inner, out)
        recorder.complete("prompt one")
        recorder.complete("prompt  one")  # same normalized prompt
        lines = [json.loads(l) for l in out.read_text("utf-8").splitlines()]
        assert len(lines) == 1
        assert lines[0]["request_hash"] == request_hash("prompt one")
        # The recorded transcript replays.
        replay = ReplayChatProvider(out)
        assert replay.complete("prompt one") == '{"match": true, "confidence": 0.9}'


class TestRequestLog:
    def test_kinds_logged(self, article):
        j = judge_with(
            [
                '{"match": true, "confidence": 0.9}',
                '{"level": "GlobalLevel", "indices": [], "confidence": 0.9}',
            ]
        )
        j.verify_semantic_single(COMMENT, SemanticLabel.QUESTION)
        j.infer_location_global(COMMENT, article)
        assert [k for k, _ in j.request_log] == [
            PromptKind.VERIFY_SINGLE,
            PromptKind.GLOBAL_SEARCH,
        ]
