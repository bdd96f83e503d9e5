import json
from pathlib import Path

import pytest

from commentscope.config import Config
from commentscope.corpus import load_corpus
from commentscope.judge import Judge, ReplayChatProvider, request_hash
from commentscope.location_rules import load_indicator_table
from commentscope.semantic_rules import load_cue_table
from commentscope.similarity import HashedNgramEmbedder

ROOT = Path(__file__).resolve().parent.parent
FIXTURE_PATH = ROOT / "fixtures" / "pengyu.json"
ANNOTATED_PATH = ROOT / "fixtures" / "pengyu.annotated.json"
TRANSCRIPT_PATH = ROOT / "transcripts" / "pengyu.jsonl"


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(FIXTURE_PATH)


@pytest.fixture(scope="session")
def article(fixture_corpus):
    return fixture_corpus[0]


@pytest.fixture(scope="session")
def comments(fixture_corpus):
    return fixture_corpus[1]


@pytest.fixture(scope="session")
def embedder():
    return HashedNgramEmbedder()


@pytest.fixture(scope="session")
def cue_table():
    return load_cue_table()


@pytest.fixture(scope="session")
def indicator_table():
    return load_indicator_table()


@pytest.fixture()
def replay_config():
    return Config(chat_mode="replay", chat_transcript=str(TRANSCRIPT_PATH))


@pytest.fixture()
def replay_judge():
    return Judge(ReplayChatProvider(TRANSCRIPT_PATH))


def make_transcript(tmp_path: Path, entries: dict[str, str]) -> Path:
    """Write a replay transcript mapping full prompt text -> response text."""
    path = tmp_path / "transcript.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for prompt, response in entries.items():
            fh.write(
                json.dumps({"request_hash": request_hash(prompt), "response_text": response})
                + "\n"
            )
    return path
