"""Runtime configuration: thresholds, provider wiring, paths.

A single JSON file, overridable by environment variables prefixed CS_
(e.g. CS_TAU_SEM=0.7, CS_CHAT_ENDPOINT=http://...).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from commentscope.judge import ChatProvider, HttpChatProvider, Judge, ReplayChatProvider
from commentscope.similarity import EmbeddingProvider, HashedNgramEmbedder, HttpEmbeddingProvider


@dataclass
class Config:
    # thresholds
    tau_sem: float = 0.6
    tau_loc: float = 0.65
    tau_overlap: float = 0.7
    tau_conf: float = 0.5
    highlight_k: int = 3
    workers: int = 1

    # embedding provider
    embedding_mode: str = "local"  # local | http
    embedding_endpoint: str = ""
    embedding_dimension: int = 256
    embedding_token: str = ""

    # chat provider
    chat_mode: str = "none"  # none | replay | http
    chat_transcript: str = ""
    chat_endpoint: str = ""
    chat_model: str = ""
    chat_api_key: str = ""
    chat_max_in_flight: int = 4
    chat_timeout: float = 60.0
    chat_retries: int = 2

    # data tables (empty string = bundled defaults)
    cue_table_path: str = ""
    indicator_table_path: str = ""
    entity_cache_dir: str = ""

    # service
    listen_host: str = "127.0.0.1"
    listen_port: int = 8600

    def __post_init__(self):
        for name in ("tau_sem", "tau_loc", "tau_overlap", "tau_conf"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must be in (0,1), got {value}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def load_config(path: Optional[str | Path] = None) -> Config:
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text("utf-8"))
    cfg_fields = {f.name: f.type for f in fields(Config)}
    for name in cfg_fields:
        env_key = "CS_" + name.upper()
        if env_key in os.environ:
            raw[name] = os.environ[env_key]
    kwargs = {}
    for f in fields(Config):
        if f.name not in raw:
            continue
        value = raw[f.name]
        if f.type in ("float", float):
            value = float(value)
        elif f.type in ("int", int):
            value = int(value)
        else:
            value = str(value)
        kwargs[f.name] = value
    return Config(**kwargs)


def make_embedder(config: Config) -> EmbeddingProvider:
    if config.embedding_mode == "http":
        return HttpEmbeddingProvider(
            endpoint=config.embedding_endpoint,
            dimension=config.embedding_dimension,
            token=config.embedding_token or None,
        )
    return HashedNgramEmbedder(dimension=config.embedding_dimension)


def make_chat_provider(config: Config) -> Optional[ChatProvider]:
    if config.chat_mode == "replay":
        return ReplayChatProvider(config.chat_transcript)
    if config.chat_mode == "http":
        return HttpChatProvider(
            endpoint=config.chat_endpoint,
            model=config.chat_model,
            api_key=config.chat_api_key or None,
            timeout=config.chat_timeout,
            max_in_flight=config.chat_max_in_flight,
        )
    return None


def make_judge(config: Config, provider: Optional[ChatProvider] = None) -> Optional[Judge]:
    provider = provider if provider is not None else make_chat_provider(config)
    if provider is None:
        return None
    return Judge(provider, tau_conf=config.tau_conf, retries=config.chat_retries)
