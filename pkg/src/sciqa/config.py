"""Pipeline configuration: dataclasses, TOML loading, env overrides.

Example config file:

    pipeline = "keyword-cosine"
    keywords = ["rna virus", "clinical"]
    top_n = 5

    [lda]
    topics = 20
    iterations = 500
    seed = 42

    [reader]
    kind = "baseline"

    [provider]
    kind = "builtin-tfidf"

QA_EMBED_ENDPOINT and QA_READER_ENDPOINT override the endpoint fields.
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import DataError

PIPELINE_KINDS = ("keyword-cosine", "lda-filter")
READER_KINDS = ("baseline", "external-extractive", "external-generative")
PROVIDER_KINDS = ("builtin-tfidf", "external")
LDA_RULES = ("threshold", "top-m")

ENV_EMBED_ENDPOINT = "QA_EMBED_ENDPOINT"
ENV_READER_ENDPOINT = "QA_READER_ENDPOINT"


@dataclass
class LdaConfig:
    topics: int = 20
    alpha: Optional[float] = None  # default 50 / topics
    beta: float = 0.01
    iterations: int = 500
    seed: int = 42
    min_tokens: int = 25
    fold_iterations: int = 50
    rule: str = "top-m"
    top_m: int = 10
    threshold: float = 0.5

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.topics

    def validate(self) -> None:
        if self.topics < 2:
            raise ValueError(f"lda.topics must be >= 2, got {self.topics}")
        if self.effective_alpha <= 0 or self.beta <= 0:
            raise ValueError("lda.alpha and lda.beta must be positive")
        if self.iterations < 1 or self.fold_iterations < 1:
            raise ValueError("lda iteration counts must be >= 1")
        if self.min_tokens < 1:
            raise ValueError(f"lda.min_tokens must be >= 1, got {self.min_tokens}")
        if self.rule not in LDA_RULES:
            raise ValueError(f"lda.rule must be one of {LDA_RULES}, got {self.rule!r}")


@dataclass
class ReaderConfig:
    kind: str = "baseline"
    endpoint: str = ""
    window_tokens: int = 15
    top_k: int = 3
    timeout: float = 30.0
    attempts: int = 3
    concurrency: int = 4

    def validate(self) -> None:
        if self.kind not in READER_KINDS:
            raise ValueError(f"reader.kind must be one of {READER_KINDS}, got {self.kind!r}")
        if self.kind.startswith("external") and not self.endpoint:
            raise ValueError(f"reader.kind {self.kind!r} requires reader.endpoint")
        if self.window_tokens < 1 or self.top_k < 1:
            raise ValueError("reader.window_tokens and reader.top_k must be >= 1")
        if self.concurrency < 1:
            raise ValueError(f"reader.concurrency must be >= 1, got {self.concurrency}")


@dataclass
class ProviderConfig:
    kind: str = "builtin-tfidf"
    endpoint: str = ""
    timeout: float = 30.0
    attempts: int = 3

    def validate(self) -> None:
        if self.kind not in PROVIDER_KINDS:
            raise ValueError(f"provider.kind must be one of {PROVIDER_KINDS}, got {self.kind!r}")
        if self.kind == "external" and not self.endpoint:
            raise ValueError("provider.kind 'external' requires provider.endpoint")


@dataclass
class PipelineConfig:
    pipeline: str = "keyword-cosine"
    keywords: List[str] = field(default_factory=list)
    keyword_mode: str = "any"
    top_n: int = 5
    lda: LdaConfig = field(default_factory=LdaConfig)
    reader: ReaderConfig = field(default_factory=ReaderConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def validate(self) -> None:
        if self.pipeline not in PIPELINE_KINDS:
            raise ValueError(f"pipeline must be one of {PIPELINE_KINDS}, got {self.pipeline!r}")
        if self.keyword_mode not in ("any", "all"):
            raise ValueError(f"keyword_mode must be 'any' or 'all', got {self.keyword_mode!r}")
        if self.top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {self.top_n}")
        if self.pipeline == "keyword-cosine" and not self.keywords:
            raise ValueError("keyword-cosine pipeline requires a non-empty keyword list")
        self.lda.validate()
        self.reader.validate()
        self.provider.validate()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "PipelineConfig":
        known = {"pipeline", "keywords", "keyword_mode", "top_n", "lda", "reader", "provider"}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        config = cls(
            pipeline=payload.get("pipeline", "keyword-cosine"),
            keywords=[str(k) for k in payload.get("keywords", [])],
            keyword_mode=payload.get("keyword_mode", "any"),
            top_n=int(payload.get("top_n", 5)),
            lda=_sub_config(LdaConfig, payload.get("lda", {})),
            reader=_sub_config(ReaderConfig, payload.get("reader", {})),
            provider=_sub_config(ProviderConfig, payload.get("provider", {})),
        )
        return config


def _sub_config(cls, payload: dict):
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(payload) - known
    if unknown:
        raise ValueError(f"unknown [{cls.__name__}] keys: {sorted(unknown)}")
    return cls(**payload)


def apply_env_overrides(config: PipelineConfig, env=os.environ) -> PipelineConfig:
    embed = env.get(ENV_EMBED_ENDPOINT)
    reader = env.get(ENV_READER_ENDPOINT)
    if embed:
        config.provider.endpoint = embed
    if reader:
        config.reader.endpoint = reader
    return config


def load_config(path, env=os.environ) -> PipelineConfig:
    """Parse a TOML config file, apply env overrides, and validate."""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            payload = tomllib.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"{path}: invalid config syntax: {exc}") from exc
    config = PipelineConfig.from_dict(payload)
    apply_env_overrides(config, env=env)
    config.validate()
    return config
