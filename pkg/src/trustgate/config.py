"""Service configuration: JSON file plus environment overrides.

Precedence is defaults < config file < environment. Environment variables
use the fixed names in ENV_VARS (prefix TRUSTGATE_); each maps to one leaf
setting, so keys containing underscores stay unambiguous. The engine needs
a co-occurrence corpus for attribute weights; embeddings either load from
a word2vec text file or derive from that same corpus.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .audit import AuditLog
from .embeddings import build_cooccurrence, derive_embeddings_from_cooccurrence, load_embeddings
from .engine import DecisionEngine, ResourcePolicy, Thresholds
from .scoring import ScoringConfig, ScoringFactors


class ConfigError(ValueError):
    pass


DEFAULT_LISTEN = "127.0.0.1:8470"
DEFAULT_COOCCURRENCE_WINDOW = 20


@dataclass(frozen=True)
class ServiceConfig:
    thresholds: Thresholds = field(default_factory=Thresholds)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    factors: ScoringFactors = field(default_factory=ScoringFactors)
    resources: ResourcePolicy = field(default_factory=ResourcePolicy)
    embedding_path: str | None = None
    corpus_path: str | None = None
    cooccurrence_window: int = DEFAULT_COOCCURRENCE_WINDOW
    audit_log_path: str = "audit.jsonl"
    listen: str = DEFAULT_LISTEN

    def validate(self) -> "ServiceConfig":
        self.thresholds.validate()
        self.scoring.validate()
        self.factors.validate()
        if self.corpus_path is None:
            raise ConfigError(
                "corpus_path is required: attribute weights always come from the co-occurrence corpus"
            )
        if self.cooccurrence_window < 1:
            raise ConfigError(f"cooccurrence_window must be >= 1, got {self.cooccurrence_window}")
        host, _, port = self.listen.rpartition(":")
        if not host or not port.isdigit() or not 0 < int(port) < 65536:
            raise ConfigError(f"listen must be host:port, got {self.listen!r}")
        return self

    @property
    def listen_host(self) -> str:
        return self.listen.rpartition(":")[0]

    @property
    def listen_port(self) -> int:
        return int(self.listen.rpartition(":")[2])


ENV_VARS = {
    "TRUSTGATE_CT_THRESHOLD": ("thresholds", "ct", float),
    "TRUSTGATE_BT_THRESHOLD": ("thresholds", "bt", float),
    "TRUSTGATE_COSINE_THRESHOLD": ("scoring", "cosine_threshold", float),
    "TRUSTGATE_NGRAM_ORDER": ("scoring", "ngram_order", int),
    "TRUSTGATE_WEIGHT_ORIENTATION": ("scoring", "weight_orientation", str),
    "TRUSTGATE_BT_A_MODE": ("scoring", "bt_a_mode", str),
    "TRUSTGATE_S1": ("factors", "s1", float),
    "TRUSTGATE_S2": ("factors", "s2", float),
    "TRUSTGATE_S3": ("factors", "s3", float),
    "TRUSTGATE_S4": ("factors", "s4", float),
    "TRUSTGATE_COMPUTE_ID": ("resources", "compute_id", int),
    "TRUSTGATE_STORAGE_ID": ("resources", "storage_id", int),
    "TRUSTGATE_EXPIRY": ("resources", "expiry", int),
    "TRUSTGATE_CONSTRAINT_FLAGS": ("resources", "constraint_flags", int),
    "TRUSTGATE_EMBEDDING_PATH": (None, "embedding_path", str),
    "TRUSTGATE_CORPUS_PATH": (None, "corpus_path", str),
    "TRUSTGATE_COOCCURRENCE_WINDOW": (None, "cooccurrence_window", int),
    "TRUSTGATE_AUDIT_LOG_PATH": (None, "audit_log_path", str),
    "TRUSTGATE_LISTEN": (None, "listen", str),
}


def _from_file(raw: dict) -> ServiceConfig:
    try:
        thresholds_raw = raw.get("thresholds", {})
        scoring_raw = {}
        if "cosine" in thresholds_raw:
            scoring_raw["cosine_threshold"] = float(thresholds_raw["cosine"])
        for key, target in (
            ("ngram_order", "ngram_order"),
            ("weight_orientation", "weight_orientation"),
            ("bt_a_mode", "bt_a_mode"),
        ):
            if key in raw:
                scoring_raw[target] = raw[key]
        factors_raw = raw.get("scoring_factors")
        resources_raw = raw.get("resources", {})
        return ServiceConfig(
            thresholds=Thresholds(
                ct=float(thresholds_raw.get("ct", Thresholds.ct)),
                bt=float(thresholds_raw.get("bt", Thresholds.bt)),
            ),
            scoring=ScoringConfig(**scoring_raw),
            factors=(
                ScoringFactors(*[float(v) for v in factors_raw])
                if factors_raw is not None
                else ScoringFactors()
            ),
            resources=ResourcePolicy(
                compute_id=int(resources_raw.get("compute_id", 0)),
                storage_id=int(resources_raw.get("storage_id", 0)),
                expiry=int(resources_raw.get("expiry", ResourcePolicy.expiry)),
                constraint_flags=int(resources_raw.get("constraint_flags", 0)),
            ),
            embedding_path=raw.get("embedding_path"),
            corpus_path=raw.get("corpus_path"),
            cooccurrence_window=int(raw.get("cooccurrence_window", DEFAULT_COOCCURRENCE_WINDOW)),
            audit_log_path=raw.get("audit_log_path", "audit.jsonl"),
            listen=raw.get("listen", DEFAULT_LISTEN),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config file: {exc}") from exc


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Load and validate configuration; aborts (raises) on invalid input."""
    env = os.environ if env is None else env
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        config = _from_file(raw)
    else:
        config = ServiceConfig()

    for var, (section, attr, cast) in ENV_VARS.items():
        if var not in env:
            continue
        try:
            value = cast(env[var])
        except ValueError as exc:
            raise ConfigError(f"environment override {var}={env[var]!r}: {exc}") from exc
        if section is None:
            config = replace(config, **{attr: value})
        else:
            inner = replace(getattr(config, section), **{attr: value})
            config = replace(config, **{section: inner})
    return config.validate()


def config_to_json_dict(config: ServiceConfig) -> dict:
    return {
        "thresholds": {
            "ct": config.thresholds.ct,
            "bt": config.thresholds.bt,
            "cosine": config.scoring.cosine_threshold,
        },
        "scoring_factors": [
            config.factors.s1, config.factors.s2, config.factors.s3, config.factors.s4,
        ],
        "bt_a_mode": config.scoring.bt_a_mode,
        "ngram_order": config.scoring.ngram_order,
        "weight_orientation": config.scoring.weight_orientation,
        "embedding_path": config.embedding_path,
        "corpus_path": config.corpus_path,
        "cooccurrence_window": config.cooccurrence_window,
        "audit_log_path": config.audit_log_path,
        "listen": config.listen,
        "resources": {
            "compute_id": config.resources.compute_id,
            "storage_id": config.resources.storage_id,
            "expiry": config.resources.expiry,
            "constraint_flags": config.resources.constraint_flags,
        },
    }


def build_engine(config: ServiceConfig) -> DecisionEngine:
    """Construct the shared scoring state the config describes."""
    from .datasynth import read_corpus
    from .textnorm import tokenize

    config.validate()
    corpus = read_corpus(Path(config.corpus_path))
    model = build_cooccurrence([tokenize(line) for line in corpus], config.cooccurrence_window)
    if config.embedding_path:
        with open(config.embedding_path, "r", encoding="utf-8") as handle:
            store = load_embeddings(handle)
    else:
        store = derive_embeddings_from_cooccurrence(model)
    return DecisionEngine(
        store=store,
        model=model,
        scoring_config=config.scoring,
        thresholds=config.thresholds,
        factors=config.factors,
        resources=config.resources,
    )


def open_audit_log(config: ServiceConfig) -> AuditLog:
    return AuditLog(config.audit_log_path)
