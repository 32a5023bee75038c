"""Run configuration: built-in defaults, overlaid by a JSON file, overlaid by CLI flags."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import Decimal
from pathlib import Path

from .errors import ConfigError
from .evaluate import (
    DEFAULT_ALLOWLIST,
    DEFAULT_BLACKLIST,
    EvaluatorConfig,
    read_domain_list,
)
from .providers import Endpoint, Pricing

MODES = ("full", "no_interpret", "random_evidence", "direct")

# Service name -> environment variable prefix.
ENV_PREFIX = {
    "chat": "ALETHEIA_CHAT",
    "embed": "ALETHEIA_EMBED",
    "search_text": "ALETHEIA_SEARCH",
    "search_image": "ALETHEIA_IMAGE_SEARCH",
}


@dataclass(frozen=True)
class AppConfig:
    alpha: float = 0.5
    credibility_threshold: float = 0.5
    top_k: int = 5
    blacklist: str | None = None
    allowlist: str | None = None
    max_subclaims: int = 4
    per_query_limit: int = 10
    max_extract_chars: int = 12_000
    max_page_bytes: int = 2 * 1024 * 1024
    query_parallelism: int = 4
    extract_parallelism: int = 6
    claim_parallelism: int = 2
    mode: str = "full"
    replay: str | None = None
    record: str | None = None
    trace: bool = False
    seed: int = 0
    timeout: float = 30.0
    retries: int = 3
    backoff: float = 0.5
    template_dir: str | None = None
    label_map: str | None = None
    providers: dict = field(default_factory=dict)

    def __post_init__(self):
        problems = []
        if not 0.0 <= self.alpha <= 1.0:
            problems.append("alpha must lie in [0, 1]")
        if not 0.0 <= self.credibility_threshold <= 1.0:
            problems.append("credibility_threshold must lie in [0, 1]")
        for name in (
            "top_k", "max_subclaims", "per_query_limit", "max_extract_chars", "max_page_bytes",
            "query_parallelism", "extract_parallelism", "claim_parallelism", "retries",
        ):
            if int(getattr(self, name)) < 1:
                problems.append(f"{name} must be at least 1")
        if self.timeout <= 0 or self.backoff < 0:
            problems.append("timeout must be positive and backoff nonnegative")
        if self.mode not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}")
        if self.replay and self.record:
            problems.append("replay and record are mutually exclusive")
        if problems:
            raise ConfigError("; ".join(problems))

    def evaluator(self) -> EvaluatorConfig:
        return EvaluatorConfig(
            alpha=self.alpha,
            credibility_threshold=self.credibility_threshold,
            top_k=self.top_k,
            blacklist=read_domain_list(self.blacklist) if self.blacklist else DEFAULT_BLACKLIST,
            allowlist=read_domain_list(self.allowlist) if self.allowlist else DEFAULT_ALLOWLIST,
        )

    def endpoints(self, env: dict[str, str] | None = None) -> dict[str, Endpoint]:
        """Endpoint URLs from the config file or environment; keys from the environment only."""
        env = os.environ if env is None else env
        out = {}
        for service, prefix in ENV_PREFIX.items():
            spec = self.providers.get(service, {})
            url = spec.get("url") or env.get(f"{prefix}_URL")
            if not url:
                continue
            pricing = Pricing(
                per_call=Decimal(str(spec.get("per_call", "0"))),
                per_1k_prompt=Decimal(str(spec.get("per_1k_prompt", "0"))),
                per_1k_completion=Decimal(str(spec.get("per_1k_completion", "0"))),
            )
            out[service] = Endpoint(url, env.get(f"{prefix}_KEY"), pricing)
        return out

    def to_dict(self) -> dict:
        return asdict(self)


FIELD_NAMES = frozenset(f.name for f in fields(AppConfig))


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> AppConfig:
    cfg = AppConfig()
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(data) - FIELD_NAMES
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = _apply(cfg, data)
    if overrides:
        values = {k: v for k, v in overrides.items() if v is not None}
        # A cassette flag replaces the file's cassette setting rather than conflicting with it.
        if values.get("replay") and "record" not in values:
            values["record"] = None
        if values.get("record") and "replay" not in values:
            values["replay"] = None
        cfg = _apply(cfg, values)
    return cfg


def _apply(cfg: AppConfig, values: dict) -> AppConfig:
    try:
        return replace(cfg, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
