"""Domain types shared across the pipeline and the verdict label mapping."""

from __future__ import annotations

import datetime as dt
import enum
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from .errors import UnknownLabel

_WS = re.compile(r"\s+")


class BinaryLabel(enum.Enum):
    TRUE = "true"
    FALSE = "false"

    @classmethod
    def from_bool(cls, value: bool) -> "BinaryLabel":
        return cls.TRUE if value else cls.FALSE


@dataclass(frozen=True)
class Claim:
    id: str
    text: str = ""
    image: str | None = None
    gold_label: BinaryLabel | None = None
    published_at: dt.date | None = None

    def __post_init__(self):
        if not self.text.strip() and not self.image:
            raise ValueError(f"claim {self.id!r} has neither text nor image")

    @property
    def has_image(self) -> bool:
        return bool(self.image)


def normalize_claim(raw_text: str) -> str:
    return _WS.sub(" ", raw_text).strip()


def normalize_label(raw: str) -> str:
    """Lowercase, treat hyphens as spaces and collapse whitespace."""
    return _WS.sub(" ", raw.replace("-", " ")).strip().lower()


# Fact-checker verdict strings, as published by the agencies.
VERDICT_TRUE_LABELS = (
    "Accurate",
    "Mostly-Accurate",
    "Correct",
    "Partially-Correct",
    "Mostly correct",
    "Partially True",
    "Mostly True",
    "True",
)
VERDICT_FALSE_LABELS = (
    "Misleading",
    "Missing Context",
    "Altered",
    "Synthetic Media",
    "Miscapthioned",
    "Satire",
    "Fake News",
    "Inaccurate",
    "Incorrect",
    "Likely False",
    "Misrepresented",
    "Missing Context",
    "Mostly False",
)
# Identity label for datasets that are already binary, plus the correct
# spelling of the misspelled "Miscapthioned" entry.
EXTRA_FALSE = ("False", "Miscaptioned")


@dataclass(frozen=True)
class LabelMap:
    true_set: frozenset[str]
    false_set: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "true_set", frozenset(normalize_label(s) for s in self.true_set))
        object.__setattr__(self, "false_set", frozenset(normalize_label(s) for s in self.false_set))
        overlap = self.true_set & self.false_set
        if overlap:
            raise ValueError(f"labels in both sets: {sorted(overlap)}")

    @classmethod
    def default(cls) -> "LabelMap":
        return cls(frozenset(VERDICT_TRUE_LABELS), frozenset(VERDICT_FALSE_LABELS + EXTRA_FALSE))

    @classmethod
    def from_json(cls, path: str | Path) -> "LabelMap":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(frozenset(data["true_labels"]), frozenset(data["false_labels"]))

    def lookup(self, raw: str) -> BinaryLabel:
        return map_verdict_label(raw, self)


DEFAULT_LABEL_MAP = LabelMap.default()


def map_verdict_label(raw: str, label_map: LabelMap = DEFAULT_LABEL_MAP) -> BinaryLabel:
    if not raw or not raw.strip():
        raise ValueError("verdict label must be nonempty")
    key = normalize_label(raw)
    if key in label_map.true_set:
        return BinaryLabel.TRUE
    if key in label_map.false_set:
        return BinaryLabel.FALSE
    raise UnknownLabel(f"unmapped verdict label: {raw!r}")


@dataclass(frozen=True)
class StageTimings:
    """Per-stage wall time in seconds; the total is always the sum of the stages."""

    t_retrieve: float = 0.0
    t_summarize: float = 0.0
    t_verify: float = 0.0
    t_total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "t_total", self.t_retrieve + self.t_summarize + self.t_verify)

    def to_dict(self) -> dict:
        return {
            "retrieve": self.t_retrieve,
            "summarize": self.t_summarize,
            "verify": self.t_verify,
            "total": self.t_total,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageTimings":
        return cls(d.get("retrieve", 0.0), d.get("summarize", 0.0), d.get("verify", 0.0))


BUCKETS = ("retrieve", "summarize", "verify")


@dataclass(frozen=True)
class CostLedger:
    """Invocation cost in USD, kept as fixed-point decimals so the total is exact."""

    cost_retrieve: Decimal = Decimal(0)
    cost_summarize: Decimal = Decimal(0)
    cost_verify: Decimal = Decimal(0)
    cost_total: Decimal = field(init=False)

    def __post_init__(self):
        for name in ("cost_retrieve", "cost_summarize", "cost_verify"):
            value = Decimal(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} is negative")
            object.__setattr__(self, name, value)
        object.__setattr__(
            self, "cost_total", self.cost_retrieve + self.cost_summarize + self.cost_verify
        )

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.cost_retrieve + other.cost_retrieve,
            self.cost_summarize + other.cost_summarize,
            self.cost_verify + other.cost_verify,
        )

    def to_dict(self) -> dict:
        return {
            "retrieve": str(self.cost_retrieve),
            "summarize": str(self.cost_summarize),
            "verify": str(self.cost_verify),
            "total": str(self.cost_total),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CostLedger":
        return cls(
            Decimal(d.get("retrieve", "0")),
            Decimal(d.get("summarize", "0")),
            Decimal(d.get("verify", "0")),
        )
