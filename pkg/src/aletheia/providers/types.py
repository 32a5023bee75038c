from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union
from urllib.parse import urlsplit

Role = Literal["system", "user", "assistant"]
Channel = Literal["text_search", "image_search"]
CHANNELS: tuple[Channel, ...] = ("text_search", "image_search")


@dataclass(frozen=True)
class ImageRef:
    """A local path or URL pointing at an image."""

    ref: str


Part = Union[str, ImageRef]


@dataclass(frozen=True)
class Message:
    role: Role
    parts: tuple[Part, ...]

    @classmethod
    def user(cls, *parts: Part) -> "Message":
        return cls("user", tuple(p for p in parts if p is not None))

    @classmethod
    def assistant(cls, text: str) -> "Message":
        return cls("assistant", (text,))

    @property
    def text(self) -> str:
        return "\n".join(p for p in self.parts if isinstance(p, str))


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("chat request needs at least one message")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must lie in [0, 1]")


def is_http_url(url: str) -> bool:
    parts = urlsplit(url)
    return parts.scheme in ("http", "https") and bool(parts.netloc)


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str = ""
    snippet: str = ""
    channel: Channel = "text_search"

    def __post_init__(self):
        if not is_http_url(self.url):
            raise ValueError(f"not an absolute http(s) URL: {self.url!r}")
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")

    def to_dict(self) -> dict:
        return {"url": self.url, "title": self.title, "snippet": self.snippet, "channel": self.channel}


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "dim", len(self.values))
        if self.dim == 0:
            raise ValueError("embedding vector is empty")

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))


@dataclass(frozen=True)
class RawDocument:
    url: str
    body: bytes
    content_type: str
