"""A small deterministic stand-in for the web, the search engines, the LLM and the embedder.

Tests use it directly as a transport, and ``build_cassettes.py`` records the
shipped cassettes from it.
"""

from __future__ import annotations

import base64
import hashlib
import math
import threading
import time
from dataclasses import dataclass, field
from decimal import Decimal

from aletheia.errors import ProviderUnavailable
from aletheia.providers import Reply

CHAT_COST = Decimal("0.0025")
EMBED_COST = Decimal("0.0001")
SEARCH_COST = Decimal("0.005")

INTERPRET_MARK = "You are a multimodal misinformation interpreter"
SUMMARIZE_MARK = "Please summarize the provided article"
INIT_MARK = "I will give you a claim to verify"
UPLOAD_MARK = "The following list is the evidence related to the claim"
VERIFY_MARK = "Verify the claim based on the evidence that I provided to you"
DIRECT_MARK = "Please verify the following claim."


def unit_vector(r: float, dim: int = 4) -> list[float]:
    """A vector whose cosine with e1 is r."""
    return [r, math.sqrt(1.0 - r * r)] + [0.0] * (dim - 2)


def hashed_vector(text: str, dim: int = 4) -> list[float]:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return [(b + 1) / 256 for b in digest[:dim]]


@dataclass
class Page:
    url: str
    title: str
    paragraphs: list[str]
    extraction: str
    status: int = 200
    content_type: str = "text/html; charset=utf-8"

    def html(self) -> str:
        body = "\n".join(f"<p>{p}</p>" for p in self.paragraphs)
        return (
            "<!doctype html><html><head><title>{t}</title>"
            "<script>var tracking = 1;</script><style>p {{ margin: 0 }}</style></head>"
            "<body><header><a href='/'>Home</a> <a href='/news'>News</a></header>"
            "<nav><ul><li>World</li><li>Politics</li><li>Subscribe</li></ul></nav>"
            "<main><article><h1>{t}</h1>\n{b}</article></main>"
            "<aside>Advertisement: buy gold now</aside>"
            "<footer>Copyright 2024. All rights reserved. Privacy policy.</footer>"
            "</body></html>"
        ).format(t=self.title, b=body)


@dataclass
class ClaimScript:
    """How the fake LLM answers about one claim."""

    text: str
    interpretation: str = ""
    verdict: str = ""
    verdict_without_evidence: str = ""
    direct: str = ""


@dataclass
class World:
    pages: dict[str, Page] = field(default_factory=dict)
    text_results: dict[str, list[str]] = field(default_factory=dict)
    image_results: dict[str, list[str]] = field(default_factory=dict)
    claims: list[ClaimScript] = field(default_factory=list)
    vectors: dict[str, list[float]] = field(default_factory=dict)
    latency: dict[str, float] = field(default_factory=dict)
    failing: set[str] = field(default_factory=set)
    sleep: bool = False
    calls: list[tuple[str, dict]] = field(default_factory=list)

    def __post_init__(self):
        self._lock = threading.Lock()

    def count(self, service: str) -> int:
        return sum(1 for s, _ in self.calls if s == service)

    def payloads(self, service: str) -> list[dict]:
        return [p for s, p in self.calls if s == service]

    # Transport protocol
    def send(self, service: str, payload: dict) -> Reply:
        with self._lock:
            self.calls.append((service, payload))
        if service in self.failing:
            raise ProviderUnavailable(f"{service} is down")
        delay = self.latency.get(service, 0.0)
        if self.sleep and delay:
            time.sleep(delay)
        handler = getattr(self, f"_{service}")
        body, cost = handler(payload)
        return Reply(body, cost, delay)

    def _search_text(self, payload):
        urls = self.text_results.get(payload["query"], [])[: payload["limit"]]
        return {"results": [self._result(u) for u in urls]}, SEARCH_COST

    def _search_image(self, payload):
        urls = self.image_results.get(payload["image"], [])[: payload["limit"]]
        return {"results": [self._result(u) for u in urls]}, SEARCH_COST

    def _result(self, url: str) -> dict:
        page = self.pages.get(url)
        title = page.title if page else url
        snippet = page.paragraphs[0][:160] if page and page.paragraphs else ""
        return {"url": url, "title": title, "snippet": snippet}

    def _fetch(self, payload):
        page = self.pages.get(payload["url"])
        if page is None:
            return {"status": 404, "content_type": "text/html"}, Decimal(0)
        if page.status >= 400:
            return {"status": page.status, "content_type": page.content_type}, Decimal(0)
        body = page.html().encode("utf-8")
        return {
            "status": page.status,
            "content_type": page.content_type,
            "body_b64": base64.b64encode(body).decode("ascii"),
        }, Decimal(0)

    def _embed(self, payload):
        return {"vectors": [self.vectors.get(t) or hashed_vector(t) for t in payload["inputs"]]}, EMBED_COST

    def _chat(self, payload):
        assert payload["temperature"] == 0, "pipeline chat calls must run at temperature 0"
        messages = payload["messages"]
        first = _text(messages[0])
        last = _text(messages[-1])
        return {"text": self._answer(first, last, messages)}, CHAT_COST

    def _claim_for(self, prompt: str) -> ClaimScript:
        matches = [c for c in self.claims if c.text and f"Text: {c.text}\n" in prompt + "\n"]
        if not matches:
            raise AssertionError(f"world has no script for prompt: {prompt[:200]!r}")
        return max(matches, key=lambda c: len(c.text))

    def _answer(self, first: str, last: str, messages: list[dict]) -> str:
        if INTERPRET_MARK in first:
            return self._claim_for(first).interpretation
        if SUMMARIZE_MARK in first:
            article = first.split("Article:\n", 1)[1].strip()
            heading = article.split("\n", 1)[0]
            for page in self.pages.values():
                if page.title == heading:
                    return page.extraction
            return "I could not find an article."
        if DIRECT_MARK in first:
            return self._claim_for(first).direct
        if INIT_MARK in first:
            if UPLOAD_MARK in last:
                return "Noted. I will wait for the next instruction."
            if VERIFY_MARK in last:
                script = self._claim_for(first)
                uploaded = any(UPLOAD_MARK in _text(m) for m in messages)
                if not uploaded and script.verdict_without_evidence:
                    return script.verdict_without_evidence
                return script.verdict
            return "Understood. I have memorized the claim."
        raise AssertionError(f"unexpected chat prompt: {first[:200]!r}")


def _text(message: dict) -> str:
    return "\n".join(p["text"] for p in message["content"] if p["type"] == "text")
