"""Typed provider calls on top of a transport, with per-run cost metering."""

from __future__ import annotations

import base64
import mimetypes
import threading
from decimal import Decimal
from pathlib import Path

from ..core import BUCKETS, CostLedger
from ..errors import FetchFailed, MalformedResponse, OversizeBody
from .transport import Transport
from .types import (
    Channel,
    ChatRequest,
    EmbeddingVector,
    ImageRef,
    RawDocument,
    SearchResult,
    is_http_url,
)

DEFAULT_MAX_PAGE_BYTES = 2 * 1024 * 1024


class CostMeter:
    """Thread-safe accumulator for the three cost buckets of one run."""

    def __init__(self):
        self._lock = threading.Lock()
        self._totals = {b: Decimal(0) for b in BUCKETS}

    def charge(self, bucket: str, amount: Decimal) -> None:
        if bucket not in self._totals:
            raise ValueError(f"unknown cost bucket {bucket!r}")
        with self._lock:
            self._totals[bucket] += amount

    def ledger(self) -> CostLedger:
        with self._lock:
            return CostLedger(self._totals["retrieve"], self._totals["summarize"], self._totals["verify"])


def image_payload(ref: str) -> str:
    """URLs pass through; local files are inlined as data URIs."""
    if is_http_url(ref) or ref.startswith("data:"):
        return ref
    path = Path(ref)
    if not path.is_file():
        raise ValueError(f"image not found: {ref}")
    mime = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
    return f"data:{mime};base64," + base64.b64encode(path.read_bytes()).decode("ascii")


def chat_payload(req: ChatRequest) -> dict:
    messages = []
    for m in req.messages:
        content = []
        for part in m.parts:
            if isinstance(part, ImageRef):
                content.append({"type": "image", "image": image_payload(part.ref)})
            else:
                content.append({"type": "text", "text": part})
        messages.append({"role": m.role, "content": content})
    return {"messages": messages, "temperature": req.temperature}


class ProviderSession:
    """One pipeline run's view of the providers.

    Every call charges its cost to exactly one bucket of the session's meter.
    """

    def __init__(
        self,
        transport: Transport,
        meter: CostMeter | None = None,
        *,
        max_page_bytes: int = DEFAULT_MAX_PAGE_BYTES,
    ):
        self.transport = transport
        self.meter = meter or CostMeter()
        self.max_page_bytes = max_page_bytes
        self._dim: int | None = None
        self._dim_lock = threading.Lock()

    def chat(self, req: ChatRequest, *, bucket: str) -> str:
        reply = self.transport.send("chat", chat_payload(req))
        text = reply.body.get("text")
        if not isinstance(text, str):
            raise MalformedResponse("chat response has no text field")
        self.meter.charge(bucket, reply.cost)
        return text

    def embed(self, texts: list[str], *, bucket: str = "retrieve") -> list[EmbeddingVector]:
        if not texts or any(not t for t in texts):
            raise ValueError("embed needs a nonempty list of nonempty strings")
        reply = self.transport.send("embed", {"inputs": list(texts)})
        raw = reply.body.get("vectors")
        if not isinstance(raw, list) or len(raw) != len(texts):
            raise MalformedResponse("embedding response does not match the inputs")
        try:
            vectors = [EmbeddingVector(v) for v in raw]
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad embedding vector: {exc}") from exc
        dims = {v.dim for v in vectors}
        with self._dim_lock:
            if self._dim is not None:
                dims.add(self._dim)
            if len(dims) != 1:
                raise MalformedResponse(f"inconsistent embedding dimensions {sorted(dims)}")
            self._dim = dims.pop()
        self.meter.charge(bucket, reply.cost)
        return vectors

    def search_text(self, query: str, limit: int) -> list[SearchResult]:
        if not query.strip():
            raise ValueError("search query is empty")
        return self._search("search_text", {"query": query, "limit": limit}, limit, "text_search")

    def search_image(self, image: str, limit: int) -> list[SearchResult]:
        return self._search(
            "search_image", {"image": image_payload(image), "limit": limit}, limit, "image_search"
        )

    def _search(self, service: str, payload: dict, limit: int, channel: Channel) -> list[SearchResult]:
        if limit < 1:
            raise ValueError("search limit must be at least 1")
        reply = self.transport.send(service, payload)
        raw = reply.body.get("results")
        if not isinstance(raw, list):
            raise MalformedResponse(f"{service} response has no results list")
        self.meter.charge("retrieve", reply.cost)
        seen: set[str] = set()
        results = []
        for item in raw:
            url = item.get("url", "") if isinstance(item, dict) else ""
            if not is_http_url(url) or url in seen:
                continue
            seen.add(url)
            results.append(
                SearchResult(url, item.get("title") or "", item.get("snippet") or "", channel)
            )
            if len(results) == limit:
                break
        return results

    def fetch_page(self, url: str) -> RawDocument:
        if not is_http_url(url):
            raise ValueError(f"not an absolute http(s) URL: {url!r}")
        reply = self.transport.send("fetch", {"url": url, "max_bytes": self.max_page_bytes})
        body = reply.body
        status = int(body.get("status", 0))
        if body.get("oversize"):
            raise OversizeBody(f"{url}: body exceeds {self.max_page_bytes} bytes")
        if status == 0 or status >= 400:
            raise FetchFailed(f"{url}: {body.get('error') or f'HTTP {status}'}")
        data = base64.b64decode(body.get("body_b64", ""))
        if len(data) > self.max_page_bytes:
            raise OversizeBody(f"{url}: body exceeds {self.max_page_bytes} bytes")
        self.meter.charge("summarize", reply.cost)
        return RawDocument(url, data, body.get("content_type", ""))
