"""HTTP + JSON transport to the external services.

Every provider speaks the same wire shape: a service name plus a JSON payload
in, a JSON body plus a cost out. Record/replay sits at this layer, so the
clients above never know whether they talk to the network or a cassette.
"""

from __future__ import annotations

import base64
import logging
import time
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Callable, Protocol

import httpx

from ..errors import MalformedResponse, ProviderUnavailable

log = logging.getLogger(__name__)

SERVICES = ("chat", "embed", "search_text", "search_image", "fetch")


@dataclass(frozen=True)
class Reply:
    body: dict
    cost: Decimal = Decimal(0)
    latency: float = 0.0


class Transport(Protocol):
    def send(self, service: str, payload: dict) -> Reply: ...


@dataclass(frozen=True)
class Pricing:
    """USD prices; token prices are per 1,000 tokens."""

    per_call: Decimal = Decimal(0)
    per_1k_prompt: Decimal = Decimal(0)
    per_1k_completion: Decimal = Decimal(0)

    def cost(self, body: dict) -> Decimal:
        if "cost" in body:
            return Decimal(str(body["cost"]))
        usage = body.get("usage") or {}
        prompt = Decimal(int(usage.get("prompt_tokens", 0)))
        completion = Decimal(int(usage.get("completion_tokens", 0)))
        return (
            self.per_call
            + prompt * self.per_1k_prompt / 1000
            + completion * self.per_1k_completion / 1000
        )


@dataclass(frozen=True)
class Endpoint:
    url: str
    key: str | None = None
    pricing: Pricing = field(default_factory=Pricing)


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    backoff: float = 0.5

    def delay(self, attempt: int) -> float:
        return self.backoff * (2**attempt)


_RETRYABLE_STATUS = {408, 425, 429, 500, 502, 503, 504}


class LiveTransport:
    """Talks to real endpoints over HTTP.

    Safe to share across threads: httpx.Client is thread-safe and no other
    state is mutated after construction.
    """

    def __init__(
        self,
        endpoints: dict[str, Endpoint],
        *,
        timeout: float = 30.0,
        retry: RetryPolicy = RetryPolicy(),
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoints = endpoints
        self.retry = retry
        self._client = client or httpx.Client(timeout=timeout, follow_redirects=True)
        self._sleep = sleep

    def close(self) -> None:
        self._client.close()

    def send(self, service: str, payload: dict) -> Reply:
        last_error: Exception | None = None
        for attempt in range(self.retry.attempts):
            if attempt:
                self._sleep(self.retry.delay(attempt - 1))
            started = time.perf_counter()
            try:
                if service == "fetch":
                    body = self._fetch(payload)
                    cost = Decimal(0)
                else:
                    body, cost = self._post(service, payload)
            except _Retryable as exc:
                last_error = exc.__cause__ or exc
                log.warning("%s attempt %d failed: %s", service, attempt + 1, last_error)
                continue
            return Reply(body, cost, time.perf_counter() - started)
        raise ProviderUnavailable(
            f"{service}: giving up after {self.retry.attempts} attempts: {last_error}"
        )

    def _post(self, service: str, payload: dict) -> tuple[dict, Decimal]:
        endpoint = self.endpoints.get(service)
        if endpoint is None:
            raise ProviderUnavailable(f"no endpoint configured for {service!r}")
        headers = {"Authorization": f"Bearer {endpoint.key}"} if endpoint.key else {}
        try:
            resp = self._client.post(endpoint.url, json=payload, headers=headers)
        except httpx.TransportError as exc:
            raise _Retryable() from exc
        if resp.status_code in _RETRYABLE_STATUS:
            raise _Retryable() from ProviderUnavailable(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderUnavailable(f"{service}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"{service}: response is not JSON") from exc
        if not isinstance(body, dict):
            raise MalformedResponse(f"{service}: response is not a JSON object")
        return body, endpoint.pricing.cost(body)

    def _fetch(self, payload: dict) -> dict:
        url = payload["url"]
        cap = int(payload.get("max_bytes", 2 * 1024 * 1024))
        try:
            with self._client.stream("GET", url) as resp:
                content_type = resp.headers.get("content-type", "")
                if resp.status_code >= 400:
                    return {"status": resp.status_code, "content_type": content_type}
                chunks, size = [], 0
                for chunk in resp.iter_bytes():
                    size += len(chunk)
                    if size > cap:
                        return {"status": resp.status_code, "content_type": content_type, "oversize": True}
                    chunks.append(chunk)
        except httpx.TimeoutException as exc:
            return {"status": 0, "content_type": "", "error": f"timeout: {exc}"}
        except httpx.TransportError as exc:
            raise _Retryable() from exc
        body = b"".join(chunks)
        return {
            "status": resp.status_code,
            "content_type": content_type,
            "body_b64": base64.b64encode(body).decode("ascii"),
        }


class _Retryable(Exception):
    pass
