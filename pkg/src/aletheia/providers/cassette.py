"""Request/response cassettes for deterministic offline runs."""

from __future__ import annotations

import copy
import hashlib
import json
import threading
import time
from decimal import Decimal
from pathlib import Path
from typing import Callable

from ..errors import ProviderUnavailable
from .transport import Reply, Transport

# Fields that vary between otherwise identical requests.
VOLATILE_FIELDS = frozenset({"request_id", "timestamp", "api_key", "user"})

FORMAT_VERSION = 1


def _strip_volatile(value):
    if isinstance(value, dict):
        return {k: _strip_volatile(v) for k, v in value.items() if k not in VOLATILE_FIELDS}
    if isinstance(value, list):
        return [_strip_volatile(v) for v in value]
    return value


def canonical_json(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fingerprint(service: str, payload: dict) -> str:
    blob = service + "\n" + canonical_json(_strip_volatile(payload))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Cassette:
    """Fingerprint-keyed store of recorded provider exchanges.

    Reads are lock-free; appends are serialized.
    """

    def __init__(self, entries: dict[str, dict] | None = None, path: Path | None = None):
        self.entries: dict[str, dict] = dict(entries or {})
        self.path = path
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path) -> "Cassette":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported cassette version {data.get('version')!r}")
        return cls(data["entries"], path)

    @classmethod
    def open_or_new(cls, path: str | Path) -> "Cassette":
        path = Path(path)
        return cls.load(path) if path.exists() else cls(path=path)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, service: str, payload: dict) -> dict | None:
        return self.entries.get(fingerprint(service, payload))

    def add(self, service: str, payload: dict, reply: Reply) -> None:
        entry = {
            "service": service,
            "request": _strip_volatile(payload),
            "response": reply.body,
            "latency": round(reply.latency, 6),
            "cost": str(reply.cost),
        }
        with self._lock:
            self.entries[fingerprint(service, payload)] = entry

    def dumps(self) -> str:
        with self._lock:
            doc = {"version": FORMAT_VERSION, "entries": dict(sorted(self.entries.items()))}
        return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"

    def save(self, path: str | Path | None = None) -> Path:
        target = Path(path or self.path)
        if target is None:
            raise ValueError("cassette has no path")
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.dumps(), encoding="utf-8")
        return target


class ReplayTransport:
    """Strict replay: any request not in the cassette is a provider failure."""

    def __init__(
        self,
        cassette: Cassette,
        *,
        simulate_latency: bool = False,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cassette = cassette
        self.simulate_latency = simulate_latency
        self._sleep = sleep

    def send(self, service: str, payload: dict) -> Reply:
        entry = self.cassette.get(service, payload)
        if entry is None:
            raise ProviderUnavailable(
                f"{service}: request {fingerprint(service, payload)[:12]} not in cassette"
            )
        latency = float(entry.get("latency", 0.0))
        if self.simulate_latency and latency > 0:
            self._sleep(latency)
        return Reply(copy.deepcopy(entry["response"]), Decimal(entry.get("cost", "0")), latency)


class RecordingTransport:
    def __init__(self, inner: Transport, cassette: Cassette):
        self.inner = inner
        self.cassette = cassette

    def send(self, service: str, payload: dict) -> Reply:
        reply = self.inner.send(service, payload)
        self.cassette.add(service, payload, reply)
        return reply
