from .cassette import Cassette, RecordingTransport, ReplayTransport, fingerprint
from .session import CostMeter, ProviderSession
from .transport import Endpoint, LiveTransport, Pricing, Reply, RetryPolicy, Transport
from .types import (
    ChatRequest,
    EmbeddingVector,
    ImageRef,
    Message,
    RawDocument,
    SearchResult,
)

__all__ = [
    "Cassette",
    "ChatRequest",
    "CostMeter",
    "EmbeddingVector",
    "Endpoint",
    "ImageRef",
    "LiveTransport",
    "Message",
    "Pricing",
    "ProviderSession",
    "RawDocument",
    "RecordingTransport",
    "ReplayTransport",
    "Reply",
    "RetryPolicy",
    "SearchResult",
    "Transport",
    "fingerprint",
]
