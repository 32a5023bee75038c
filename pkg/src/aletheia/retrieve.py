"""Candidate source location: text search per sub-claim plus reverse image search."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core import Claim
from .errors import AletheiaError, RetrievalEmpty
from .interpret import InterpretationResult
from .providers import ProviderSession, SearchResult

log = logging.getLogger(__name__)

DEFAULT_PER_QUERY_LIMIT = 10
DEFAULT_QUERY_PARALLELISM = 4


@dataclass(frozen=True)
class CandidatePool:
    candidates: tuple[SearchResult, ...]
    per_channel_counts: dict[str, int]
    failures: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    @property
    def urls(self) -> list[str]:
        return [c.url for c in self.candidates]

    def to_dict(self) -> dict:
        return {
            "candidates": [c.to_dict() for c in self.candidates],
            "per_channel_counts": dict(self.per_channel_counts),
            "failures": list(self.failures),
        }


def merge_results(
    text_results: list[list[SearchResult]], image_results: list[SearchResult]
) -> CandidatePool:
    """Interleave text results round-robin by rank, then append image results.

    The first occurrence of a URL wins.
    """
    ordered: list[SearchResult] = []
    depth = max((len(r) for r in text_results), default=0)
    for rank in range(depth):
        for results in text_results:
            if rank < len(results):
                ordered.append(results[rank])
    ordered.extend(image_results)

    seen: set[str] = set()
    merged = []
    counts = {"text_search": 0, "image_search": 0}
    for r in ordered:
        if r.url in seen:
            continue
        seen.add(r.url)
        merged.append(r)
        counts[r.channel] += 1
    return CandidatePool(tuple(merged), counts)


def locate_candidates(
    interp: InterpretationResult,
    claim: Claim,
    session: ProviderSession,
    per_query_limit: int = DEFAULT_PER_QUERY_LIMIT,
    *,
    query_parallelism: int = DEFAULT_QUERY_PARALLELISM,
) -> CandidatePool:
    if per_query_limit < 1:
        raise ValueError("per_query_limit must be at least 1")
    queries = interp.queries
    if not queries and not claim.has_image:
        raise ValueError("nothing to search: no queries and no image")

    failures: list[str] = []

    def text_channel() -> list[list[SearchResult]]:
        def one(query: str) -> list[SearchResult] | None:
            try:
                return session.search_text(query, per_query_limit)
            except (AletheiaError, ValueError) as exc:
                log.warning("text search failed for %r: %s", query, exc)
                failures.append(f"text_search {query!r}: {exc}")
                return None

        if not queries:
            return []
        with ThreadPoolExecutor(max_workers=min(query_parallelism, len(queries))) as pool:
            return list(pool.map(one, queries))

    def image_channel() -> list[SearchResult] | None:
        try:
            return session.search_image(claim.image, per_query_limit)
        except (AletheiaError, ValueError) as exc:
            log.warning("image search failed for %s: %s", claim.image, exc)
            failures.append(f"image_search {claim.image}: {exc}")
            return None

    with ThreadPoolExecutor(max_workers=2) as channels:
        text_future = channels.submit(text_channel)
        image_future = channels.submit(image_channel) if claim.has_image else None
        text_lists = text_future.result()
        image_list = image_future.result() if image_future else []

    succeeded = [r for r in text_lists if r is not None]
    succeeded_count = len(succeeded) + (1 if claim.has_image and image_list is not None else 0)
    if succeeded_count == 0:
        raise RetrievalEmpty(f"claim {claim.id}: every search call failed: {'; '.join(failures)}")

    pool = merge_results(succeeded, image_list or [])
    return CandidatePool(pool.candidates, pool.per_channel_counts, tuple(sorted(failures)))
