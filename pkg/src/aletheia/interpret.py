"""Claim interpretation: turn a multimodal claim into sub-claims and search queries."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .core import Claim, normalize_claim
from .errors import EmptyClaimText, InterpretationParseError
from .prompts import DEFAULT_PROMPTS, PromptLibrary
from .providers import ChatRequest, ImageRef, Message, ProviderSession

log = logging.getLogger(__name__)

MAX_QUERY_CHARS = 256
DEFAULT_MAX_SUBCLAIMS = 4

_SUBCLAIM = re.compile(r"^\s*(\d+)\s*[.)]\s*sub[- ]?claim\s*:\s*(.*?)\s*$", re.I)
_QUERY = re.compile(r"^\s*query\s*:\s*(.*?)\s*$", re.I)
_IMAGE_NOTES = re.compile(r"^\s*image\s+notes\s*:\s*(.*?)\s*$", re.I)

_GRAMMAR = "1. Sub-claim: <one factual statement>\n   Query: <search query>"


@dataclass(frozen=True)
class SubClaim:
    statement: str
    query: str

    def __post_init__(self):
        if not self.statement.strip() or not self.query.strip():
            raise ValueError("sub-claim statement and query must be nonempty")
        if len(self.query) > MAX_QUERY_CHARS:
            raise ValueError(f"query longer than {MAX_QUERY_CHARS} characters")

    def to_dict(self) -> dict:
        return {"statement": self.statement, "query": self.query}


@dataclass(frozen=True)
class InterpretationResult:
    sub_claims: tuple[SubClaim, ...]
    image_notes: str | None = None

    @property
    def queries(self) -> list[str]:
        return [s.query for s in self.sub_claims]

    def to_dict(self) -> dict:
        return {
            "sub_claims": [s.to_dict() for s in self.sub_claims],
            "image_notes": self.image_notes,
        }


def clip_query(text: str) -> str:
    text = normalize_claim(text)
    if len(text) <= MAX_QUERY_CHARS:
        return text
    cut = text[:MAX_QUERY_CHARS]
    space = cut.rfind(" ")
    return cut[:space] if space > MAX_QUERY_CHARS // 2 else cut


def parse_subclaims(text: str) -> tuple[list[SubClaim], str | None]:
    """Parse numbered ``Sub-claim:`` / ``Query:`` blocks and an optional image-notes line."""
    pairs: list[SubClaim] = []
    notes: str | None = None
    pending: str | None = None
    for line in text.splitlines():
        if m := _SUBCLAIM.match(line):
            pending = m.group(2) or None
        elif (m := _QUERY.match(line)) and pending is not None:
            query = clip_query(m.group(1))
            if query:
                pairs.append(SubClaim(normalize_claim(pending), query))
            pending = None
        elif m := _IMAGE_NOTES.match(line):
            notes = m.group(1).strip()
    return pairs, notes


def _dedup(sub_claims: list[SubClaim]) -> list[SubClaim]:
    seen: set[str] = set()
    out = []
    for sc in sub_claims:
        key = sc.query.casefold()
        if key not in seen:
            seen.add(key)
            out.append(sc)
    return out


def build_interpret_request(
    claim: Claim, max_subclaims: int, prompts: PromptLibrary = DEFAULT_PROMPTS
) -> ChatRequest:
    text = normalize_claim(claim.text)
    body = prompts.render(
        "interpret",
        claim=text or "(no text; the claim is the image alone)",
        image="the attached image" if claim.has_image else "none",
    )
    body += "\n\n" + prompts.render("interpret_rules", max_subclaims=max_subclaims)
    if claim.has_image:
        body += "\n" + prompts.render("interpret_image_rules")
    parts = [body, ImageRef(claim.image)] if claim.has_image else [body]
    return ChatRequest((Message.user(*parts),))


def interpret_claim(
    claim: Claim,
    session: ProviderSession,
    max_subclaims: int = DEFAULT_MAX_SUBCLAIMS,
    *,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
    bucket: str = "retrieve",
) -> InterpretationResult:
    if max_subclaims < 1:
        raise ValueError("max_subclaims must be at least 1")
    req = build_interpret_request(claim, max_subclaims, prompts)
    answer = session.chat(req, bucket=bucket)
    result = _to_result(claim, answer, max_subclaims)
    if result is None:
        log.info("claim %s: interpretation unparseable, reprompting", claim.id)
        reminder = prompts.render("format_reminder", format=_GRAMMAR)
        retry = ChatRequest(req.messages + (Message.assistant(answer), Message.user(reminder)))
        answer = session.chat(retry, bucket=bucket)
        result = _to_result(claim, answer, max_subclaims)
    if result is None:
        raise InterpretationParseError(f"claim {claim.id}: no Sub-claim/Query blocks in response")
    return result


def _to_result(claim: Claim, answer: str, max_subclaims: int) -> InterpretationResult | None:
    pairs, notes = parse_subclaims(answer)
    pairs = _dedup(pairs)[:max_subclaims]
    if not claim.has_image:
        notes = None
    elif notes is None:
        notes = ""
    if not pairs and notes:
        # Image-only claims may come back with just a description of the image.
        pairs = [SubClaim(normalize_claim(notes), clip_query(notes))]
    if not pairs:
        return None
    return InterpretationResult(tuple(pairs), notes)


def passthrough_interpretation(claim: Claim) -> InterpretationResult:
    """Use the normalized claim text itself as the only query."""
    text = normalize_claim(claim.text)
    if not text:
        raise EmptyClaimText(f"claim {claim.id} has no text to search with")
    return InterpretationResult((SubClaim(text, clip_query(text)),), None)
