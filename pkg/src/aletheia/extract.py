"""Content extraction: page fetch, boilerplate removal and eight-dimension evidence records."""

from __future__ import annotations

import datetime as dt
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from bs4 import BeautifulSoup, NavigableString, Tag
from bs4.element import PreformattedString

from .errors import AletheiaError, ExtractionParseError, UnsupportedContentType
from .prompts import DEFAULT_PROMPTS, PromptLibrary
from .providers import ChatRequest, Message, ProviderSession, RawDocument
from .retrieve import CandidatePool

log = logging.getLogger(__name__)

DIMENSIONS = ("People", "Event", "Location", "Time", "Reason", "Background", "Impact", "Followup")
DEFAULT_MAX_EXTRACT_CHARS = 12_000
DEFAULT_EXTRACT_PARALLELISM = 6

_DROPPED_TAGS = (
    "script", "style", "nav", "header", "footer", "aside",
    "noscript", "template", "iframe", "svg", "form",
)
_BLOCK_TAGS = frozenset({
    "address", "article", "blockquote", "body", "br", "dd", "div", "dl", "dt",
    "figcaption", "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "li",
    "main", "ol", "p", "pre", "section", "table", "tbody", "td", "th", "thead",
    "tr", "ul",
})
_HTML_TYPES = ("text/html", "application/xhtml+xml")
_WS = re.compile(r"\s+")

_LABELS = {
    "people": "People",
    "who": "People",
    "event": "Event",
    "what": "Event",
    "location": "Location",
    "where": "Location",
    "time": "Time",
    "when": "Time",
    "reason": "Reason",
    "why": "Reason",
    "background": "Background",
    "impact": "Impact",
    "followup": "Followup",
    "follow up": "Followup",
    "summary": "Summary",
}
_LABEL_LINE = re.compile(
    r"^\s*(?:[-*#]+\s*)?\**\s*([A-Za-z][A-Za-z -]*?)\s*\**\s*:\s*\**\s*(.*?)\s*$"
)
_EXTRACT_GRAMMAR = "\n".join(
    f"{'Follow-up' if d == 'Followup' else d}: ..." for d in DIMENSIONS + ("Summary",)
)
_ABSENT = frozenset({
    "", "not mentioned", "none", "n/a", "na", "unknown", "not specified",
    "not stated", "not available", "not applicable", "not provided", "-",
})


@dataclass(frozen=True)
class StructuredEvidence:
    source_url: str
    dimensions: dict[str, str | None]
    summary: str
    channel: str = "text_search"
    retrieved_at: dt.datetime | None = field(default=None, compare=False)
    page_chars: int = 0

    def __post_init__(self):
        if set(self.dimensions) != set(DIMENSIONS):
            raise ValueError(f"dimension keys must be exactly {DIMENSIONS}")
        if any(self.populated.values()) and not self.summary.strip():
            raise ValueError("summary must be nonempty when a dimension is populated")

    @property
    def populated(self) -> dict[str, bool]:
        return {k: bool(v and v.strip()) for k, v in self.dimensions.items()}

    def to_dict(self) -> dict:
        return {
            "source_url": self.source_url,
            "dimensions": dict(self.dimensions),
            "summary": self.summary,
            "channel": self.channel,
            "page_chars": self.page_chars,
        }


@dataclass(frozen=True)
class Drop:
    url: str
    reason: str

    def to_dict(self) -> dict:
        return {"url": self.url, "reason": self.reason}


@dataclass(frozen=True)
class ExtractionOutcome:
    evidence: list[StructuredEvidence]
    drops: list[Drop]


def _media_type(content_type: str) -> str:
    return content_type.split(";", 1)[0].strip().lower()


def _charset(content_type: str) -> str:
    m = re.search(r"charset=([\w.-]+)", content_type, re.I)
    return m.group(1) if m else "utf-8"


def _html_paragraphs(html: str) -> list[str]:
    soup = BeautifulSoup(html, "html.parser")
    for tag in soup.find_all(_DROPPED_TAGS):
        tag.decompose()

    paragraphs: list[str] = []
    buf: list[str] = []

    def flush():
        text = _WS.sub(" ", "".join(buf)).strip()
        buf.clear()
        if text:
            paragraphs.append(text)

    def walk(node: Tag):
        for child in node.children:
            if isinstance(child, PreformattedString):  # comments, doctype, CDATA
                continue
            if isinstance(child, NavigableString):
                buf.append(str(child))
            elif isinstance(child, Tag):
                if child.name in ("head", "title", "meta", "link"):
                    continue
                block = child.name in _BLOCK_TAGS
                if block:
                    flush()
                walk(child)
                if block:
                    flush()

    walk(soup)
    flush()
    return paragraphs


def _truncate(paragraphs: list[str], max_chars: int) -> str:
    kept: list[str] = []
    size = 0
    for p in paragraphs:
        extra = len(p) + (2 if kept else 0)
        if size + extra > max_chars:
            break
        kept.append(p)
        size += extra
    if not kept and paragraphs:
        # A single oversized paragraph: cut at the last whitespace.
        head = paragraphs[0][:max_chars]
        space = head.rfind(" ")
        return head[:space].rstrip() if space > 0 else head
    return "\n\n".join(kept)


def strip_boilerplate(doc: RawDocument, max_chars: int = DEFAULT_MAX_EXTRACT_CHARS) -> str:
    media = _media_type(doc.content_type)
    text = doc.body.decode(_charset(doc.content_type), errors="replace")
    if not media:
        media = "text/html" if text.lstrip().startswith("<") else "text/plain"
    if media in _HTML_TYPES:
        return _truncate(_html_paragraphs(text), max_chars)
    if media == "text/plain":
        if len(text) <= max_chars:
            return text
        return _truncate(re.split(r"\n\s*\n", text), max_chars)
    raise UnsupportedContentType(f"{doc.url}: cannot extract text from {media}")


def _label_key(raw: str) -> str | None:
    return _LABELS.get(_WS.sub(" ", raw.replace("-", " ")).strip().lower()) or _LABELS.get(
        raw.replace("-", "").replace(" ", "").lower()
    )


def parse_dimensions(text: str) -> tuple[dict[str, str | None], str]:
    """Parse labeled ``People: ...`` style lines; raises if no label is recognized."""
    values: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        m = _LABEL_LINE.match(line)
        key = _label_key(m.group(1)) if m else None
        if key is not None:
            current = key
            values[current] = [m.group(2)]
        elif current is not None and line.strip():
            values[current].append(line.strip())
    if not values:
        raise ExtractionParseError("no labeled dimensions in extraction response")

    dims: dict[str, str | None] = {}
    for name in DIMENSIONS:
        raw = _WS.sub(" ", " ".join(values.get(name, []))).strip()
        dims[name] = None if raw.strip(" .").lower() in _ABSENT else raw
    summary = _WS.sub(" ", " ".join(values.get("Summary", []))).strip()
    if summary.strip(" .").lower() in _ABSENT:
        summary = ""
    if not summary and any(dims.values()):
        summary = " ".join(v if v.endswith(".") else v + "." for v in dims.values() if v)
    return dims, summary


def build_extract_request(page_text: str, prompts: PromptLibrary = DEFAULT_PROMPTS) -> ChatRequest:
    body = prompts.render("summarize") + "\n\n" + prompts.render("summarize_format", article=page_text)
    return ChatRequest((Message.user(body),))


def extract_structured_evidence(
    page_text: str,
    source_url: str,
    session: ProviderSession,
    *,
    channel: str = "text_search",
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> StructuredEvidence:
    if not page_text.strip():
        raise ValueError("page text is empty")
    req = build_extract_request(page_text, prompts)
    answer = session.chat(req, bucket="summarize")
    try:
        dims, summary = parse_dimensions(answer)
    except ExtractionParseError:
        reminder = prompts.render("format_reminder", format=_EXTRACT_GRAMMAR)
        retry = ChatRequest(req.messages + (Message.assistant(answer), Message.user(reminder)))
        answer = session.chat(retry, bucket="summarize")
        dims, summary = parse_dimensions(answer)
    return StructuredEvidence(
        source_url=source_url,
        dimensions=dims,
        summary=summary,
        channel=channel,
        retrieved_at=dt.datetime.now(dt.timezone.utc),
        page_chars=len(page_text),
    )


def extract_pool(
    pool: CandidatePool,
    session: ProviderSession,
    *,
    max_extract_chars: int = DEFAULT_MAX_EXTRACT_CHARS,
    parallelism: int = DEFAULT_EXTRACT_PARALLELISM,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> ExtractionOutcome:
    """Fetch, clean and extract every candidate; failures become drop records."""
    if not len(pool):
        raise ValueError("candidate pool is empty")

    def one(candidate) -> StructuredEvidence | Drop:
        try:
            doc = session.fetch_page(candidate.url)
            text = strip_boilerplate(doc, max_extract_chars)
            if not text.strip():
                return Drop(candidate.url, "no extractable text")
            return extract_structured_evidence(
                text, candidate.url, session, channel=candidate.channel, prompts=prompts
            )
        except (AletheiaError, ValueError) as exc:
            log.info("dropping %s: %s", candidate.url, exc)
            return Drop(candidate.url, f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as executor:
        results = list(executor.map(one, pool.candidates))
    evidence = [r for r in results if isinstance(r, StructuredEvidence)]
    drops = [r for r in results if isinstance(r, Drop)]
    return ExtractionOutcome(evidence, drops)
