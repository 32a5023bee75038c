"""Staged verification: initialize, upload evidence, ask for a verdict, parse it."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field, replace
from typing import Literal

from .core import (
    DEFAULT_LABEL_MAP,
    BinaryLabel,
    Claim,
    CostLedger,
    LabelMap,
    StageTimings,
    normalize_claim,
    normalize_label,
)
from .errors import VerdictParseError
from .evaluate import EvaluatorConfig, ScoredEvidence
from .extract import DIMENSIONS, StructuredEvidence
from .prompts import DEFAULT_PROMPTS, PromptLibrary
from .providers import ChatRequest, ImageRef, Message, ProviderSession

Stance = Literal["supports", "refutes"]

_VERDICT_LINE = re.compile(r"^[\s*#>-]*verdict\s*\**\s*:(.*)$", re.I)
_BINARY_TOKEN = re.compile(r"\b(true|false)\b", re.I)
_NUMBERED = re.compile(r"^[\s*>-]*(\d+)\s*[.)]\s*(.+?)\s*$")
_STANCE = re.compile(r"\b(supports?|refutes?)\b", re.I)
_EVIDENCE_INDEX = re.compile(r"\bevidence\s*\[?#?\s*(\d+)\]?", re.I)
_ASPECT = re.compile(r"\b(?:supports?|refutes?)\s+the\s*(.*)\s+of\s+the\s+claim\b", re.I)
_SUMMARY_LINE = re.compile(r"^[\s*#>-]*summary\s*\**\s*:\s*(.*)$", re.I)
_ABSTAIN = re.compile(r"^\W*no\b", re.I)


@dataclass(frozen=True)
class EvidenceCitation:
    index: int
    stance: Stance
    target_aspect: str = ""
    source_url: str = ""

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("citation index is 1-based")
        if self.stance not in ("supports", "refutes"):
            raise ValueError(f"bad stance {self.stance!r}")

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "stance": self.stance,
            "target_aspect": self.target_aspect,
            "source_url": self.source_url,
        }


@dataclass(frozen=True)
class VerificationReport:
    claim_id: str
    verdict: BinaryLabel | None
    justification_summary: str = ""
    citations: tuple[EvidenceCitation, ...] = ()
    evidence_used: tuple[ScoredEvidence, ...] = ()
    timings: StageTimings = field(default_factory=StageTimings)
    cost: CostLedger = field(default_factory=CostLedger)
    mode: str = "full"
    abstained: bool = False
    error: str | None = None
    transcript: tuple[Message, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.verdict is None and not (self.abstained or self.error):
            raise ValueError("a report without a verdict must be an abstention or an error")
        if self.abstained and self.verdict is not None:
            raise ValueError("an abstention carries no verdict")
        n = len(self.evidence_used)
        for c in self.citations:
            if c.index > n:
                raise ValueError(f"citation {c.index} points past the {n} uploaded items")

    @property
    def evidence_count(self) -> int:
        return len(self.evidence_used)

    @property
    def insufficient_evidence(self) -> bool:
        return self.evidence_count == 0

    @property
    def attempted(self) -> bool:
        return self.verdict is not None

    def to_dict(self, *, timings: bool = True) -> dict:
        d = {
            "claim_id": self.claim_id,
            "mode": self.mode,
            "verdict": self.verdict.value if self.verdict else None,
            "abstained": self.abstained,
            "error": self.error,
            "insufficient_evidence": self.insufficient_evidence,
            "evidence_count": self.evidence_count,
            "justification_summary": self.justification_summary,
            "citations": [c.to_dict() for c in self.citations],
            "evidence": [e.to_dict() for e in self.evidence_used],
            "timings": self.timings.to_dict(),
            "cost": self.cost.to_dict(),
        }
        if not timings:
            del d["timings"]
        return d

    def to_json(self, *, timings: bool = True, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(timings=timings), ensure_ascii=False, indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        evidence = tuple(
            ScoredEvidence(
                StructuredEvidence(e["url"], dict.fromkeys(DIMENSIONS), e.get("summary", "")),
                e["credibility"],
                e["relevance"],
                e["integrity"],
                e["quality"],
            )
            for e in d.get("evidence", [])
        )
        return cls(
            claim_id=d["claim_id"],
            verdict=BinaryLabel(d["verdict"]) if d.get("verdict") else None,
            justification_summary=d.get("justification_summary", ""),
            citations=tuple(EvidenceCitation(**c) for c in d.get("citations", [])),
            evidence_used=evidence,
            timings=StageTimings.from_dict(d.get("timings", {})),
            cost=CostLedger.from_dict(d.get("cost", {})),
            mode=d.get("mode", "full"),
            abstained=bool(d.get("abstained", False)),
            error=d.get("error"),
        )


def _stance(token: str) -> Stance:
    return "supports" if token.lower().startswith("support") else "refutes"


def parse_verdict_output(text: str) -> tuple[BinaryLabel, list[EvidenceCitation], str]:
    """Parse the ``Verdict: / Evidence: / Summary:`` answer format."""
    if not text or not text.strip():
        raise ValueError("verdict text is empty")
    lines = text.splitlines()
    verdict = None
    verdict_at = 0
    for i, line in enumerate(lines):
        m = _VERDICT_LINE.match(line)
        if m and (tok := _BINARY_TOKEN.search(m.group(1))):
            verdict = BinaryLabel(tok.group(1).lower())
            verdict_at = i
            break
    if verdict is None:
        raise VerdictParseError("no 'Verdict: True/False' line in the answer")

    citations: list[EvidenceCitation] = []
    summary = ""
    for i in range(verdict_at + 1, len(lines)):
        line = lines[i]
        if m := _SUMMARY_LINE.match(line):
            rest = [m.group(1)] + lines[i + 1 :]
            summary = "\n".join(rest).strip()
            break
        m = _NUMBERED.match(line)
        if not m:
            continue
        body = m.group(2)
        stance = _STANCE.search(body)
        if not stance:
            continue
        idx = _EVIDENCE_INDEX.search(body)
        index = int(idx.group(1)) if idx else int(m.group(1))
        if index < 1:
            continue
        aspect = _ASPECT.search(body)
        target = aspect.group(1).strip() if aspect else body[stance.end() :].strip(" .")
        citations.append(EvidenceCitation(index, _stance(stance.group(1)), target))
    return verdict, citations, summary


def render_verdict_output(
    verdict: BinaryLabel, citations: list[EvidenceCitation], summary: str
) -> str:
    """Inverse of :func:`parse_verdict_output` for well-formed inputs."""
    out = [f"Verdict: {'True' if verdict is BinaryLabel.TRUE else 'False'}.", "", "Evidence:", ""]
    for n, c in enumerate(citations, 1):
        out.append(f"{n}. The evidence {c.index} {c.stance} the {c.target_aspect} of the claim.")
    out += ["", f"Summary: {summary}"]
    return "\n".join(out)


def _claim_parts(claim: Claim) -> tuple[str, str]:
    text = normalize_claim(claim.text) or "(no text)"
    return text, ("the attached image" if claim.has_image else "none")


def _verdict_set(labels: frozenset[str]) -> str:
    return ", ".join(sorted(labels))


def format_evidence_list(evidence: list[ScoredEvidence]) -> str:
    return "\n".join(f"{i}. {e.evidence.summary} ({e.url})" for i, e in enumerate(evidence, 1))


def run_verification_protocol(
    claim: Claim,
    ranked: list[ScoredEvidence],
    cfg: EvaluatorConfig,
    session: ProviderSession,
    *,
    label_map: LabelMap = DEFAULT_LABEL_MAP,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
    mode: str = "full",
) -> VerificationReport:
    started = time.perf_counter()
    top = list(ranked[: cfg.top_k])
    text, image = _claim_parts(claim)

    init = prompts.render("init", text=text, image=image)
    history: list[Message] = [Message.user(init, ImageRef(claim.image) if claim.has_image else None)]
    history.append(Message.assistant(session.chat(ChatRequest(tuple(history)), bucket="verify")))

    if top:
        upload = prompts.render("upload", text_evidence_list=format_evidence_list(top))
        history.append(Message.user(upload))
        history.append(Message.assistant(session.chat(ChatRequest(tuple(history)), bucket="verify")))

    output_format = prompts.render("output_format")
    ask = prompts.render(
        "verify",
        true_verdict_set=_verdict_set(label_map.true_set),
        false_verdict_set=_verdict_set(label_map.false_set),
        output_format=output_format,
    )
    if not top:
        ask = prompts.render("no_evidence") + "\n\n" + ask
    history.append(Message.user(ask))
    answer = session.chat(ChatRequest(tuple(history)), bucket="verify")
    history.append(Message.assistant(answer))
    try:
        verdict, citations, summary = parse_verdict_output(answer)
    except VerdictParseError:
        history.append(Message.user(prompts.render("format_reminder", format=output_format)))
        answer = session.chat(ChatRequest(tuple(history)), bucket="verify")
        history.append(Message.assistant(answer))
        verdict, citations, summary = parse_verdict_output(answer)

    cited = tuple(
        replace(c, source_url=top[c.index - 1].url) for c in citations if c.index <= len(top)
    )
    return VerificationReport(
        claim_id=claim.id,
        verdict=verdict,
        justification_summary=summary,
        citations=cited,
        evidence_used=tuple(top),
        timings=StageTimings(t_verify=time.perf_counter() - started),
        cost=session.meter.ledger(),
        mode=mode,
        transcript=tuple(history),
    )


def _label_pattern(label_map: LabelMap) -> re.Pattern:
    phrases = sorted(label_map.true_set | label_map.false_set, key=len, reverse=True)
    alts = "|".join(r"[\s-]+".join(map(re.escape, p.split())) for p in phrases)
    return re.compile(rf"\b(not\s+|n't\s+)?({alts})\b", re.I)


def read_direct_answer(answer: str, label_map: LabelMap = DEFAULT_LABEL_MAP) -> BinaryLabel | None:
    """Interpret a zero-shot answer; ``None`` means the model declined to verify."""
    if _ABSTAIN.match(answer):
        return None
    try:
        return parse_verdict_output(answer)[0]
    except VerdictParseError:
        pass
    m = _label_pattern(label_map).search(answer)
    if m is None:
        raise VerdictParseError("zero-shot answer names neither a true nor a false verdict")
    key = normalize_label(m.group(2))
    label = BinaryLabel.TRUE if key in label_map.true_set else BinaryLabel.FALSE
    if m.group(1):
        label = BinaryLabel.FALSE if label is BinaryLabel.TRUE else BinaryLabel.TRUE
    return label


def direct_verify(
    claim: Claim,
    session: ProviderSession,
    *,
    label_map: LabelMap = DEFAULT_LABEL_MAP,
    prompts: PromptLibrary = DEFAULT_PROMPTS,
) -> VerificationReport:
    """Zero-shot verification on the claim alone, without retrieval."""
    started = time.perf_counter()
    text, image = _claim_parts(claim)
    msg = Message.user(
        prompts.render("direct", text=text, image=image),
        ImageRef(claim.image) if claim.has_image else None,
    )
    answer = session.chat(ChatRequest((msg,)), bucket="verify")
    verdict = read_direct_answer(answer, label_map)
    return VerificationReport(
        claim_id=claim.id,
        verdict=verdict,
        justification_summary=answer.strip(),
        timings=StageTimings(t_verify=time.perf_counter() - started),
        cost=session.meter.ledger(),
        mode="direct",
        abstained=verdict is None,
        transcript=(msg, Message.assistant(answer)),
    )
