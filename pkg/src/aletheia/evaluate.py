"""Evidence quality evaluation: credibility filter, relevance/integrity scoring, ranking."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit

from .core import Claim, normalize_claim
from .extract import DIMENSIONS, StructuredEvidence
from .interpret import InterpretationResult
from .providers import EmbeddingVector, ProviderSession


def read_domain_list(source: str | Path) -> frozenset[str]:
    """One domain suffix per line; ``#`` starts a comment."""
    text = Path(source).read_text(encoding="utf-8")
    return parse_domain_list(text)


def parse_domain_list(text: str) -> frozenset[str]:
    out = set()
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip().lower().lstrip(".")
        # Hosts are compared without "www.", so entries must be too.
        entry = entry.removeprefix("www.")
        if entry:
            out.add(entry)
    return frozenset(out)


def _bundled(name: str) -> frozenset[str]:
    return parse_domain_list(resources.files("aletheia.data").joinpath(name).read_text("utf-8"))


DEFAULT_BLACKLIST = _bundled("blacklist.txt")
DEFAULT_ALLOWLIST = _bundled("allowlist.txt")


@dataclass(frozen=True)
class CredibilityWeights:
    """Feature weights of the credibility heuristic; they sum to 1.

    https: scheme is https
    known_outlet: host is on the allowlist
    shallow_path: full weight for at most 3 path segments, half for at most 6
    has_event: the extracted Event dimension is populated
    substantial_text: the cleaned page text has at least ``min_text_chars`` characters
    """

    https: float = 0.2
    known_outlet: float = 0.3
    shallow_path: float = 0.15
    has_event: float = 0.2
    substantial_text: float = 0.15
    min_text_chars: int = 500


@dataclass(frozen=True)
class EvaluatorConfig:
    alpha: float = 0.5
    credibility_threshold: float = 0.5
    top_k: int = 5
    blacklist: frozenset[str] = DEFAULT_BLACKLIST
    allowlist: frozenset[str] = DEFAULT_ALLOWLIST
    weights: CredibilityWeights = field(default_factory=CredibilityWeights)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.credibility_threshold <= 1.0:
            raise ValueError("credibility_threshold must lie in [0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")


@dataclass(frozen=True)
class PageSignals:
    event_populated: bool = False
    text_chars: int = 0

    @classmethod
    def of(cls, evidence: StructuredEvidence) -> "PageSignals":
        return cls(evidence.populated["Event"], evidence.page_chars)


@dataclass(frozen=True)
class ScoredEvidence:
    evidence: StructuredEvidence
    credibility: float
    relevance: float
    integrity: float
    quality: float

    def __post_init__(self):
        for name in ("credibility", "relevance", "integrity", "quality"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {getattr(self, name)}")

    @classmethod
    def combine(
        cls, evidence: StructuredEvidence, credibility: float, relevance: float, integrity: float, alpha: float
    ) -> "ScoredEvidence":
        return cls(evidence, credibility, relevance, integrity, quality_score(relevance, integrity, alpha))

    @property
    def url(self) -> str:
        return self.evidence.source_url

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "summary": self.evidence.summary,
            "credibility": self.credibility,
            "relevance": self.relevance,
            "integrity": self.integrity,
            "quality": self.quality,
        }


@dataclass(frozen=True)
class ClaimRepresentation:
    vector: EmbeddingVector

    def __post_init__(self):
        if self.vector.norm() == 0.0:
            raise ValueError("claim representation is the zero vector")


def claim_text_for_embedding(claim: Claim, interp: InterpretationResult | None = None) -> str:
    parts = [normalize_claim(claim.text)]
    if interp is not None and interp.image_notes:
        parts.append(normalize_claim(interp.image_notes))
    return "\n".join(p for p in parts if p)


def represent_claim(
    claim: Claim, session: ProviderSession, interp: InterpretationResult | None = None
) -> ClaimRepresentation:
    text = claim_text_for_embedding(claim, interp)
    if not text:
        raise ValueError(f"claim {claim.id} has no text or image notes to embed")
    return ClaimRepresentation(session.embed([text], bucket="retrieve")[0])


def _host(url: str) -> str:
    host = (urlsplit(url).hostname or "").lower().rstrip(".")
    return host[4:] if host.startswith("www.") else host


def domain_matches(url: str, suffixes: frozenset[str]) -> bool:
    host = _host(url)
    labels = host.split(".")
    return any(".".join(labels[i:]) in suffixes for i in range(len(labels)))


def credibility_score(
    url: str, signals: PageSignals | None = None, cfg: EvaluatorConfig = EvaluatorConfig()
) -> float:
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ValueError(f"not an absolute http(s) URL: {url!r}")
    if domain_matches(url, cfg.blacklist):
        return 0.0
    w = cfg.weights
    score = 0.0
    if parts.scheme == "https":
        score += w.https
    if domain_matches(url, cfg.allowlist):
        score += w.known_outlet
    depth = len([seg for seg in parts.path.split("/") if seg])
    if depth <= 3:
        score += w.shallow_path
    elif depth <= 6:
        score += w.shallow_path / 2
    if signals is not None:
        if signals.event_populated:
            score += w.has_event
        if signals.text_chars >= w.min_text_chars:
            score += w.substantial_text
    # Rounded so that equal feature sums tie exactly in the credibility tie-break.
    return round(min(1.0, max(0.0, score)), 6)


def passes_credibility(credibility: float, cfg: EvaluatorConfig) -> int:
    """Thresholded credibility: 1 for a retained source, 0 otherwise."""
    return 1 if credibility >= cfg.credibility_threshold else 0


def filter_by_credibility(items: list, cfg: EvaluatorConfig) -> list:
    """Keep items whose ``credibility`` attribute meets the threshold, in order."""
    return [it for it in items if passes_credibility(it.credibility, cfg)]


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} != {b.dim}")
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a.values, b.values)) / (na * nb)


def relevance_from_vectors(claim_vec: EmbeddingVector, evidence_vec: EmbeddingVector) -> float:
    # Opposite meaning counts as irrelevant; rounding can push |cos| past 1.
    return min(1.0, max(0.0, cosine(claim_vec, evidence_vec)))


def relevance_score(
    claim_rep: ClaimRepresentation, evidence: StructuredEvidence, session: ProviderSession
) -> float:
    if not evidence.summary.strip():
        raise ValueError("evidence summary is empty")
    return relevance_from_vectors(claim_rep.vector, session.embed([evidence.summary])[0])


def integrity_score(evidence: StructuredEvidence) -> float:
    return sum(evidence.populated.values()) / len(DIMENSIONS)


def quality_score(relevance: float, integrity: float, alpha: float) -> float:
    # The clamp only absorbs a last-ulp overshoot when both scores are 1.
    return min(1.0, alpha * relevance + (1 - alpha) * integrity)


@dataclass
class _Pending:
    evidence: StructuredEvidence
    credibility: float


def score_evidence(
    claim_rep: ClaimRepresentation,
    evidence_list: list[StructuredEvidence],
    cfg: EvaluatorConfig,
    session: ProviderSession,
) -> list[ScoredEvidence]:
    """Credibility filter then relevance/integrity/quality scoring, input order kept."""
    pending = [_Pending(e, credibility_score(e.source_url, PageSignals.of(e), cfg)) for e in evidence_list]
    survivors = filter_by_credibility(pending, cfg)

    summaries = [p.evidence.summary for p in survivors if p.evidence.summary.strip()]
    vectors = iter(session.embed(summaries, bucket="retrieve") if summaries else [])
    scored = []
    for p in survivors:
        r = relevance_from_vectors(claim_rep.vector, next(vectors)) if p.evidence.summary.strip() else 0.0
        m = integrity_score(p.evidence)
        scored.append(ScoredEvidence.combine(p.evidence, p.credibility, r, m, cfg.alpha))
    return scored


def rank_key(item: ScoredEvidence) -> tuple:
    return (-item.quality, -item.credibility, item.url)


def sort_scored(items: list[ScoredEvidence]) -> list[ScoredEvidence]:
    """Quality descending; ties by credibility descending, then URL ascending."""
    return sorted(items, key=rank_key)


def rank_evidence(
    claim_rep: ClaimRepresentation,
    evidence_list: list[StructuredEvidence],
    cfg: EvaluatorConfig,
    session: ProviderSession,
) -> list[ScoredEvidence]:
    return sort_scored(score_evidence(claim_rep, evidence_list, cfg, session))
