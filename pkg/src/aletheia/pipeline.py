"""End-to-end orchestration of one claim through the configured run mode."""

from __future__ import annotations

import contextlib
import hashlib
import logging
import random
import time
from dataclasses import dataclass, field, replace
from typing import Iterator

from .config import AppConfig
from .core import DEFAULT_LABEL_MAP, Claim, LabelMap, StageTimings
from .evaluate import ScoredEvidence, represent_claim, score_evidence, sort_scored
from .extract import Drop, StructuredEvidence, extract_pool
from .interpret import InterpretationResult, interpret_claim, passthrough_interpretation
from .prompts import PromptLibrary
from .providers import (
    Cassette,
    CostMeter,
    LiveTransport,
    ProviderSession,
    RecordingTransport,
    ReplayTransport,
    RetryPolicy,
    Transport,
)
from .retrieve import CandidatePool, locate_candidates
from .verify import VerificationReport, direct_verify, run_verification_protocol

log = logging.getLogger(__name__)


@dataclass
class RunTrace:
    claim_id: str
    mode: str
    interpretation: InterpretationResult | None = None
    pool: CandidatePool | None = None
    evidence: list[StructuredEvidence] = field(default_factory=list)
    drops: list[Drop] = field(default_factory=list)
    scored: list[ScoredEvidence] = field(default_factory=list)
    selected: list[ScoredEvidence] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "mode": self.mode,
            "interpretation": self.interpretation.to_dict() if self.interpretation else None,
            "pool": self.pool.to_dict() if self.pool else None,
            "evidence": [e.to_dict() for e in self.evidence],
            "drops": [d.to_dict() for d in self.drops],
            "scored": [s.to_dict() for s in self.scored],
            "selected": [s.url for s in self.selected],
        }


def claim_seed(seed: int, claim_id: str) -> int:
    """Per-claim RNG seed, independent of batch order and parallelism."""
    digest = hashlib.sha256(f"{seed}:{claim_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_evidence(survivors: list[ScoredEvidence], k: int, seed: int, claim_id: str) -> list[ScoredEvidence]:
    rng = random.Random(claim_seed(seed, claim_id))
    return rng.sample(survivors, min(k, len(survivors)))


class Pipeline:
    def __init__(
        self,
        transport: Transport,
        cfg: AppConfig | None = None,
        *,
        label_map: LabelMap = DEFAULT_LABEL_MAP,
        prompts: PromptLibrary | None = None,
    ):
        self.transport = transport
        self.cfg = cfg or AppConfig()
        self.evaluator = self.cfg.evaluator()
        self.label_map = label_map
        self.prompts = prompts or PromptLibrary(self.cfg.template_dir)

    def session(self) -> ProviderSession:
        return ProviderSession(self.transport, CostMeter(), max_page_bytes=self.cfg.max_page_bytes)

    def verify_claim(
        self, claim: Claim, mode: str | None = None, seed: int | None = None
    ) -> tuple[VerificationReport, RunTrace]:
        mode = mode or self.cfg.mode
        seed = self.cfg.seed if seed is None else seed
        cfg = self.cfg
        session = self.session()
        trace = RunTrace(claim.id, mode)

        if mode == "direct":
            report = direct_verify(claim, session, label_map=self.label_map, prompts=self.prompts)
            return report, trace

        started = time.perf_counter()
        if mode == "no_interpret":
            interp = passthrough_interpretation(claim)
        else:
            interp = interpret_claim(claim, session, cfg.max_subclaims, prompts=self.prompts)
        trace.interpretation = interp
        pool = locate_candidates(
            interp, claim, session, cfg.per_query_limit, query_parallelism=cfg.query_parallelism
        )
        trace.pool = pool
        t_retrieve = time.perf_counter() - started

        started = time.perf_counter()
        if len(pool):
            outcome = extract_pool(
                pool,
                session,
                max_extract_chars=cfg.max_extract_chars,
                parallelism=cfg.extract_parallelism,
                prompts=self.prompts,
            )
            trace.evidence, trace.drops = outcome.evidence, outcome.drops
        t_summarize = time.perf_counter() - started

        started = time.perf_counter()
        if trace.evidence:
            claim_rep = represent_claim(claim, session, interp)
            scored = score_evidence(claim_rep, trace.evidence, self.evaluator, session)
        else:
            scored = []
        if mode == "random_evidence":
            ranked = sample_evidence(scored, self.evaluator.top_k, seed, claim.id)
        else:
            ranked = sort_scored(scored)
        trace.scored = sort_scored(scored)
        trace.selected = ranked[: self.evaluator.top_k]
        t_retrieve += time.perf_counter() - started

        report = run_verification_protocol(
            claim, ranked, self.evaluator, session,
            label_map=self.label_map, prompts=self.prompts, mode=mode,
        )
        report = replace(
            report,
            timings=StageTimings(t_retrieve, t_summarize, report.timings.t_verify),
            cost=session.meter.ledger(),
        )
        return report, trace


@contextlib.contextmanager
def transport_from_config(cfg: AppConfig) -> Iterator[Transport]:
    """Replay, record or live transport per the config; recordings are saved on exit."""
    if cfg.replay:
        yield ReplayTransport(Cassette.load(cfg.replay))
        return
    live = LiveTransport(
        cfg.endpoints(),
        timeout=cfg.timeout,
        retry=RetryPolicy(cfg.retries, cfg.backoff),
    )
    try:
        if cfg.record:
            cassette = Cassette.open_or_new(cfg.record)
            try:
                yield RecordingTransport(live, cassette)
            finally:
                cassette.save()
        else:
            yield live
    finally:
        live.close()
