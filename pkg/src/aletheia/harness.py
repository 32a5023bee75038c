"""Dataset loading, batch execution and classification metrics."""

from __future__ import annotations

import datetime as dt
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .core import (
    DEFAULT_LABEL_MAP,
    BinaryLabel,
    Claim,
    CostLedger,
    LabelMap,
    StageTimings,
)
from .errors import AletheiaError, AlignmentError, DatasetFormatError
from .pipeline import Pipeline, RunTrace
from .providers.types import is_http_url
from .verify import VerificationReport

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetRecord:
    claim: Claim

    def __post_init__(self):
        if self.claim.gold_label is None:
            raise ValueError(f"record {self.claim.id} has no gold label")

    @property
    def id(self) -> str:
        return self.claim.id

    @property
    def gold(self) -> BinaryLabel:
        return self.claim.gold_label


def _parse_record(obj, base: Path, label_map: LabelMap) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    if not obj.get("id"):
        raise ValueError("missing id")
    raw_label = obj.get("label")
    if isinstance(raw_label, bool):
        label = BinaryLabel.from_bool(raw_label)
    elif isinstance(raw_label, str) and raw_label.strip():
        label = label_map.lookup(raw_label)
    else:
        raise ValueError("missing label")
    image = obj.get("image") or None
    if image and not is_http_url(image) and not image.startswith("data:"):
        path = Path(image)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ValueError(f"image file not found: {image}")
        image = str(path)
    published = obj.get("published_at")
    return DatasetRecord(
        Claim(
            id=str(obj["id"]),
            text=obj.get("text") or "",
            image=image,
            gold_label=label,
            published_at=dt.date.fromisoformat(published) if published else None,
        )
    )


def load_dataset(path: str | Path, label_map: LabelMap = DEFAULT_LABEL_MAP) -> list[DatasetRecord]:
    """Read a JSONL dataset; every malformed line is reported in one error."""
    path = Path(path)
    records: list[DatasetRecord] = []
    problems: list[tuple[int, str]] = []
    seen: set[str] = set()
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = _parse_record(json.loads(line), path.parent, label_map)
        except (ValueError, AletheiaError) as exc:
            problems.append((n, str(exc)))
            continue
        if rec.id in seen:
            problems.append((n, f"duplicate id {rec.id!r}"))
            continue
        seen.add(rec.id)
        records.append(rec)
    if problems:
        raise DatasetFormatError(problems)
    return records


def error_report(claim: Claim, mode: str, exc: Exception) -> VerificationReport:
    return VerificationReport(claim.id, None, mode=mode, error=f"{type(exc).__name__}: {exc}")


def run_batch(
    records: list[DatasetRecord],
    pipeline: Pipeline,
    mode: str = "full",
    seed: int = 0,
    *,
    parallelism: int | None = None,
    on_trace: Callable[[RunTrace], None] | None = None,
) -> list[VerificationReport]:
    """Run every record; failures become error reports, results keep record order."""
    if not records:
        raise ValueError("no records to run")
    workers = parallelism or pipeline.cfg.claim_parallelism

    def one(rec: DatasetRecord) -> tuple[VerificationReport, RunTrace | None]:
        try:
            return pipeline.verify_claim(rec.claim, mode=mode, seed=seed)
        except (AletheiaError, ValueError) as exc:
            log.warning("claim %s failed: %s", rec.id, exc)
            return error_report(rec.claim, mode, exc), None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(one, records))
    if on_trace is not None:
        for _, trace in results:
            if trace is not None:
                on_trace(trace)
    return [r for r, _ in results]


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"TP": self.tp, "FP": self.fp, "FN": self.fn, "TN": self.tn}


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return _ratio(2 * p * r, p + r)


@dataclass(frozen=True)
class MetricsSummary:
    n: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: Confusion
    verification_rate: float | None = None
    correctness_rate: float | None = None
    abstentions: int = 0
    errors: int = 0
    mean_timings: StageTimings = field(default_factory=StageTimings)
    total_cost: CostLedger = field(default_factory=CostLedger)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "confusion": self.confusion.to_dict(),
            "verification_rate": self.verification_rate,
            "correctness_rate": self.correctness_rate,
            "abstentions": self.abstentions,
            "errors": self.errors,
            "mean_timings": self.mean_timings.to_dict(),
            "total_cost": self.total_cost.to_dict(),
        }


def confusion_of(pairs: Iterable[tuple[BinaryLabel, BinaryLabel]]) -> Confusion:
    """Count (predicted, gold) pairs, with True as the positive class."""
    tp = fp = fn = tn = 0
    for pred, gold in pairs:
        if pred is BinaryLabel.TRUE:
            tp, fp = (tp + 1, fp) if gold is BinaryLabel.TRUE else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if gold is BinaryLabel.TRUE else (fn, tn + 1)
    return Confusion(tp, fp, fn, tn)


def macro_scores(c: Confusion) -> tuple[float, float, float]:
    """Macro-averaged precision, recall and F1 over the two classes."""
    p_true, r_true = _ratio(c.tp, c.tp + c.fp), _ratio(c.tp, c.tp + c.fn)
    p_false, r_false = _ratio(c.tn, c.tn + c.fn), _ratio(c.tn, c.tn + c.fp)
    return (
        (p_true + p_false) / 2,
        (r_true + r_false) / 2,
        (_f1(p_true, r_true) + _f1(p_false, r_false)) / 2,
    )


def compute_metrics(
    reports: list[VerificationReport], records: list[DatasetRecord]
) -> MetricsSummary:
    gold = {r.id: r.gold for r in records}
    by_id: dict[str, VerificationReport] = {}
    for rep in reports:
        if rep.claim_id in by_id:
            raise AlignmentError(f"duplicate report for claim {rep.claim_id}")
        by_id[rep.claim_id] = rep
    if set(by_id) != set(gold):
        missing = sorted(set(gold) - set(by_id))
        extra = sorted(set(by_id) - set(gold))
        raise AlignmentError(f"reports and records differ: missing={missing} extra={extra}")

    evaluated = [(rep.verdict, gold[cid]) for cid, rep in by_id.items() if rep.verdict is not None]
    conf = confusion_of(evaluated)
    precision, recall, f1 = macro_scores(conf)

    direct = [rep for rep in reports if rep.mode == "direct"]
    verification_rate = correctness_rate = None
    if direct:
        attempted = [rep for rep in direct if rep.attempted]
        correct = sum(1 for rep in attempted if rep.verdict is gold[rep.claim_id])
        verification_rate = len(attempted) / len(direct)
        correctness_rate = _ratio(correct, len(attempted))

    n_reports = len(reports)
    mean_timings = StageTimings(
        _ratio(sum(r.timings.t_retrieve for r in reports), n_reports),
        _ratio(sum(r.timings.t_summarize for r in reports), n_reports),
        _ratio(sum(r.timings.t_verify for r in reports), n_reports),
    )
    total_cost = sum((r.cost for r in reports), CostLedger())
    return MetricsSummary(
        n=conf.n,
        accuracy=_ratio(conf.tp + conf.tn, conf.n),
        precision=precision,
        recall=recall,
        f1=f1,
        confusion=conf,
        verification_rate=verification_rate,
        correctness_rate=correctness_rate,
        abstentions=sum(1 for r in reports if r.abstained),
        errors=sum(1 for r in reports if r.error),
        mean_timings=mean_timings,
        total_cost=total_cost,
    )


def render_table(m: MetricsSummary) -> str:
    def pct(x):
        return "-" if x is None else f"{100 * x:.1f}%"

    rows = [
        ("claims evaluated", str(m.n)),
        ("accuracy", pct(m.accuracy)),
        ("precision (macro)", pct(m.precision)),
        ("recall (macro)", pct(m.recall)),
        ("F1 (macro)", pct(m.f1)),
        ("TP / FP / FN / TN", f"{m.confusion.tp} / {m.confusion.fp} / {m.confusion.fn} / {m.confusion.tn}"),
        ("verification rate", pct(m.verification_rate)),
        ("correctness rate", pct(m.correctness_rate)),
        ("abstentions", str(m.abstentions)),
        ("errors", str(m.errors)),
        ("mean time retrieve (s)", f"{m.mean_timings.t_retrieve:.2f}"),
        ("mean time summarize (s)", f"{m.mean_timings.t_summarize:.2f}"),
        ("mean time verify (s)", f"{m.mean_timings.t_verify:.2f}"),
        ("mean time total (s)", f"{m.mean_timings.t_total:.2f}"),
        ("total cost (USD)", str(m.total_cost.cost_total)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def write_reports(reports: list[VerificationReport], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json() + "\n")


def read_reports(path: str | Path) -> list[VerificationReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [VerificationReport.from_dict(json.loads(line)) for line in lines if line.strip()]
