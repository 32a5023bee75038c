"""Independent reference implementations used to check the production code.

None of these import the code under test's scoring or sorting helpers; they
recompute every quantity from the raw fixture description with the simplest
possible method (exhaustive pairwise comparison, plain counting).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from aletheia.extract import DIMENSIONS, StructuredEvidence
from world import World

CLAIM_VECTOR = [1.0, 0.0, 0.0, 0.0]

# Host kinds: (host, allowlisted, blacklisted)
HOSTS = [("www.reuters.com", True, False), ("example.org", False, False), ("www.infowars.com", False, True)]


@dataclass(frozen=True)
class Spec:
    """Raw description of one evidence item."""

    key: int
    https: bool
    host: int
    depth: int
    populated: tuple[str, ...]
    long_text: bool
    vector: tuple[float, ...]

    @property
    def url(self) -> str:
        scheme = "https" if self.https else "http"
        path = "/".join(f"s{self.key}x{i}" for i in range(self.depth))
        return f"{scheme}://{HOSTS[self.host][0]}/{path}"

    @property
    def summary(self) -> str:
        return f"summary of item {self.key}"

    def evidence(self) -> StructuredEvidence:
        dims = {d: (f"{d} value" if d in self.populated else None) for d in DIMENSIONS}
        summary = self.summary if self.populated else ""
        return StructuredEvidence(self.url, dims, summary, page_chars=800 if self.long_text else 120)


def oracle_credibility(s: Spec) -> float:
    _, allow, black = HOSTS[s.host]
    if black:
        return 0.0
    total = 0.0
    total += 0.2 if s.https else 0.0
    total += 0.3 if allow else 0.0
    total += 0.15 if s.depth <= 3 else (0.075 if s.depth <= 6 else 0.0)
    total += 0.2 if "Event" in s.populated else 0.0
    total += 0.15 if s.long_text else 0.0
    return round(min(1.0, total), 6)


def oracle_relevance(s: Spec) -> float:
    if not s.populated:
        return 0.0
    dot = sum(a * b for a, b in zip(CLAIM_VECTOR, s.vector))
    na = math.sqrt(sum(a * a for a in CLAIM_VECTOR))
    nb = math.sqrt(sum(b * b for b in s.vector))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


def oracle_rank(specs: list[Spec], alpha: float, threshold: float) -> list[tuple[str, float, float, float, float]]:
    """(url, credibility, r, m, q) in ranked order, by exhaustive pairwise comparison."""
    rows = []
    for s in specs:
        c = oracle_credibility(s)
        if c < threshold:
            continue
        r = oracle_relevance(s)
        m = len(s.populated) / 8
        q = min(1.0, alpha * r + (1 - alpha) * m)
        rows.append((s.url, c, r, m, q))

    def beats(a, b) -> bool:
        if a[4] != b[4]:
            return a[4] > b[4]
        if a[1] != b[1]:
            return a[1] > b[1]
        return a[0] < b[0]

    placed: list = [None] * len(rows)
    for i, row in enumerate(rows):
        position = sum(1 for j, other in enumerate(rows) if j != i and beats(other, row))
        placed[position] = row
    assert None not in placed, "oracle order is not total"
    return placed


def world_for(specs: list[Spec]) -> World:
    world = World()
    world.vectors["claim"] = list(CLAIM_VECTOR)
    for s in specs:
        world.vectors[s.summary] = list(s.vector)
    return world


R_GRID = [-0.5, 0.0, 0.125, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0]
ALPHAS = [0.0, 0.25, 0.5, 0.75, 1.0]
THRESHOLDS = [0.0, 0.35, 0.5, 0.7, 1.0]


def random_vector(rng: random.Random) -> tuple[float, ...]:
    if rng.random() < 0.6:
        r = rng.choice(R_GRID)
        return (r, math.sqrt(1 - r * r), 0.0, 0.0)
    return tuple(rng.uniform(-1, 1) for _ in range(4))


def random_specs(rng: random.Random, max_size: int = 8) -> list[Spec]:
    n = rng.randint(0, max_size)
    specs = []
    for key in range(n):
        k = rng.randint(0, 8)
        specs.append(
            Spec(
                key=key,
                https=rng.random() < 0.7,
                host=rng.randrange(len(HOSTS)),
                depth=rng.randint(1, 8),
                populated=tuple(sorted(rng.sample(DIMENSIONS, k))),
                long_text=rng.random() < 0.5,
                vector=random_vector(rng),
            )
        )
    return specs


def random_case(rng: random.Random) -> tuple[list[Spec], float, float]:
    alpha = rng.choice(ALPHAS) if rng.random() < 0.6 else rng.random()
    return random_specs(rng), alpha, rng.choice(THRESHOLDS)


# Metrics


def oracle_metrics(pairs: list[tuple[bool, bool]]) -> dict:
    """Accuracy and macro precision/recall/F1 from (predicted, gold) pairs by counting."""
    n = len(pairs)
    per_class = []
    for cls in (True, False):
        predicted = [g for p, g in pairs if p == cls]
        actual = [p for p, g in pairs if g == cls]
        hits = sum(1 for p, g in pairs if p == cls and g == cls)
        precision = hits / len(predicted) if predicted else 0.0
        recall = hits / len(actual) if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append((precision, recall, f1))
    return {
        "accuracy": sum(1 for p, g in pairs if p == g) / n if n else 0.0,
        "precision": sum(c[0] for c in per_class) / 2,
        "recall": sum(c[1] for c in per_class) / 2,
        "f1": sum(c[2] for c in per_class) / 2,
    }
