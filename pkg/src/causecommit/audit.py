"""Per-entity aggregation of classified messages and the words-vs-ratings audit."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .pipeline import (
    DEFAULT_TAU,
    FINAL_LABELS,
    HIGH_COMMIT,
    IRRELEVANT,
    LOW_COMMIT,
    NON_SUPPORT,
    MessageClassification,
    confident_subset,
)
from .stats import EntityDesignRow

DEFAULT_TOP_K = 50

COUNT = "count"
FRACTION = "fraction"
MEAN_PROB = "mean_prob"
METRICS = (COUNT, FRACTION, MEAN_PROB)


class MissingRatingError(ValueError):
    def __init__(self, entity_ids):
        self.entity_ids = sorted(entity_ids)
        super().__init__("missing rating for entities: " + ", ".join(self.entity_ids))


@dataclass(frozen=True)
class AggregateMetrics:
    high_count: int
    high_fraction: float
    mean_high_prob: float | None


@dataclass(frozen=True)
class EntityProfile:
    entity_id: str
    rating: float | None
    total_messages: int
    counts: dict
    confident_counts: dict
    tau: float
    # (message_id, P(high)) for confident label-3 messages, in input order
    evidence: tuple = ()

    @property
    def high_count(self) -> int:
        return self.confident_counts[HIGH_COMMIT]

    @property
    def high_fraction(self) -> float:
        return self.high_count / self.total_messages if self.total_messages else 0.0

    @property
    def mean_high_prob(self) -> float | None:
        if not self.evidence:
            return None
        return math.fsum(p for _, p in self.evidence) / len(self.evidence)

    @property
    def metrics(self) -> AggregateMetrics:
        return AggregateMetrics(self.high_count, self.high_fraction, self.mean_high_prob)

    def metric(self, name: str):
        if name == COUNT:
            return self.high_count
        if name == FRACTION:
            return self.high_fraction
        if name == MEAN_PROB:
            return self.mean_high_prob
        raise ValueError(f"unknown metric {name!r}")

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "rating": self.rating,
            "total_messages": self.total_messages,
            "counts": dict(self.counts),
            "confident_counts": dict(self.confident_counts),
            "tau": self.tau,
            "high_count": self.high_count,
            "high_fraction": self.high_fraction,
            "mean_high_prob": self.mean_high_prob,
        }


def aggregate_entity(classifications: Sequence[MessageClassification], tau: float = DEFAULT_TAU,
                     rating: float | None = None, entity_id: str | None = None) -> EntityProfile:
    """Counts per final label, confident counts and label-3 evidence."""
    ids = {c.entity_id for c in classifications}
    if len(ids) > 1:
        raise ValueError(f"classifications mix entities: {sorted(ids)}")
    if ids:
        entity_id = ids.pop()
    elif entity_id is None:
        raise ValueError("entity_id is required for an empty message list")
    counts = dict.fromkeys(FINAL_LABELS, 0)
    for c in classifications:
        counts[c.final_label] += 1
    confident = dict.fromkeys(FINAL_LABELS, 0)
    evidence = []
    for c in confident_subset(classifications, tau):
        confident[c.final_label] += 1
        if c.final_label == HIGH_COMMIT:
            evidence.append((c.message_id, c.commit_probability))
    return EntityProfile(entity_id, rating, len(classifications), counts, confident, tau,
                         tuple(evidence))


def aggregate_corpus(classifications: Iterable[MessageClassification], tau: float = DEFAULT_TAU,
                     ratings: Mapping[str, float] | None = None) -> list[EntityProfile]:
    """One profile per entity seen in ``classifications``, sorted by id."""
    groups = defaultdict(list)
    for c in classifications:
        groups[c.entity_id].append(c)
    ratings = ratings or {}
    return [aggregate_entity(groups[e], tau, ratings.get(e)) for e in sorted(groups)]


def _rank_key(metric):
    def key(p: EntityProfile):
        value = p.metric(metric)
        if value is None:
            return (1, 0.0, p.entity_id)
        return (0, -value, p.entity_id)
    return key


def rank_top_k(profiles: Sequence[EntityProfile], metric: str, k: int = DEFAULT_TOP_K) -> list[str]:
    """Entity ids of the ``k`` best profiles under ``metric``, best first.

    Ties go to the smaller entity id; an undefined mean probability ranks last.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return [p.entity_id for p in sorted(profiles, key=_rank_key(metric))[:k]]


def intersect_top_sets(sets) -> set:
    sets = [set(s) for s in sets]
    if not sets:
        raise ValueError("need at least one set")
    return set.intersection(*sets)


@dataclass
class FlaggedEntity:
    entity_id: str
    rating: float
    metrics: AggregateMetrics
    evidence: tuple

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "rating": self.rating,
            "high_count": self.metrics.high_count,
            "high_fraction": self.metrics.high_fraction,
            "mean_high_prob": self.metrics.mean_high_prob,
            "evidence": [{"message_id": m, "probability": p} for m, p in self.evidence],
        }


@dataclass
class AuditReport:
    k: int
    tau: float
    rating_mean: float
    top_sets: dict
    intersection: list
    flagged: list
    n_entities: int
    notes: list = field(default_factory=list)

    @property
    def flagged_ids(self) -> list[str]:
        return [f.entity_id for f in self.flagged]

    def to_dict(self) -> dict:
        return {
            "parameters": {"k": self.k, "tau": self.tau, "rating_mean": self.rating_mean,
                           "n_entities": self.n_entities},
            "top_sets": {m: list(ids) for m, ids in self.top_sets.items()},
            "intersection": list(self.intersection),
            "flagged": [f.to_dict() for f in self.flagged],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        lines = [
            f"entities ranked: {self.n_entities}; k={self.k}; tau={self.tau}",
            f"rating mean: {self.rating_mean:.6g}",
            f"top-{self.k} intersection: {len(self.intersection)} entities",
            f"flagged (rating below mean, ascending): {len(self.flagged)}",
        ]
        for f in self.flagged:
            mp = f.metrics.mean_high_prob
            lines.append(
                f"  {f.entity_id}: rating={f.rating:.6g} high={f.metrics.high_count} "
                f"fraction={f.metrics.high_fraction:.4f} "
                f"mean_prob={'n/a' if mp is None else format(mp, '.4f')}"
            )
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def flag_inauthentic(profiles: Sequence[EntityProfile], k: int = DEFAULT_TOP_K,
                     tau: float | None = None) -> AuditReport:
    """Entities in all three top-k sets whose rating is below the population mean.

    The mean covers every profile that has at least one message. Only
    entities with at least one confident high-commitment message compete
    for the top-k sets.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    missing = [p.entity_id for p in profiles if p.rating is None]
    if missing:
        raise MissingRatingError(missing)
    taus = {p.tau for p in profiles}
    if tau is None:
        tau = taus.pop() if len(taus) == 1 else DEFAULT_TAU
    elif taus and taus != {tau}:
        raise ValueError(f"profiles were aggregated with tau {sorted(taus)}, not {tau}")

    active = [p for p in profiles if p.total_messages > 0]
    if not active:
        return AuditReport(k, tau, math.nan, {m: [] for m in METRICS}, [], [], 0)
    # exact rational comparison, so equal ratings are never "below" their mean
    total = sum(Fraction(p.rating) for p in active)
    n = len(active)
    mean = float(total / n)
    eligible = [p for p in active if p.high_count > 0]
    top = {m: rank_top_k(eligible, m, k) if eligible else [] for m in METRICS}
    inter = intersect_top_sets(top.values())
    by_id = {p.entity_id: p for p in active}
    chosen = sorted((by_id[e] for e in inter if Fraction(by_id[e].rating) * n < total),
                    key=lambda p: (p.rating, p.entity_id))
    flagged = [FlaggedEntity(p.entity_id, p.rating, p.metrics, p.evidence) for p in chosen]
    notes = [
        "rating mean is taken over all entities with at least one message",
        "entities without confident high-commitment messages are not ranked",
        "being flagged does not establish wrongdoing; evidence needs manual review",
    ]
    return AuditReport(k, tau, mean, top, sorted(inter), flagged, len(active), notes)


def audit(classifications: Iterable[MessageClassification], ratings: Mapping[str, float],
          k: int = DEFAULT_TOP_K, tau: float = DEFAULT_TAU) -> AuditReport:
    return flag_inauthentic(aggregate_corpus(classifications, tau, ratings), k, tau)


def write_evidence_csv(report: AuditReport, texts: Mapping[str, str], fh):
    """Worksheet of flagged entities' confident label-3 messages for re-annotation."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["entity_id", "message_id", "text", "probability", "label"])
    for f in report.flagged:
        for mid, prob in f.evidence:
            w.writerow([f.entity_id, mid, texts.get(mid, ""), repr(prob), ""])


def write_profiles_csv(profiles: Sequence[EntityProfile], fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["entity_id", "rating", "total_messages", "irrelevant", "non_support",
                "low_commit", "high_commit", "confident_non_support", "confident_low_commit",
                "confident_high_commit", "high_fraction", "mean_high_prob"])
    for p in profiles:
        c, cc = p.counts, p.confident_counts
        mp = p.mean_high_prob
        w.writerow([p.entity_id, "" if p.rating is None else repr(p.rating), p.total_messages,
                    c[IRRELEVANT], c[NON_SUPPORT], c[LOW_COMMIT], c[HIGH_COMMIT],
                    cc[NON_SUPPORT], cc[LOW_COMMIT], cc[HIGH_COMMIT],
                    repr(p.high_fraction), "" if mp is None else repr(mp)])


def design_rows(profiles: Sequence[EntityProfile]) -> list[EntityDesignRow]:
    """Regression rows from confident class counts; unrated or silent entities are skipped."""
    return [
        EntityDesignRow.from_counts(p.entity_id, p.confident_counts[NON_SUPPORT],
                                    p.confident_counts[LOW_COMMIT],
                                    p.confident_counts[HIGH_COMMIT], p.rating)
        for p in profiles
        if p.rating is not None and p.total_messages > 0
    ]
