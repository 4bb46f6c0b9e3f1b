"""Relevance gate followed by the support and commitment classifiers."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from typing import Iterable

from . import embedding
from .features import featurize
from .learn import DECISION_THRESHOLD, LogisticModel, predict_proba
from .textproc import AnnotatedMessage, Annotator, RawMessage

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.7

IRRELEVANT = "irrelevant"
NON_SUPPORT = "0/1"
LOW_COMMIT = "2"
HIGH_COMMIT = "3"
FINAL_LABELS = (IRRELEVANT, NON_SUPPORT, LOW_COMMIT, HIGH_COMMIT)

# Meanings of the 4-point annotation scale.
COMMITMENT_LABELS = {
    0: "not about the cause",
    1: "about the cause, no support",
    2: "support in words (low commitment)",
    3: "support through actions (high commitment)",
}


@dataclass(frozen=True)
class MessageClassification:
    message_id: str
    entity_id: str
    relevance: float | None
    support_probability: float | None = None
    commit_probability: float | None = None
    final_label: str = IRRELEVANT

    @property
    def stage1(self) -> str | None:
        if self.support_probability is None:
            return None
        return "SUPPORT" if self.commit_probability is not None else "NON_SUPPORT"

    @property
    def stage2(self) -> str | None:
        if self.commit_probability is None:
            return None
        return "HIGH_COMMIT" if self.final_label == HIGH_COMMIT else "LOW_COMMIT"

    @property
    def confidence(self) -> float | None:
        """Probability of the assigned side at the last stage taken."""
        if self.final_label == HIGH_COMMIT:
            return self.commit_probability
        if self.final_label == LOW_COMMIT:
            return 1.0 - self.commit_probability
        if self.final_label == NON_SUPPORT:
            return 1.0 - self.support_probability
        return None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MessageClassification":
        label = data["final_label"]
        if label not in FINAL_LABELS:
            raise ValueError(f"unknown final label {label!r}")
        return cls(
            message_id=str(data["message_id"]),
            entity_id=str(data["entity_id"]),
            relevance=data.get("relevance"),
            support_probability=data.get("support_probability"),
            commit_probability=data.get("commit_probability"),
            final_label=label,
        )


def _check_stage(model: LogisticModel, stage: str):
    if model.stage is not None and model.stage != stage:
        raise ValueError(f"expected a {stage} model, got {model.stage!r}")
    if model.vocab is None or model.config is None:
        raise ValueError("model lacks its vocabulary or feature configuration")


def classify_message(msg: AnnotatedMessage, support_model: LogisticModel,
                     commit_model: LogisticModel, profile: embedding.CauseProfile,
                     table: embedding.EmbeddingTable,
                     relevance_threshold: float = embedding.DEFAULT_RELEVANCE_THRESHOLD,
                     decision_threshold: float = DECISION_THRESHOLD) -> MessageClassification:
    if not -1.0 <= relevance_threshold <= 1.0:
        raise ValueError("relevance threshold must lie in [-1, 1]")
    _check_stage(support_model, "support")
    _check_stage(commit_model, "commitment")
    score = embedding.relevance_score(msg.tokens, profile, table)
    if not embedding.is_relevant(score, relevance_threshold):
        return MessageClassification(msg.message_id, msg.entity_id, score)

    fv = featurize(msg, support_model.vocab, support_model.config, table, profile)
    p_support = predict_proba(support_model, fv)
    if p_support < decision_threshold:
        return MessageClassification(msg.message_id, msg.entity_id, score, p_support,
                                     final_label=NON_SUPPORT)

    fv = featurize(msg, commit_model.vocab, commit_model.config, table, profile)
    p_high = predict_proba(commit_model, fv)
    label = HIGH_COMMIT if p_high >= decision_threshold else LOW_COMMIT
    return MessageClassification(msg.message_id, msg.entity_id, score, p_support, p_high, label)


def classify_corpus(messages: Iterable[RawMessage | AnnotatedMessage], support_model, commit_model,
                    profile, table, threshold: float = embedding.DEFAULT_RELEVANCE_THRESHOLD,
                    annotator: Annotator | None = None, errors: list | None = None,
                    decision_threshold: float = DECISION_THRESHOLD) -> list[MessageClassification]:
    """Classify messages in order. A failing message is logged, appended to
    ``errors`` as ``(position, message_id, exception)`` and skipped."""
    annotator = annotator or Annotator()
    out = []
    for pos, msg in enumerate(messages):
        try:
            if isinstance(msg, RawMessage):
                msg = annotator.annotate(msg)
            out.append(classify_message(msg, support_model, commit_model, profile, table,
                                        threshold, decision_threshold))
        except Exception as exc:  # noqa: BLE001 -- one bad message must not sink a batch
            mid = getattr(msg, "message_id", None)
            log.warning("skipping message %s: %s", mid, exc)
            if errors is not None:
                errors.append((pos, mid, exc))
    return out


def confident_subset(classifications, tau: float = DEFAULT_TAU) -> list[MessageClassification]:
    """Classifications whose assigned-side probability exceeds ``tau``.

    Messages stopped by the relevance gate carry no prediction and are never
    returned.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return [c for c in classifications if c.confidence is not None and c.confidence > tau]


def write_classifications(classifications, fh):
    for c in classifications:
        fh.write(json.dumps(c.to_dict(), sort_keys=True) + "\n")


def read_classifications(fh) -> list[MessageClassification]:
    out = []
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            out.append(MessageClassification.from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"bad classification record at line {lineno}: {exc}") from None
    return out
