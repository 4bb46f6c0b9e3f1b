"""Reading and writing corpora, ratings, labels and annotation worksheets."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import embedding
from .textproc import Annotator, RawMessage, tokenize

LABEL_RANGE = (0, 1, 2, 3)


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledExample:
    message_id: str
    label: int


def _open_text(path_or_fh, mode="r"):
    if hasattr(path_or_fh, "read") or hasattr(path_or_fh, "write"):
        return path_or_fh, False
    return open(path_or_fh, mode, encoding="utf-8", newline=""), True


def _record_to_message(rec, where):
    if not isinstance(rec, dict):
        raise IngestError(f"{where}: expected an object")
    try:
        entity, mid, text = rec["entity"], rec["id"], rec["text"]
    except KeyError as exc:
        raise IngestError(f"{where}: missing field {exc.args[0]!r}") from None
    if text is None:
        text = ""
    if not isinstance(text, str):
        raise IngestError(f"{where}: text must be a string")
    try:
        return RawMessage(str(entity), str(mid), text)
    except ValueError as exc:
        raise IngestError(f"{where}: {exc}") from None


def ingest_messages(path, fmt: str = "jsonl") -> list[RawMessage]:
    """Messages with fields ``entity``, ``id`` and ``text``, in file order."""
    fh, close = _open_text(path)
    try:
        if fmt == "jsonl":
            records = _jsonl_records(fh)
        elif fmt == "csv":
            records = _csv_records(fh)
        else:
            raise ValueError(f"unknown message format {fmt!r}")
        out = []
        seen = {}
        for where, rec in records:
            msg = _record_to_message(rec, where)
            if msg.message_id in seen:
                raise IngestError(f"{where}: duplicate message id {msg.message_id!r} "
                                  f"(first seen at {seen[msg.message_id]})")
            seen[msg.message_id] = where
            out.append(msg)
        return out
    finally:
        if close:
            fh.close()


def _jsonl_records(fh):
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        yield f"line {lineno}", rec


def _csv_records(fh):
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        return
    missing = {"entity", "id", "text"} - set(reader.fieldnames)
    if missing:
        raise IngestError(f"line 1: CSV header lacks {sorted(missing)}")
    for row in reader:
        if None in row:
            raise IngestError(f"line {reader.line_num}: too many fields")
        yield f"line {reader.line_num}", row


def write_messages(messages: Iterable[RawMessage], path, fmt: str = "jsonl"):
    fh, close = _open_text(path, "w")
    try:
        if fmt == "jsonl":
            for m in messages:
                fh.write(json.dumps({"entity": m.entity_id, "id": m.message_id, "text": m.text},
                                    ensure_ascii=False, sort_keys=True) + "\n")
        elif fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["entity", "id", "text"])
            for m in messages:
                w.writerow([m.entity_id, m.message_id, m.text])
        else:
            raise ValueError(f"unknown message format {fmt!r}")
    finally:
        if close:
            fh.close()


def _data_rows(fh, header):
    """Yield (line, row) skipping blanks and an optional header row."""
    reader = csv.reader(fh)
    first = True
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if first:
            first = False
            if [c.strip().lower() for c in row] == header:
                continue
        yield reader.line_num, row


def ingest_ratings(path) -> dict[str, float]:
    """``entity,rating`` rows; a header row is optional."""
    fh, close = _open_text(path)
    try:
        ratings = {}
        for lineno, row in _data_rows(fh, ["entity", "rating"]):
            if len(row) != 2:
                raise IngestError(f"line {lineno}: expected 2 fields, got {len(row)}")
            entity, value = row[0].strip(), row[1].strip()
            try:
                rating = float(value)
            except ValueError:
                raise IngestError(f"line {lineno}: non-numeric rating {value!r}") from None
            if not math.isfinite(rating):
                raise IngestError(f"line {lineno}: non-finite rating {value!r}")
            if not entity:
                raise IngestError(f"line {lineno}: empty entity")
            if entity in ratings:
                raise IngestError(f"line {lineno}: duplicate entity {entity!r}")
            ratings[entity] = rating
        return ratings
    finally:
        if close:
            fh.close()


def write_ratings(ratings: dict, path):
    fh, close = _open_text(path, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "rating"])
        for e, r in ratings.items():
            w.writerow([e, repr(float(r))])
    finally:
        if close:
            fh.close()


def ingest_labels(path, corpus: Sequence[RawMessage] | None = None) -> list[LabeledExample]:
    """``message_id,label`` rows checked against the label range and corpus."""
    known = None if corpus is None else {m.message_id for m in corpus}
    fh, close = _open_text(path)
    try:
        out = []
        seen = set()
        for lineno, row in _data_rows(fh, ["message_id", "label"]):
            if len(row) < 2:
                raise IngestError(f"line {lineno}: expected message_id,label")
            mid, value = row[0].strip(), row[1].strip()
            try:
                label = int(value)
            except ValueError:
                raise IngestError(f"line {lineno}: label {value!r} is not an integer") from None
            if label not in LABEL_RANGE:
                raise IngestError(f"line {lineno}: label {label} outside 0..3")
            if known is not None and mid not in known:
                raise IngestError(f"line {lineno}: message id {mid!r} not in corpus")
            if mid in seen:
                raise IngestError(f"line {lineno}: duplicate label for {mid!r}")
            seen.add(mid)
            out.append(LabeledExample(mid, label))
        return out
    finally:
        if close:
            fh.close()


def write_labels(examples: Iterable[LabeledExample], path):
    fh, close = _open_text(path, "w")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["message_id", "label"])
        for ex in examples:
            w.writerow([ex.message_id, ex.label])
    finally:
        if close:
            fh.close()


def labeled_corpus(corpus: Sequence[RawMessage], examples: Sequence[LabeledExample]):
    """Pair labels with their messages, in label-file order."""
    by_id = {m.message_id: m for m in corpus}
    return [by_id[e.message_id] for e in examples], [e.label for e in examples]


def rank_relevant(corpus: Sequence[RawMessage], profile, table,
                  threshold: float = embedding.DEFAULT_RELEVANCE_THRESHOLD):
    """(entity, message, score) for relevant messages, best first within entity."""
    scored = []
    for pos, msg in enumerate(corpus):
        score = embedding.relevance_score(tokenize(msg), profile, table)
        if embedding.is_relevant(score, threshold):
            scored.append((msg.entity_id, -score, pos, msg))
    scored.sort(key=lambda r: (r[0], r[1], r[2]))
    return [(e, m, -s) for e, s, _, m in scored]


def emit_annotation_template(corpus: Sequence[RawMessage], profile, table,
                             threshold: float = embedding.DEFAULT_RELEVANCE_THRESHOLD,
                             per_entity_top_n: int = 20, path=None) -> str:
    """Worksheet of each entity's most relevant messages with a blank label column.

    Writes to ``path`` when given and returns the CSV text.
    """
    if per_entity_top_n < 1:
        raise ValueError("per_entity_top_n must be >= 1")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["entity_id", "message_id", "relevance", "text", "label"])
    taken = {}
    for entity, msg, score in rank_relevant(corpus, profile, table, threshold):
        if taken.get(entity, 0) >= per_entity_top_n:
            continue
        taken[entity] = taken.get(entity, 0) + 1
        w.writerow([entity, msg.message_id, repr(score), msg.text, ""])
    text = buf.getvalue()
    if path is not None:
        fh, close = _open_text(path, "w")
        try:
            fh.write(text)
        finally:
            if close:
                fh.close()
    return text


def annotate_all(corpus: Sequence[RawMessage], annotator: Annotator | None = None):
    annotator = annotator or Annotator()
    return [annotator.annotate(m) for m in corpus]
