import io
import time

import pytest

from causecommit import ingest
from causecommit.ingest import IngestError, LabeledExample
from causecommit.textproc import RawMessage


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


CORPUS = [RawMessage("acme", "1", "We planted trees, today!"),
          RawMessage("acme", "2", 'quote "x"\nnewline'),
          RawMessage("beta", "3", "pizza")]


class TestMessages:
    def test_empty(self, tmp_path):
        assert ingest.ingest_messages(write(tmp_path, "m.jsonl", "")) == []

    @pytest.mark.parametrize("fmt", ["jsonl", "csv"])
    def test_round_trip(self, tmp_path, fmt):
        p = tmp_path / f"m.{fmt}"
        ingest.write_messages(CORPUS, p, fmt)
        assert ingest.ingest_messages(p, fmt) == CORPUS

    def test_malformed_line(self, tmp_path):
        p = write(tmp_path, "m.jsonl", '{"entity":"a","id":"1","text":"x"}\n{oops\n')
        with pytest.raises(IngestError, match="line 2"):
            ingest.ingest_messages(p)

    def test_duplicate_id(self, tmp_path):
        rows = ['{"entity":"a","id":"1","text":"x"}', '{"entity":"a","id":"2","text":"y"}',
                '{"entity":"b","id":"1","text":"z"}']
        with pytest.raises(IngestError, match="line 3.*duplicate"):
            ingest.ingest_messages(write(tmp_path, "m.jsonl", "\n".join(rows)))

    def test_missing_field(self, tmp_path):
        with pytest.raises(IngestError, match="text"):
            ingest.ingest_messages(write(tmp_path, "m.jsonl", '{"entity":"a","id":"1"}\n'))


class TestRatings:
    def test_single(self, tmp_path):
        assert ingest.ingest_ratings(write(tmp_path, "r.csv", "acme,7.5\n")) == {"acme": 7.5}

    def test_header_optional(self, tmp_path):
        assert ingest.ingest_ratings(write(tmp_path, "r.csv", "entity,rating\nacme,7\n")) == {"acme": 7.0}

    @pytest.mark.parametrize("text", ["a,1\na,2\n", "a,high\n", "a,inf\n", "a,1,2\n"])
    def test_errors(self, tmp_path, text):
        with pytest.raises(IngestError):
            ingest.ingest_ratings(write(tmp_path, "r.csv", text))

    def test_large_file_fast(self, tmp_path):
        ratings = {f"ent{i:04d}": (i * 37 % 101) / 10 for i in range(966)}
        p = tmp_path / "r.csv"
        ingest.write_ratings(ratings, p)
        start = time.perf_counter()
        assert ingest.ingest_ratings(p) == ratings
        assert time.perf_counter() - start < 1.0


class TestLabels:
    def test_range(self, tmp_path):
        with pytest.raises(IngestError, match="outside"):
            ingest.ingest_labels(write(tmp_path, "l.csv", "1,4\n"), CORPUS)

    def test_unknown_id(self, tmp_path):
        with pytest.raises(IngestError, match="not in corpus"):
            ingest.ingest_labels(write(tmp_path, "l.csv", "99,1\n"), CORPUS)

    def test_valid(self, tmp_path):
        corpus = [RawMessage("e", f"m{i}", "x") for i in range(10)]
        examples = [LabeledExample(f"m{i}", i % 4) for i in range(10)]
        p = tmp_path / "l.csv"
        ingest.write_labels(examples, p)
        assert ingest.ingest_labels(p, corpus) == examples
        msgs, labels = ingest.labeled_corpus(corpus, examples)
        assert [m.message_id for m in msgs] == [e.message_id for e in examples]
        assert labels == [e.label for e in examples]


class TestTemplate:
    @pytest.fixture
    def corpus(self):
        return [RawMessage("a", "1", "we planted trees"), RawMessage("a", "2", "climate energy trees forests"),
                RawMessage("a", "3", "pizza party"), RawMessage("b", "4", "football tonight"),
                RawMessage("c", "5", "wildlife habitat"), RawMessage("c", "6", "river trip")]

    def rows(self, text):
        import csv
        return list(csv.DictReader(io.StringIO(text)))

    def test_top1(self, corpus, eco_profile, toy_table):
        rows = self.rows(ingest.emit_annotation_template(corpus, eco_profile, toy_table, 0.3, 1))
        relevant = {e for e, _, _ in ingest.rank_relevant(corpus, eco_profile, toy_table)}
        assert sorted(r["entity_id"] for r in rows) == sorted(relevant)
        assert "b" not in relevant

    def test_sorted_within_entity(self, corpus, eco_profile, toy_table, tmp_path):
        from causecommit.embedding import relevance_score
        from causecommit.textproc import tokenize
        p = tmp_path / "t.csv"
        text = ingest.emit_annotation_template(corpus, eco_profile, toy_table, 0.3, 20, p)
        assert p.read_text() == text
        rows = self.rows(text)
        assert all(r["label"] == "" for r in rows)
        for ent in {r["entity_id"] for r in rows}:
            got = [r["message_id"] for r in rows if r["entity_id"] == ent]
            scored = [(relevance_score(tokenize(m), eco_profile, toy_table), m.message_id)
                      for m in corpus if m.entity_id == ent]
            brute = [mid for s, mid in sorted(scored, key=lambda t: -t[0]) if s is not None and s >= 0.3]
            assert got == brute

    def test_bad_n(self, corpus, eco_profile, toy_table):
        with pytest.raises(ValueError):
            ingest.emit_annotation_template(corpus, eco_profile, toy_table, 0.3, 0)
