"""Seeded synthetic corpora and entity fixtures for demos and tests."""

from __future__ import annotations

import numpy as np

from .pipeline import HIGH_COMMIT, IRRELEVANT, LOW_COMMIT, NON_SUPPORT, MessageClassification
from .stats import EntityDesignRow
from .textproc import RawMessage

# Word pools for the demo corpus. Topic nouns resolve in the toy table;
# the verbs mostly do not, which is what separates the commitment levels.
_ECO_NOUNS = "trees forests climate environment wildlife reef energy habitat rainforests river".split()
_LOW_WORDS = "love protect celebrate happy great support nature planet earth beautiful".split()
_HIGH_WORDS = "planted introduced voted donated installed recycled restored cleaned funded built".split()
_NEUTRAL_WORDS = "check out photo stunning landscape week river nature view trip".split()
_OFFTOPIC = "pizza party tonight friends football game music movie coffee weekend".split()


def separable_corpus(n_messages: int = 100, vocab_size: int = 50, seed: int = 0,
                     negative_labels=(0, 1), positive_labels=(2, 3),
                     length=(5, 9)) -> tuple[list[RawMessage], list[int]]:
    """Half the messages draw from one vocabulary, half from a disjoint one.

    Labels alternate within each half over ``negative_labels`` and
    ``positive_labels`` respectively, so a bag-of-words separator exists for
    whichever stage those labels feed.
    """
    rng = np.random.default_rng(seed)
    vocab_a = [f"alpha{i:02d}" for i in range(vocab_size)]
    vocab_b = [f"bravo{i:02d}" for i in range(vocab_size)]
    msgs, labels = [], []
    for i in range(n_messages):
        positive = i % 2 == 1
        vocab = vocab_b if positive else vocab_a
        pool = positive_labels if positive else negative_labels
        words = rng.choice(vocab, size=int(rng.integers(length[0], length[1] + 1)))
        msgs.append(RawMessage(f"ent{i % 7}", f"m{i:04d}", " ".join(words)))
        labels.append(int(pool[(i // 2) % len(pool)]))
    return msgs, labels


def _sentence(rng, *pools, k=(2, 3)):
    words = []
    for pool in pools:
        words += list(rng.choice(pool, size=int(rng.integers(k[0], k[1] + 1)), replace=False))
    return " ".join(words)


def demo_message(rng, label: int) -> str:
    """A message whose wording follows the 4-point commitment scale."""
    if label == 0:
        return _sentence(rng, _OFFTOPIC, k=(3, 5))
    if label == 1:
        return _sentence(rng, _NEUTRAL_WORDS, _ECO_NOUNS)
    if label == 2:
        return "we " + _sentence(rng, _LOW_WORDS, _ECO_NOUNS)
    return "we " + _sentence(rng, _HIGH_WORDS, _ECO_NOUNS)


def demo_training_set(n_per_label: int = 30, seed: int = 0):
    rng = np.random.default_rng(seed)
    msgs, labels = [], []
    for i in range(n_per_label * 4):
        label = i % 4
        msgs.append(RawMessage(f"train{i % 5}", f"t{i:04d}", demo_message(rng, label)))
        labels.append(label)
    return msgs, labels


def demo_entities(n_entities: int = 30, seed: int = 0, planted: str = "ent07"):
    """Entities whose message mix tracks their rating, plus one planted
    entity that posts mostly high-commitment messages despite a low rating.

    Returns (messages, ratings).
    """
    rng = np.random.default_rng(seed)
    msgs, ratings = [], {}
    for e in range(n_entities):
        eid = f"ent{e:02d}"
        if eid == planted:
            rating = 1.0
            mix = [0.1, 0.1, 0.1, 0.7]
        elif e % 2 == 0:
            rating = float(rng.integers(7, 10))
            mix = [0.3, 0.2, 0.2, 0.3]
        else:
            rating = float(rng.integers(1, 5))
            mix = [0.5, 0.3, 0.2, 0.0]
        ratings[eid] = rating
        n = int(rng.integers(15, 25))
        for j, label in enumerate(rng.choice(4, size=n, p=mix)):
            msgs.append(RawMessage(eid, f"{eid}-{j:03d}", demo_message(rng, int(label))))
    return msgs, ratings


def audit_fixture(n_entities: int = 30, seed: int = 0, planted: str = "e07"):
    """Classified messages for ``n_entities`` with hand-shaped class counts.

    Above-mean entities (ratings 6..9) post confident high-commitment
    messages; other below-mean entities (ratings 1..4) post none. The planted
    entity posts the most high-commitment messages, at the highest fraction
    and probability, yet has rating 1.0. Returns (classifications, ratings).
    """
    rng = np.random.default_rng(seed)
    out, ratings = [], {}
    for e in range(n_entities):
        eid = f"e{e:02d}"
        if eid == planted:
            ratings[eid] = 1.0
            plan = [(HIGH_COMMIT, 40), (LOW_COMMIT, 2), (NON_SUPPORT, 3), (IRRELEVANT, 5)]
            p_high = (0.95, 0.99)
        elif e % 3 == 0:
            ratings[eid] = float(rng.integers(1, 5))
            plan = [(LOW_COMMIT, int(rng.integers(3, 10))), (NON_SUPPORT, int(rng.integers(5, 20))),
                    (IRRELEVANT, int(rng.integers(10, 30)))]
            p_high = (0.75, 0.9)
        else:
            ratings[eid] = float(rng.integers(6, 10))
            plan = [(HIGH_COMMIT, int(rng.integers(3, 20))), (LOW_COMMIT, int(rng.integers(3, 10))),
                    (NON_SUPPORT, int(rng.integers(5, 20))), (IRRELEVANT, int(rng.integers(10, 30)))]
            p_high = (0.75, 0.9)
        j = 0
        for label, count in plan:
            for _ in range(count):
                mid = f"{eid}-{j:03d}"
                j += 1
                if label == IRRELEVANT:
                    out.append(MessageClassification(mid, eid, float(rng.uniform(-0.2, 0.29))))
                    continue
                rel = float(rng.uniform(0.3, 0.9))
                if label == NON_SUPPORT:
                    ps = float(rng.uniform(0.05, 0.45))
                    out.append(MessageClassification(mid, eid, rel, ps, None, NON_SUPPORT))
                elif label == LOW_COMMIT:
                    ph = float(rng.uniform(0.1, 0.45))
                    out.append(MessageClassification(mid, eid, rel, float(rng.uniform(0.6, 0.95)), ph,
                                                     LOW_COMMIT))
                else:
                    ph = float(rng.uniform(*p_high))
                    out.append(MessageClassification(mid, eid, rel, float(rng.uniform(0.6, 0.95)), ph,
                                                     HIGH_COMMIT))
    return out, ratings


def random_classifications(n: int, n_entities: int = 12, seed: int = 0) -> list[MessageClassification]:
    """Arbitrary but internally consistent classifications."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        eid = f"r{int(rng.integers(n_entities)):02d}"
        mid = f"x{i:05d}"
        kind = int(rng.integers(4))
        if kind == 0:
            out.append(MessageClassification(mid, eid, float(rng.uniform(-1, 0.3))))
            continue
        rel = float(rng.uniform(0.3, 1.0))
        ps = float(rng.uniform(0.001, 0.999))
        if ps < 0.5:
            out.append(MessageClassification(mid, eid, rel, ps, None, NON_SUPPORT))
        else:
            ph = float(rng.uniform(0.001, 0.999))
            out.append(MessageClassification(mid, eid, rel, ps, ph,
                                             HIGH_COMMIT if ph >= 0.5 else LOW_COMMIT))
    return out


def regression_rows(n: int = 200, beta=(5.0, -1.0, 0.5, 1.5), sigma: float = 1.0,
                    seed: int = 0) -> list[EntityDesignRow]:
    """Entities with Poisson class counts and ratings linear in log1p(count)."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        counts = rng.poisson(np.exp(rng.uniform(0.0, 4.0, size=3)))
        x = np.log1p(counts)
        y = beta[0] + float(np.dot(beta[1:], x)) + float(rng.normal(0.0, sigma))
        rows.append(EntityDesignRow.from_counts(f"ent{i:03d}", *(int(c) for c in counts), y))
    return rows
