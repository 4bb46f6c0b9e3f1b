"""Hybrid sparse (n-grams + cue tokens) and dense (embedding) message features."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, fields, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import embedding
from .textproc import (
    CTX_PREFIX,
    NEG_PREFIX,
    PERSON_MARKERS,
    POS_TAGS,
    AnnotatedMessage,
    Kind,
    is_keyword,
    keyword_contexts,
)

KEYWORD_COUNT = "_KEYWORDS_"
SELF_MENTION = "_SELF_MENTION_"
RETWEET = "_RETWEET_"
SELF_RETWEET = "_SELF_RETWEET_"
POS_FEATURE = "_POS_{}_"

CUE_FAMILIES = ("negation", "persons", "keyword_count", "context_words",
                "self_interactions", "pos_counts")
DENSE_BLOCKS = ("message_vector", "keywords_vector", "context_vector", "relevance_scalar")
_BLOCK_PREFIX = {
    "message_vector": "mvec",
    "keywords_vector": "kvec",
    "context_vector": "cvec",
}


@dataclass(frozen=True)
class FeatureConfig:
    ngrams: bool = True
    ngram_min: int = 1
    ngram_max: int = 1
    min_df: int = 1
    max_df: float = 1.0
    negation: bool = False
    persons: bool = False
    keyword_count: bool = False
    context_words: bool = False
    self_interactions: bool = False
    pos_counts: bool = False
    context_window: int = 1
    message_vector: bool = False
    keywords_vector: bool = False
    context_vector: bool = False
    relevance_scalar: bool = False
    keywords_n: int = 3
    standardize_dense: bool = False

    def __post_init__(self):
        if not 1 <= self.ngram_min <= self.ngram_max <= 3:
            raise ValueError("need 1 <= ngram_min <= ngram_max <= 3")
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")
        if not 0 < self.max_df <= 1:
            raise ValueError("max_df must be in (0, 1]")
        if self.context_window < 1:
            raise ValueError("context_window must be >= 1")
        if self.keywords_n < 1:
            raise ValueError("keywords_n must be >= 1")

    @property
    def uses_dense(self) -> bool:
        return any(getattr(self, b) for b in DENSE_BLOCKS)

    @property
    def needs_profile(self) -> bool:
        return self.uses_dense or self.keyword_count or self.context_words

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown feature option(s): {sorted(unknown)}")
        return cls(**data)


_ALL_CUES = {f: True for f in CUE_FAMILIES}
_ALL_DENSE = {b: True for b in DENSE_BLOCKS}

PRESETS = {
    "bow": FeatureConfig(),
    "bow+cues": FeatureConfig(**_ALL_CUES),
    "embed": FeatureConfig(ngrams=False, **_ALL_DENSE),
    "best-combination": FeatureConfig(**_ALL_CUES, **_ALL_DENSE),
}


def default_grid(presets=tuple(PRESETS), min_df=(1, 3, 5), max_df=(0.6, 0.8, 1.0),
                 ngram_max=(1, 2, 3)) -> list[FeatureConfig]:
    """Cartesian grid over presets and pruning/n-gram settings."""
    grid = []
    for name in presets:
        base = PRESETS[name]
        if not base.ngrams:
            # pruning and n-gram span only touch sparse columns
            grid.append(base)
            continue
        for lo in min_df:
            for hi in max_df:
                for n in ngram_max:
                    grid.append(replace(base, min_df=lo, max_df=hi, ngram_max=n))
    return grid


def _segments(tokens):
    seg = []
    for tok in tokens:
        if tok.kind in (Kind.WORD, Kind.HASHTAG):
            seg.append(tok.surface)
        elif seg:
            yield seg
            seg = []
    if seg:
        yield seg


def ngram_counts(tokens, lo: int, hi: int) -> Counter:
    """Word n-grams that never span punctuation or non-word tokens."""
    counts = Counter()
    for seg in _segments(tokens):
        for n in range(lo, hi + 1):
            for i in range(len(seg) - n + 1):
                counts[" ".join(seg[i:i + n])] += 1
    return counts


def _require_profile(config, profile):
    if profile is None and (config.keyword_count or config.context_words):
        raise ValueError("keyword cues need a cause profile")


def sparse_features(msg: AnnotatedMessage, config: FeatureConfig,
                    profile: embedding.CauseProfile | None = None) -> Counter:
    """Raw feature counts for one message, before vocabulary lookup."""
    _require_profile(config, profile)
    tokens = msg.tokens
    feats = ngram_counts(tokens, config.ngram_min, config.ngram_max) if config.ngrams else Counter()
    if config.negation:
        for tok in tokens:
            if tok.negated:
                feats[NEG_PREFIX + tok.surface] += 1
    if config.persons:
        for person, count in msg.person_markers.items():
            if count:
                feats[PERSON_MARKERS[person]] += count
    if config.keyword_count:
        keywords = profile.keywords
        n = sum(1 for tok in tokens if is_keyword(tok, keywords))
        if n:
            feats[KEYWORD_COUNT] = n
    if config.context_words:
        for w in keyword_contexts(tokens, profile.keywords, config.context_window):
            feats[CTX_PREFIX + w] += 1
    if config.self_interactions:
        if msg.mentions_self:
            feats[SELF_MENTION] = 1
        if msg.is_retweet:
            feats[RETWEET] = 1
        if msg.retweet_of_self:
            feats[SELF_RETWEET] = 1
    if config.pos_counts:
        for tok in tokens:
            if tok.kind == Kind.WORD:
                feats[POS_FEATURE.format(tok.pos)] += 1
    return feats


@dataclass(frozen=True)
class Vocabulary:
    names: tuple[str, ...]
    document_frequencies: tuple[int, ...]
    n_documents: int

    def __post_init__(self):
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def index(self) -> dict[str, int]:
        return self._index

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "document_frequencies": list(self.document_frequencies),
            "n_documents": self.n_documents,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        names = tuple(data["names"])
        if list(names) != sorted(set(names)):
            raise ValueError("vocabulary names must be unique and sorted")
        return cls(names, tuple(int(x) for x in data["document_frequencies"]), int(data["n_documents"]))


def build_vocabulary(corpus: Sequence[AnnotatedMessage], config: FeatureConfig,
                     profile: embedding.CauseProfile | None = None) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df = Counter()
    for msg in corpus:
        df.update(sparse_features(msg, config, profile).keys())
    n_docs = len(corpus)
    ceiling = config.max_df * n_docs
    kept = sorted(name for name, c in df.items() if config.min_df <= c <= ceiling)
    return Vocabulary(tuple(kept), tuple(df[n] for n in kept), n_docs)


def dense_layout(config: FeatureConfig, dimension: int | None) -> tuple[tuple[str, int, int], ...]:
    """(block, offset, width) triples for the enabled dense blocks."""
    layout = []
    offset = 0
    for block in DENSE_BLOCKS:
        if not getattr(config, block):
            continue
        if block == "relevance_scalar":
            width = 2
        else:
            if dimension is None:
                raise ValueError("dense embedding blocks need the table dimension")
            width = dimension + 1
        layout.append((block, offset, width))
        offset += width
    return tuple(layout)


def dense_width(config: FeatureConfig, dimension: int | None) -> int:
    return sum(w for _, _, w in dense_layout(config, dimension))


def dense_names(config: FeatureConfig, dimension: int | None) -> list[str]:
    names = []
    for block, _, width in dense_layout(config, dimension):
        if block == "relevance_scalar":
            names += ["relevance", "relevance_present"]
        else:
            prefix = _BLOCK_PREFIX[block]
            names += [f"{prefix}_{i}" for i in range(width - 1)] + [f"{prefix}_present"]
    return names


def feature_names(vocab: Vocabulary, config: FeatureConfig, dimension: int | None = None) -> list[str]:
    return list(vocab.names) + dense_names(config, dimension)


@dataclass(frozen=True)
class FeatureVector:
    indices: np.ndarray
    values: np.ndarray
    dense: np.ndarray
    layout: tuple[tuple[str, int, int], ...] = ()

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            self.layout == other.layout
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.dense, other.dense)
        )

    __hash__ = None

    def to_array(self, n_sparse: int) -> np.ndarray:
        out = np.zeros(n_sparse + len(self.dense))
        out[self.indices] = self.values
        out[n_sparse:] = self.dense
        return out


def _block(vec):
    if vec is None:
        return None
    return np.append(vec, 1.0)


def featurize(msg: AnnotatedMessage, vocab: Vocabulary, config: FeatureConfig,
              table: embedding.EmbeddingTable | None = None,
              profile: embedding.CauseProfile | None = None) -> FeatureVector:
    counts = sparse_features(msg, config, profile)
    hits = sorted((vocab.index[name], c) for name, c in counts.items() if name in vocab.index)
    indices = np.array([i for i, _ in hits], dtype=np.int64)
    values = np.array([c for _, c in hits], dtype=float)

    layout = dense_layout(config, table.dimension if table is not None else None)
    blocks = []
    if layout:
        if profile is None or table is None:
            raise ValueError("dense features need an embedding table and a cause profile")
        for block, _, width in layout:
            if block == "message_vector":
                part = _block(embedding.message_vector(msg.tokens, table))
            elif block == "keywords_vector":
                part = _block(embedding.keywords_vector(msg.tokens, profile, table, config.keywords_n))
            elif block == "context_vector":
                ctx = keyword_contexts(msg.tokens, profile.keywords, config.context_window)
                part = _block(embedding.message_vector(ctx, table))
            else:
                score = embedding.relevance_score(msg.tokens, profile, table)
                part = None if score is None else np.array([score, 1.0])
            blocks.append(np.zeros(width) if part is None else part)
    dense = np.concatenate(blocks) if blocks else np.zeros(0)
    return FeatureVector(indices, values, dense, layout)


def featurize_corpus(corpus, vocab, config, table=None, profile=None) -> list[FeatureVector]:
    return [featurize(m, vocab, config, table, profile) for m in corpus]


def to_matrix(vectors: Sequence[FeatureVector], n_sparse: int, n_dense: int) -> sp.csr_matrix:
    """Stack feature vectors into a CSR matrix of width n_sparse + n_dense."""
    rows, cols, vals = [], [], []
    for r, fv in enumerate(vectors):
        if len(fv.dense) != n_dense:
            raise ValueError(f"dense width {len(fv.dense)} != expected {n_dense}")
        if len(fv.indices) and fv.indices[-1] >= n_sparse:
            raise ValueError("sparse index outside the vocabulary")
        nz = np.flatnonzero(fv.dense)
        rows.append(np.full(len(fv.indices) + len(nz), r))
        cols.append(fv.indices)
        cols.append(nz + n_sparse)
        vals.append(fv.values)
        vals.append(fv.dense[nz])
    shape = (len(vectors), n_sparse + n_dense)
    if not vectors:
        return sp.csr_matrix(shape)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape
    )
