"""Word-embedding tables, cause vectors and message relevance scores."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RELEVANCE_THRESHOLD = 0.3
DEFAULT_EXPANSION_SIZE = 100

# Seed keywords per cause, as listed for relevant-message retrieval.
CAUSE_KEYWORDS = {
    "eco": [
        "environment", "ecosystem", "biodiversity", "habitats", "climate",
        "ecology", "plantlife", "pollution", "rainforests",
    ],
    "health": [
        "healthy", "nutritious", "lowfat", "wholesome", "organic", "natural", "vegan",
    ],
}

# Token kinds whose surface is worth looking up in a table.
_LOOKUP_KINDS = {"word", "hashtag"}


class EmbeddingFormatError(ValueError):
    pass


class UndefinedSimilarity(ValueError):
    """Raised when a cosine involves a zero-norm vector."""


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable word -> vector map. Keys are case-folded."""

    dimension: int
    words: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)
    index: dict[str, int] = field(repr=False, compare=False)

    @classmethod
    def from_dict(cls, entries: dict[str, Sequence[float]]) -> "EmbeddingTable":
        words: list[str] = []
        rows: list[Sequence[float]] = []
        seen: set[str] = set()
        for word, vec in entries.items():
            key = word.casefold()
            if key in seen:
                continue
            seen.add(key)
            words.append(key)
            rows.append(vec)
        if not rows:
            raise EmbeddingFormatError("empty embedding table")
        mat = np.asarray(rows, dtype=float)
        if mat.ndim != 2:
            raise EmbeddingFormatError("vectors must share one dimension")
        if not np.all(np.isfinite(mat)):
            raise EmbeddingFormatError("non-finite vector component")
        return cls._build(words, mat)

    @classmethod
    def _build(cls, words, mat):
        mat = np.ascontiguousarray(mat, dtype=float)
        mat.setflags(write=False)
        return cls(
            dimension=mat.shape[1],
            words=tuple(words),
            vectors=mat,
            index={w: i for i, w in enumerate(words)},
        )

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return isinstance(word, str) and word.casefold() in self.index

    def get(self, word: str) -> np.ndarray | None:
        i = self.index.get(word.casefold())
        return None if i is None else self.vectors[i]

    def __getitem__(self, word: str) -> np.ndarray:
        vec = self.get(word)
        if vec is None:
            raise KeyError(word)
        return vec


def load_embeddings(source) -> EmbeddingTable:
    """Parse the plain-text embedding format.

    ``source`` may be a binary or text stream, or a path. Each line is
    ``word v1 ... vd``; a first line holding exactly two integers is taken as
    a ``count d`` header. Duplicate words keep their first occurrence.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return load_embeddings(fh)
    if isinstance(source, io.TextIOBase):
        lines = source
    else:
        lines = io.TextIOWrapper(source, encoding="utf-8")

    dim = None
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    first = True
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        if first:
            first = False
            if len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                if dim < 1:
                    raise EmbeddingFormatError(f"bad header dimension at line {lineno}")
                continue
        word, values = parts[0], parts[1:]
        if dim is None:
            if not values:
                raise EmbeddingFormatError(f"no vector components at line {lineno}")
            dim = len(values)
        elif len(values) != dim:
            raise EmbeddingFormatError(f"dimension mismatch at line {lineno}")
        try:
            vec = [float(v) for v in values]
        except ValueError:
            raise EmbeddingFormatError(f"non-numeric component at line {lineno}") from None
        if not all(math.isfinite(v) for v in vec):
            raise EmbeddingFormatError(f"non-finite component at line {lineno}")
        key = word.casefold()
        if key in seen:
            continue
        seen.add(key)
        words.append(key)
        rows.append(vec)
    if not rows:
        raise EmbeddingFormatError("empty embedding stream")
    return EmbeddingTable._build(words, np.array(rows, dtype=float))


def load_toy_embeddings() -> EmbeddingTable:
    """The small synthetic table shipped with the package."""
    ref = resources.files("causecommit") / "data" / "toy_embeddings.txt"
    with ref.open("rb") as fh:
        return load_embeddings(fh)


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    aa = float(np.dot(a, a))
    bb = float(np.dot(b, b))
    if aa == 0.0 or bb == 0.0:
        raise UndefinedSimilarity("cosine similarity of a zero-norm vector")
    # sqrt(aa * bb) rather than norm(a) * norm(b): exact 1.0 when a == b
    cos = float(np.dot(a, b)) / math.sqrt(aa * bb)
    return min(1.0, max(-1.0, cos))


def average_vector(vectors) -> np.ndarray:
    if len(vectors) == 0:
        raise ValueError("cannot average an empty list of vectors")
    try:
        mat = np.asarray(vectors, dtype=float)
    except ValueError:
        raise ValueError("vectors must share one dimension") from None
    if mat.ndim != 2:
        raise ValueError("vectors must share one dimension")
    return mat.mean(axis=0)


@dataclass(frozen=True)
class CauseProfile:
    name: str
    seed_keywords: tuple[str, ...]
    cause_vector: np.ndarray = field(repr=False, compare=False)
    expanded_keywords: tuple[str, ...] = ()

    @property
    def keywords(self) -> frozenset[str]:
        """Seeds plus expansion: the set matched for keyword cues."""
        return frozenset(self.seed_keywords) | frozenset(self.expanded_keywords)


def build_cause_profile(name: str, seed_keywords: Iterable[str], table: EmbeddingTable,
                        expansion_size: int = DEFAULT_EXPANSION_SIZE) -> CauseProfile:
    if expansion_size < 0:
        raise ValueError("expansion_size must be >= 0")
    seeds = tuple(dict.fromkeys(w.casefold() for w in seed_keywords))
    if not seeds:
        raise ValueError("at least one seed keyword is required")
    resolved = [table.index[w] for w in seeds if w in table.index]
    if not resolved:
        raise ValueError(f"no seed keyword of cause {name!r} is in the embedding table")
    cause_vec = table.vectors[resolved].mean(axis=0)
    cause_vec.setflags(write=False)

    expanded: list[str] = []
    if expansion_size:
        sims = _cosines_to(table.vectors, cause_vec)
        seed_set = set(seeds)
        ranked = sorted(
            (-s, w) for w, s in zip(table.words, sims)
            if w not in seed_set and not math.isnan(s)
        )
        expanded = [w for _, w in ranked[:expansion_size]]
    return CauseProfile(name, seeds, cause_vec, tuple(expanded))


def _cosines_to(mat: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Row-wise cosine against one vector; NaN for zero-norm rows."""
    tt = float(np.dot(target, target))
    if tt == 0.0:
        raise UndefinedSimilarity("cause vector has zero norm")
    dots = mat @ target
    norms = np.einsum("ij,ij->i", mat, mat)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = dots / np.sqrt(norms * tt)
    cos[norms == 0.0] = np.nan
    return np.clip(cos, -1.0, 1.0)


def lookup_terms(tokens) -> list[str]:
    """Surfaces eligible for table lookup.

    Plain strings pass through. Token objects contribute only when they are
    words or hashtags; markers, mentions, URLs and punctuation are skipped.
    """
    out = []
    for tok in tokens:
        if isinstance(tok, str):
            out.append(tok)
        elif getattr(tok, "kind", None) in _LOOKUP_KINDS:
            out.append(tok.surface)
    return out


def _resolve(term: str, table: EmbeddingTable) -> np.ndarray | None:
    vec = table.get(term)
    if vec is None and term.startswith("#") and len(term) > 1:
        vec = table.get(term[1:])
    return vec


def message_vector(tokens, table: EmbeddingTable) -> np.ndarray | None:
    """Mean vector of the resolvable tokens; None when nothing resolves."""
    vecs = [v for v in (_resolve(t, table) for t in lookup_terms(tokens)) if v is not None]
    if not vecs:
        return None
    return average_vector(vecs)


def relevance_score(tokens, profile: CauseProfile, table: EmbeddingTable) -> float | None:
    vec = message_vector(tokens, table)
    if vec is None:
        return None
    try:
        return cosine_similarity(vec, profile.cause_vector)
    except UndefinedSimilarity:
        return None


def is_relevant(score: float | None, threshold: float = DEFAULT_RELEVANCE_THRESHOLD) -> bool:
    return score is not None and score >= threshold


def select_top_relevant_words(tokens, profile: CauseProfile, table: EmbeddingTable,
                              n: int = 3) -> list[str]:
    """The ``n`` distinct in-vocabulary tokens closest to the cause vector.

    Ties keep first-occurrence order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scored = []
    seen = set()
    for term in lookup_terms(tokens):
        if term in seen:
            continue
        seen.add(term)
        vec = _resolve(term, table)
        if vec is None:
            continue
        try:
            sim = cosine_similarity(vec, profile.cause_vector)
        except UndefinedSimilarity:
            continue
        scored.append((sim, term))
    # sorted() is stable, so equal scores keep message order
    scored.sort(key=lambda p: -p[0])
    return [t for _, t in scored[:n]]


def keywords_vector(tokens, profile: CauseProfile, table: EmbeddingTable,
                    n: int = 3) -> np.ndarray | None:
    words = select_top_relevant_words(tokens, profile, table, n)
    return message_vector(words, table) if words else None
