"""
Tokenizer and linguistic-cue annotation for short social-media messages.

Cues covered: negation scope, person markers, keyword contexts, self-mention
and retweet flags, a coarse part-of-speech tag, and lexicon sentiment.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class Kind:
    WORD = "word"
    HASHTAG = "hashtag"
    MENTION = "mention"
    URL = "url"
    PUNCT = "punct"
    RETWEET_MARK = "retweet"
    MARKER = "marker"


POS_TAGS = ("PRON", "VERB", "NOUN", "ADJ", "ADV", "OTHER")
POLARITIES = ("POS", "NEG", "NEU")
PERSONS = ("first_person", "second_person", "third_person")

URL_SURFACE = "<url>"
NEG_PREFIX = "_NEG_"
CTX_PREFIX = "ctx_"
PERSON_MARKERS = {
    "first_person": "_FIRST_PERSON_",
    "second_person": "_SECOND_PERSON_",
    "third_person": "_THIRD_PERSON_",
}
NEGATION_SCOPE = 3

_TOKEN_RE = re.compile(
    r"""
    (?P<url>(?:https?://|www\.)\S+)
    | (?P<mention>@\w+)
    | (?P<hashtag>\#\w+)
    | (?P<word>\w+(?:['’]\w+)*|['’](?:s|re|ve|ll|d|m|t)\b)
    | (?P<punct>[^\w\s]+)
    """,
    re.VERBOSE,
)
_RT_RE = re.compile(r"\s*RT(?=[\s:]|$)")


@dataclass(frozen=True)
class RawMessage:
    entity_id: str
    message_id: str
    text: str

    def __post_init__(self):
        if not self.entity_id:
            raise ValueError("entity_id must be nonempty")
        if not self.message_id:
            raise ValueError("message_id must be nonempty")


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str
    pos: str = "OTHER"
    negated: bool = False
    capitalized: bool = False  # first character was uppercase before folding


@dataclass(frozen=True)
class AnnotatedMessage:
    raw: RawMessage
    tokens: tuple[Token, ...]
    is_retweet: bool = False
    mentions_self: bool = False
    retweet_of_self: bool = False
    person_markers: Counter = field(default_factory=Counter)
    polarity: str = "NEU"

    @property
    def entity_id(self):
        return self.raw.entity_id

    @property
    def message_id(self):
        return self.raw.message_id


# ---------------------------------------------------------------------------
# word lists

def read_word_list(path) -> frozenset[str]:
    """One word per line, ``#`` starts a comment, case-folded."""
    text = Path(path).read_text(encoding="utf-8")
    return _parse_word_list(text)


def _parse_word_list(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.casefold())
    return frozenset(words)


@lru_cache(maxsize=None)
def bundled_list(name: str) -> frozenset[str]:
    ref = resources.files("causecommit") / "data" / f"{name}.txt"
    return _parse_word_list(ref.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Lexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    @classmethod
    def bundled(cls) -> "Lexicon":
        return cls(bundled_list("positive_words"), bundled_list("negative_words"))

    @classmethod
    def from_files(cls, positive_path, negative_path) -> "Lexicon":
        return cls(read_word_list(positive_path), read_word_list(negative_path))


def _pronoun_lists():
    return {p: bundled_list(f"pronouns_{p.split('_')[0]}") for p in PERSONS}


# ---------------------------------------------------------------------------
# operations

def tokenize(msg: RawMessage | str) -> list[Token]:
    text = msg.text if isinstance(msg, RawMessage) else msg
    tokens: list[Token] = []
    pos = 0
    m = _RT_RE.match(text)
    if m:
        tokens.append(Token("rt", Kind.RETWEET_MARK))
        pos = m.end()
    for m in _TOKEN_RE.finditer(text, pos):
        kind = m.lastgroup
        raw = m.group()
        if kind == "url":
            tokens.append(Token(URL_SURFACE, Kind.URL))
            continue
        surface = raw.casefold().replace("’", "'")
        tokens.append(Token(surface, kind, capitalized=raw[:1].isupper()))
    return tokens


def is_negation_cue(surface: str, cues: frozenset[str] | None = None) -> bool:
    cues = bundled_list("negation_cues") if cues is None else cues
    return surface in cues or surface.endswith("n't")


def mark_negation(tokens: Sequence[Token], cues: frozenset[str] | None = None,
                  scope: int = NEGATION_SCOPE) -> list[Token]:
    """Flag up to ``scope`` words after each cue, stopping at punctuation."""
    out = []
    remaining = 0
    for tok in tokens:
        if tok.kind == Kind.PUNCT:
            remaining = 0
        elif tok.kind == Kind.WORD:
            if is_negation_cue(tok.surface, cues):
                remaining = scope
            elif remaining > 0:
                remaining -= 1
                tok = replace(tok, negated=True)
        out.append(tok)
    return out


def person_of(surface: str, lists=None) -> str | None:
    lists = _pronoun_lists() if lists is None else lists
    for person in PERSONS:
        if surface in lists[person]:
            return person
    return None


def mark_persons(tokens: Sequence[Token], lists=None) -> Counter:
    lists = _pronoun_lists() if lists is None else lists
    counts = Counter()
    for tok in tokens:
        if tok.kind == Kind.WORD:
            person = person_of(tok.surface, lists)
            if person:
                counts[person] += 1
    return counts


def person_marker_tokens(tokens: Sequence[Token], lists=None) -> list[Token]:
    """One synthetic MARKER token per pronoun match, in message order."""
    lists = _pronoun_lists() if lists is None else lists
    out = []
    for tok in tokens:
        if tok.kind == Kind.WORD:
            person = person_of(tok.surface, lists)
            if person:
                out.append(Token(PERSON_MARKERS[person], Kind.MARKER))
    return out


def normalize_handle(handle: str) -> str:
    return handle.strip().lstrip("@").casefold()


def detect_self_interactions(tokens: Sequence[Token], entity_handle: str) -> tuple[bool, bool, bool]:
    """Return (mentions_self, is_retweet, retweet_of_self)."""
    handle = normalize_handle(entity_handle)
    if not handle:
        raise ValueError("entity handle must be nonempty")
    mentions_self = any(
        t.kind == Kind.MENTION and t.surface[1:] == handle for t in tokens
    )
    is_retweet = bool(tokens) and tokens[0].kind == Kind.RETWEET_MARK
    return mentions_self, is_retweet, mentions_self and is_retweet


_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish")
_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ship", "ism")


def tag_word(surface: str, capitalized: bool = False) -> str:
    verbs = bundled_list("verbs")
    if any(surface in bundled_list(f"pronouns_{p}") for p in ("first", "second", "third")):
        return "PRON"
    if surface in _OTHER_PRONOUNS:
        return "PRON"
    if surface in verbs:
        return "VERB"
    n = len(surface)
    if n > 4 and (surface.endswith("ed") or surface.endswith("ing")):
        return "VERB"
    if n > 3 and surface.endswith("s") and not surface.endswith("ss"):
        stem = surface[:-2] if surface.endswith("es") and surface[:-2] in verbs else surface[:-1]
        if stem in verbs:
            return "VERB"
    if n > 4 and surface.endswith("ly"):
        return "ADV"
    if n > 4 and surface.endswith(_ADJ_SUFFIXES):
        return "ADJ"
    if n > 5 and surface.endswith(_NOUN_SUFFIXES):
        return "NOUN"
    return "NOUN" if capitalized else "OTHER"


_OTHER_PRONOUNS = frozenset(
    "it its itself myself ourselves yourself yourselves himself herself themselves "
    "theirs who whom whose".split()
)


def pos_tag(tokens: Sequence[Token]) -> list[Token]:
    return [
        replace(t, pos=tag_word(t.surface, t.capitalized)) if t.kind == Kind.WORD
        else replace(t, pos="OTHER")
        for t in tokens
    ]


def _keyword_form(tok: Token) -> str | None:
    if tok.kind == Kind.WORD:
        return tok.surface
    if tok.kind == Kind.HASHTAG:
        return tok.surface[1:]
    return None


def is_keyword(tok: Token, keywords) -> bool:
    form = _keyword_form(tok)
    return form is not None and (form in keywords or tok.surface in keywords)


def keyword_contexts(tokens: Sequence[Token], keywords: Iterable[str], window: int = 1) -> list[str]:
    """Words within ``window`` on each side of every keyword occurrence.

    Punctuation ends a side; other keywords and non-word tokens are skipped.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    keywords = keywords if isinstance(keywords, (set, frozenset)) else set(keywords)
    out = []
    for i, tok in enumerate(tokens):
        if not is_keyword(tok, keywords):
            continue
        for step in (-1, 1):
            found = []
            j = i + step
            while 0 <= j < len(tokens) and len(found) < window:
                other = tokens[j]
                if other.kind == Kind.PUNCT:
                    break
                if other.kind == Kind.WORD and not is_keyword(other, keywords):
                    found.append(other.surface)
                j += step
            out.extend(reversed(found) if step < 0 else found)
    return out


def sentiment_polarity(tokens: Sequence[Token], lexicon: Lexicon | None = None) -> str:
    lexicon = Lexicon.bundled() if lexicon is None else lexicon
    score = 0
    for tok in tokens:
        if tok.kind != Kind.WORD:
            continue
        sign = -1 if tok.negated else 1
        if tok.surface in lexicon.positive:
            score += sign
        elif tok.surface in lexicon.negative:
            score -= sign
    if score > 0:
        return "POS"
    if score < 0:
        return "NEG"
    return "NEU"


class Annotator:
    """Bundles the word lists used to annotate messages.

    Immutable after construction; one instance can serve many threads.
    """

    def __init__(self, lexicon: Lexicon | None = None, negation_cues=None, pronouns=None):
        self.lexicon = Lexicon.bundled() if lexicon is None else lexicon
        self.negation_cues = bundled_list("negation_cues") if negation_cues is None else frozenset(negation_cues)
        self.pronouns = _pronoun_lists() if pronouns is None else pronouns

    def annotate(self, raw: RawMessage, handle: str | None = None) -> AnnotatedMessage:
        tokens = tokenize(raw)
        tokens = mark_negation(tokens, self.negation_cues)
        tokens = pos_tag(tokens)
        persons = mark_persons(tokens, self.pronouns)
        markers = person_marker_tokens(tokens, self.pronouns)
        mentions_self, is_rt, rt_self = detect_self_interactions(tokens, handle or raw.entity_id)
        polarity = sentiment_polarity(tokens, self.lexicon)
        return AnnotatedMessage(
            raw=raw,
            tokens=tuple(tokens + markers),
            is_retweet=is_rt,
            mentions_self=mentions_self,
            retweet_of_self=rt_self,
            person_markers=persons,
            polarity=polarity,
        )


_default_annotator = None


def annotate(raw: RawMessage, handle: str | None = None) -> AnnotatedMessage:
    global _default_annotator
    if _default_annotator is None:
        _default_annotator = Annotator()
    return _default_annotator.annotate(raw, handle)
