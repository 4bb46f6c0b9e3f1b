from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from causecommit import textproc
from causecommit.textproc import (
    Kind,
    RawMessage,
    detect_self_interactions,
    keyword_contexts,
    mark_negation,
    mark_persons,
    pos_tag,
    sentiment_polarity,
    tag_word,
    tokenize,
)


def kinds(tokens):
    return [(t.kind, t.surface) for t in tokens]


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_hashtag(self):
        assert kinds(tokenize("Happy #EarthDay")) == [(Kind.WORD, "happy"), (Kind.HASHTAG, "#earthday")]

    def test_retweet(self):
        got = kinds(tokenize("RT @CivilBeat: Sen @RepMarkTakai introduce bill"))
        assert got == [
            (Kind.RETWEET_MARK, "rt"), (Kind.MENTION, "@civilbeat"), (Kind.PUNCT, ":"),
            (Kind.WORD, "sen"), (Kind.MENTION, "@repmarktakai"), (Kind.WORD, "introduce"),
            (Kind.WORD, "bill"),
        ]

    def test_url_collapsed(self):
        assert kinds(tokenize("see https://t.co/abc now")) == [
            (Kind.WORD, "see"), (Kind.URL, "<url>"), (Kind.WORD, "now")]

    def test_raw_message(self):
        assert tokenize(RawMessage("e", "1", "Hi")) == tokenize("Hi")

    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=80))
    def test_idempotent_on_words(self, text):
        words = [t.surface for t in tokenize(text) if t.kind == Kind.WORD]
        again = [t.surface for t in tokenize(" ".join(words)) if t.kind == Kind.WORD]
        assert again == words


class TestNegation:
    def negated(self, text):
        return [t.surface for t in mark_negation(tokenize(text)) if t.negated]

    def test_not_organic(self):
        assert self.negated("it's not organic") == ["organic"]

    def test_no_cue(self):
        assert self.negated("we love trees") == []

    def test_scope_cap(self):
        assert self.negated("don't eat healthy food today") == ["eat", "healthy", "food"]

    def test_stops_at_punct(self):
        assert self.negated("not good, really good") == ["good"]

    @given(st.lists(st.sampled_from(["not", "never", "trees", "good", ",", "we", "don't", "."]), max_size=15))
    def test_never_before_first_cue(self, words):
        toks = mark_negation(tokenize(" ".join(words)))
        for t in toks:
            if t.kind == Kind.WORD and textproc.is_negation_cue(t.surface):
                break
            assert not t.negated


class TestPersons:
    def test_first_person(self):
        assert mark_persons(tokenize("I've introduced legislation")) == Counter(first_person=1)

    def test_none(self):
        assert mark_persons(tokenize("trees grow")) == Counter()

    def test_mixed(self):
        assert mark_persons(tokenize("you and your team thank them")) == Counter(second_person=2, third_person=1)

    @given(st.lists(st.sampled_from(["i", "we", "you", "they", "tree", "our", "his", "x"]), max_size=20))
    def test_brute_force(self, words):
        lists = {p: textproc.bundled_list(f"pronouns_{p.split('_')[0]}") for p in textproc.PERSONS}
        expected = Counter()
        for w in words:
            for p, members in lists.items():
                if w in members:
                    expected[p] += 1
        assert mark_persons(tokenize(" ".join(words))) == expected


class TestSelfInteractions:
    def test_retweet_of_self(self):
        toks = tokenize("RT @CivilBeat: Sen @RepMarkTakai introduce bill to support coral reef conservation")
        assert detect_self_interactions(toks, "RepMarkTakai") == (True, True, True)

    def test_plain(self):
        assert detect_self_interactions(tokenize("nice day"), "acme") == (False, False, False)

    def test_possessive_mention(self):
        ms, rt, _ = detect_self_interactions(tokenize("@our_company's products are all organic"), "our_company")
        assert ms and not rt

    @given(st.text(max_size=40), st.sampled_from(["acme", "our_company"]))
    def test_implication(self, text, handle):
        ms, rt, self_rt = detect_self_interactions(tokenize(text), handle)
        assert self_rt == (ms and rt)


class TestPos:
    @pytest.mark.parametrize("word, tag", [("i", "PRON"), ("voted", "VERB"), ("quickly", "ADV"),
                                           ("sustainable", "ADJ"), ("conservation", "NOUN")])
    def test_tags(self, word, tag):
        assert tag_word(word) == tag

    def test_empty(self):
        assert pos_tag([]) == []

    def test_tags_in_set(self):
        assert all(t.pos in textproc.POS_TAGS for t in pos_tag(tokenize("We planted 200 trees!")))


class TestContexts:
    def test_planting_trees(self):
        assert sorted(keyword_contexts(tokenize("planting trees today"), {"trees"})) == ["planting", "today"]

    def test_no_keyword(self):
        assert keyword_contexts(tokenize("pizza night"), {"trees"}) == []

    def test_start_boundary(self):
        assert keyword_contexts(tokenize("trees everywhere"), {"trees"}) == ["everywhere"]

    def test_hashtag_keyword(self):
        assert keyword_contexts(tokenize("love #trees forever"), {"trees"}) == ["love", "forever"]


class TestSentiment:
    def polarity(self, text):
        return sentiment_polarity(mark_negation(tokenize(text)))

    def test_positive(self):
        assert self.polarity("great") == "POS"

    def test_empty(self):
        assert self.polarity("") == "NEU"

    def test_negated(self):
        assert self.polarity("not great") == "NEG"

    def test_no_hits_neutral(self):
        assert self.polarity("the tree stands") == "NEU"

    def test_custom_lexicon(self, tmp_path):
        (tmp_path / "p.txt").write_text("# comment\nzorp\n")
        (tmp_path / "n.txt").write_text("blah\n")
        lex = textproc.Lexicon.from_files(tmp_path / "p.txt", tmp_path / "n.txt")
        assert sentiment_polarity(tokenize("zorp"), lex) == "POS"
        assert sentiment_polarity(tokenize("great"), lex) == "NEU"


class TestAnnotate:
    def test_markers_appended(self, annotator):
        msg = annotator.annotate(RawMessage("acme", "1", "We planted trees"))
        assert msg.tokens[-1].kind == Kind.MARKER
        assert msg.person_markers == Counter(first_person=1)

    def test_handle_defaults_to_entity(self, annotator):
        msg = annotator.annotate(RawMessage("acme", "1", "RT @acme: thanks"))
        assert msg.retweet_of_self

    def test_bundled_lexicon_disjoint(self):
        lex = textproc.Lexicon.bundled()
        assert not lex.positive & lex.negative
        assert len(lex.positive) >= 150 and len(lex.negative) >= 150
