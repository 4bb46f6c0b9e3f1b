from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causecommit import embedding, features
from causecommit.features import (
    FeatureConfig,
    build_vocabulary,
    dense_names,
    feature_names,
    featurize,
    ngram_counts,
    sparse_features,
)
from causecommit.textproc import Kind, RawMessage


def annotate_all(annotator, texts):
    return [annotator.annotate(RawMessage("e", f"m{i}", t)) for i, t in enumerate(texts)]


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(ngram_max=4), dict(min_df=0), dict(max_df=0.0),
                                        dict(ngram_min=2, ngram_max=1), dict(context_window=0)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FeatureConfig(**kwargs)

    def test_round_trip(self):
        c = features.PRESETS["best-combination"]
        assert FeatureConfig.from_dict(c.to_dict()) == c

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            FeatureConfig.from_dict({"bogus": 1})

    def test_default_grid_size(self):
        # 3 presets with n-grams x 27 settings, plus the dense-only preset once
        assert len(features.default_grid()) == 3 * 27 + 1


class TestVocabulary:
    TEXTS = ["apple pie", "apple tart", "apple cake", "apple pie cake"]

    def test_no_pruning(self, annotator):
        corpus = annotate_all(annotator, self.TEXTS)
        vocab = build_vocabulary(corpus, FeatureConfig())
        assert set(vocab.names) == {"apple", "pie", "tart", "cake"}

    def test_min_df(self, annotator):
        corpus = annotate_all(annotator, self.TEXTS)
        vocab = build_vocabulary(corpus, FeatureConfig(min_df=2))
        assert "tart" not in vocab and "pie" in vocab

    def test_max_df(self, annotator):
        corpus = annotate_all(annotator, self.TEXTS)
        vocab = build_vocabulary(corpus, FeatureConfig(max_df=0.8))
        assert "apple" not in vocab and "pie" in vocab

    def test_deterministic(self, annotator):
        corpus = annotate_all(annotator, self.TEXTS)
        assert build_vocabulary(corpus, FeatureConfig(ngram_max=2)) == build_vocabulary(corpus, FeatureConfig(ngram_max=2))

    def test_dict_round_trip(self, annotator):
        vocab = build_vocabulary(annotate_all(annotator, self.TEXTS), FeatureConfig())
        assert features.Vocabulary.from_dict(vocab.to_dict()) == vocab

    @settings(max_examples=30)
    @given(st.lists(st.text(alphabet="abcdef", min_size=1, max_size=4), min_size=1, max_size=30, unique=True))
    def test_name_index_round_trip(self, words):
        vocab = features.Vocabulary(tuple(sorted(words)), tuple([1] * len(words)), 1)
        names = feature_names(vocab, FeatureConfig())
        assert all(vocab.index[n] == i for i, n in enumerate(names))


class TestNgrams:
    def test_bigrams_do_not_cross_punct(self, annotator):
        msg = annotate_all(annotator, ["green energy, clean air"])[0]
        grams = ngram_counts(msg.tokens, 2, 2)
        assert grams == Counter({"green energy": 1, "clean air": 1})

    def test_counts_not_binary(self, annotator):
        msg = annotate_all(annotator, ["tree tree tree"])[0]
        assert sparse_features(msg, FeatureConfig())["tree"] == 3


class TestCues:
    def test_negation_feature(self, annotator):
        msg = annotate_all(annotator, ["it's not organic"])[0]
        assert sparse_features(msg, FeatureConfig(negation=True))["_NEG_organic"] == 1

    def test_disabling_family_removes_only_its_columns(self, annotator, eco_profile):
        msg = annotator.annotate(RawMessage("acme", "1", "RT @acme: I don't waste water, we plant trees today"))
        full = FeatureConfig(**{f: True for f in features.CUE_FAMILIES})
        all_feats = sparse_features(msg, full, eco_profile)
        for family in features.CUE_FAMILIES:
            partial = sparse_features(msg, replace(full, **{family: False}), eco_profile)
            removed = set(all_feats) - set(partial)
            assert removed, family
            assert all(partial[k] == all_feats[k] for k in partial)

    def test_ctx_and_keywords(self, annotator, toy_table):
        prof = embedding.build_cause_profile("eco", ["trees"], toy_table, 0)
        msg = annotate_all(annotator, ["planting trees today"])[0]
        feats = sparse_features(msg, FeatureConfig(context_words=True, keyword_count=True), prof)
        assert feats["ctx_planting"] == 1 and feats["ctx_today"] == 1
        assert feats[features.KEYWORD_COUNT] == 1

    def test_profile_required(self, annotator):
        msg = annotate_all(annotator, ["trees"])[0]
        with pytest.raises(ValueError):
            sparse_features(msg, FeatureConfig(keyword_count=True))

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.sampled_from(["we", "not", "trees", "i", "love", "green", ",", "#earth"]), max_size=12))
    def test_unigram_counts_brute_force(self, words):
        from causecommit.textproc import Annotator
        msg = Annotator().annotate(RawMessage("e", "1", " ".join(words)))
        feats = sparse_features(msg, FeatureConfig(negation=True))
        expected = Counter(t.surface for t in msg.tokens if t.kind in (Kind.WORD, Kind.HASHTAG))
        expected.update("_NEG_" + t.surface for t in msg.tokens if t.negated)
        assert feats == expected


class TestDense:
    def test_layout_names(self):
        assert dense_names(FeatureConfig(message_vector=True), 2) == ["mvec_0", "mvec_1", "mvec_present"]

    def test_empty_cues_names_are_ngrams(self, annotator):
        corpus = annotate_all(annotator, ["a b", "b c"])
        vocab = build_vocabulary(corpus, FeatureConfig())
        assert feature_names(vocab, FeatureConfig()) == ["a", "b", "c"]

    def test_zero_vector(self, annotator):
        vocab = build_vocabulary(annotate_all(annotator, ["apple"]), FeatureConfig())
        fv = featurize(annotate_all(annotator, ["zebra"])[0], vocab, FeatureConfig())
        assert not fv.to_array(len(vocab)).any()

    def test_identical_messages(self, annotator, toy_table, eco_profile):
        cfg = features.PRESETS["best-combination"]
        a, b = annotate_all(annotator, ["we planted trees", "we planted trees"])
        vocab = build_vocabulary([a], cfg, eco_profile)
        assert featurize(a, vocab, cfg, toy_table, eco_profile) == featurize(b, vocab, cfg, toy_table, eco_profile)

    def test_message_vector_block(self, annotator, toy_table, eco_profile):
        cfg = FeatureConfig(ngrams=False, message_vector=True)
        msg = annotate_all(annotator, ["trees climate qqqq"])[0]
        vocab = build_vocabulary([msg], cfg, eco_profile)
        fv = featurize(msg, vocab, cfg, toy_table, eco_profile)
        expected = (toy_table["trees"] + toy_table["climate"]) / 2
        np.testing.assert_allclose(fv.dense[:-1], expected, atol=1e-12)
        assert fv.dense[-1] == 1.0

    def test_undefined_block_zero(self, annotator, toy_table, eco_profile):
        cfg = FeatureConfig(ngrams=False, message_vector=True, relevance_scalar=True)
        msg = annotate_all(annotator, ["qqqq zzzz"])[0]
        vocab = build_vocabulary([msg], cfg, eco_profile)
        fv = featurize(msg, vocab, cfg, toy_table, eco_profile)
        assert not fv.dense.any()

    def test_to_matrix(self, annotator, toy_table, eco_profile):
        cfg = features.PRESETS["best-combination"]
        corpus = annotate_all(annotator, ["we planted trees", "pizza tonight"])
        vocab = build_vocabulary(corpus, cfg, eco_profile)
        fvs = features.featurize_corpus(corpus, vocab, cfg, toy_table, eco_profile)
        width = features.dense_width(cfg, toy_table.dimension)
        X = features.to_matrix(fvs, len(vocab), width)
        np.testing.assert_array_equal(X.toarray(), np.vstack([fv.to_array(len(vocab)) for fv in fvs]))
