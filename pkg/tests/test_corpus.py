import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wordforge.corpus import (
    FrequencyTable,
    GramWeights,
    Lexicon,
    NGramVocab,
    build_prior,
    bundled_lexicon,
    count_substrings,
    gram_weights,
    select_ngram_vocab,
)

WORDS = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=23)


def brute_substring_counts(words, n_max):
    """Independent occurrence counter: every (word, start, length) once."""
    counts = {}
    for w in words:
        for start in range(len(w)):
            for length in range(1, n_max + 1):
                if start + length <= len(w):
                    g = w[start : start + length]
                    counts[g] = counts.get(g, 0) + 1
    return counts


class TestLexicon:
    def test_case_fold_and_dedup(self, tmp_path):
        p = tmp_path / "words.txt"
        p.write_text("Cat\ncat\ndog\n")
        lex = Lexicon.load(p)
        assert lex.words == ["cat", "dog"]
        assert lex.index == {"cat": 0, "dog": 1}

    def test_overlong_word_dropped_with_count(self):
        lex = Lexicon.from_words(["a" * 24, "ok"])
        assert lex.words == ["ok"]
        assert lex.n_dropped == 1

    def test_no_valid_words_is_error(self):
        with pytest.raises(ValueError):
            Lexicon.from_words(["!!!"])

    def test_order_preserved_for_first_occurrence(self):
        lex = Lexicon.from_words(["zebra", "apple", "Zebra", "mango"])
        assert lex.words == ["zebra", "apple", "mango"]

    def test_roundtrip(self, tmp_path):
        lex = Lexicon.from_words(["beta", "alpha"])
        lex.save(tmp_path / "out.txt")
        assert Lexicon.load(tmp_path / "out.txt") == lex


class TestPrior:
    def test_uniform_over_50(self):
        lex = Lexicon([f"w{i:02d}" for i in range(50)])
        prior = build_prior(lex, mode="uniform")
        assert all(abs(prior[w] - 0.02) < 1e-12 for w in lex)

    def test_power_law_add_one_smoothing(self):
        # hand-computed: counts {a:9, b:0}, alpha=1 -> ((9+1)^1, (0+1)^1)/11
        lex = Lexicon(["a", "b"])
        prior = build_prior(lex, freq=FrequencyTable({"a": 9}), mode="power-law", alpha=1.0)
        assert prior["a"] == pytest.approx(10 / 11)
        assert prior["b"] == pytest.approx(1 / 11)

    def test_alpha_to_zero_limit_is_uniform(self):
        lex = Lexicon(["a", "b", "c"])
        prior = build_prior(lex, freq=FrequencyTable({"a": 500, "b": 2}), mode="power-law", alpha=1e-9)
        for w in lex:
            assert prior[w] == pytest.approx(1 / 3, abs=1e-6)

    def test_alpha_nonpositive_rejected(self):
        lex = Lexicon(["a", "b"])
        with pytest.raises(ValueError):
            build_prior(lex, freq=FrequencyTable({"a": 1}), mode="power-law", alpha=0.0)

    def test_uniform_sublexicon_support(self):
        lex = Lexicon(["a", "b", "c", "d"])
        prior = build_prior(lex, mode="uniform", sublexicon=["b", "d"])
        assert prior["b"] == prior["d"] == 0.5
        assert prior["a"] == prior["c"] == 0.0

    @given(st.lists(WORDS, min_size=1, max_size=30, unique=True))
    def test_sums_to_one(self, words):
        lex = Lexicon(words)
        uni = build_prior(lex, mode="uniform")
        assert math.isclose(sum(uni.values.values()), 1.0, abs_tol=1e-9)
        freq = FrequencyTable({w: i for i, w in enumerate(words)})
        pl = build_prior(lex, freq=freq, mode="power-law", alpha=0.5)
        assert math.isclose(sum(pl.values.values()), 1.0, abs_tol=1e-9)


class TestNGramVocab:
    def test_repeated_word_counts(self):
        # brute-force oracle over ["aaaa"] x 10
        lex_words = ["aaaa"]
        oracle = brute_substring_counts(lex_words * 10, 4)
        assert oracle == {"a": 40, "aa": 30, "aaa": 20, "aaaa": 10}
        # a single lexicon entry cannot repeat; scale counts via min_count=1
        vocab = select_ngram_vocab(Lexicon(lex_words), n_max=4, min_count=1)
        assert vocab.counts == {"a": 4, "aa": 3, "aaa": 2, "aaaa": 1}
        assert vocab.grams == ["a", "aa", "aaa", "aaaa"]

    def test_min_count_one_on_ab(self):
        vocab = select_ngram_vocab(Lexicon(["ab"]), n_max=4, min_count=1)
        assert set(vocab.grams) == {"a", "b", "ab"}

    def test_threshold_filters_rare_grams(self):
        # "xy" occurs once, below min_count=2; 1-grams are always kept
        vocab = select_ngram_vocab(Lexicon(["xy", "xz", "xw"]), n_max=2, min_count=2)
        assert "xy" not in vocab
        assert {"x", "y", "z", "w"} <= set(vocab.grams)

    def test_order_by_length_then_lex(self):
        vocab = select_ngram_vocab(Lexicon(["ba", "ab"]), n_max=2, min_count=1)
        assert vocab.grams == sorted(vocab.grams, key=lambda g: (len(g), g))

    @given(st.lists(WORDS, min_size=1, max_size=20, unique=True))
    def test_counts_match_brute_force(self, words):
        counted = count_substrings(words, 4)
        assert dict(counted) == brute_substring_counts(words, 4)

    @given(st.lists(WORDS, min_size=2, max_size=20, unique=True), st.randoms())
    def test_input_order_independent(self, words, rnd):
        a = select_ngram_vocab(Lexicon(words), n_max=3, min_count=2)
        shuffled = list(words)
        rnd.shuffle(shuffled)
        b = select_ngram_vocab(Lexicon(shuffled), n_max=3, min_count=2)
        assert a.grams == b.grams and a.counts == b.counts

    @given(st.lists(WORDS, min_size=1, max_size=20, unique=True))
    def test_no_silent_drops(self, words):
        vocab = select_ngram_vocab(Lexicon(words), n_max=3, min_count=2)
        counts = brute_substring_counts(words, 3)
        for g, c in counts.items():
            if c >= 2:
                assert g in vocab

    def test_dump_roundtrip(self, tmp_path):
        lex = Lexicon(["abc", "abd"])
        vocab = select_ngram_vocab(lex, n_max=3, min_count=1)
        vocab.save(tmp_path / "vocab.tsv", weights=gram_weights(lex, vocab))
        loaded = NGramVocab.load(tmp_path / "vocab.tsv", max_n=3, min_count=1)
        assert loaded.grams == vocab.grams
        assert loaded.counts == vocab.counts


class TestGramWeights:
    def test_inverse_proportionality(self):
        lex = Lexicon(["aaaa"])
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        w = gram_weights(lex, vocab).weights
        by_gram = dict(zip(vocab.grams, w))
        # frequencies 4,3,2,1 -> weights proportional to 1/4,1/3,1/2,1
        assert by_gram["aaaa"] / by_gram["a"] == pytest.approx(4.0)
        assert by_gram["aaa"] / by_gram["aa"] == pytest.approx(3.0 / 2.0)
        assert np.mean(w) == pytest.approx(1.0)

    def test_equal_frequencies_give_unit_weights(self):
        lex = Lexicon(["ab", "cd"])
        vocab = select_ngram_vocab(lex, n_max=1, min_count=1)
        w = gram_weights(lex, vocab).weights
        assert np.allclose(w, 1.0)

    def test_ratio_four_to_one(self):
        # gram "a" appears 40x, gram "b" 10x -> weight ratio 1:4
        words = ["aaaa"] * 10 + ["b"] * 10
        # Lexicon requires unique words; use counts directly via a custom vocab
        counts = brute_substring_counts(words, 1)
        assert counts["a"] == 40 and counts["b"] == 10
        lex = Lexicon(["aaaab"])  # a:4, b:1 in one word -> same 4:1 ratio
        vocab = select_ngram_vocab(lex, n_max=1, min_count=1)
        w = dict(zip(vocab.grams, gram_weights(lex, vocab).weights))
        assert w["b"] / w["a"] == pytest.approx(4.0)

    def test_zero_frequency_gram_rejected(self):
        lex = Lexicon(["ab"])
        vocab = select_ngram_vocab(lex, n_max=2, min_count=1)
        other = Lexicon(["cd"])
        with pytest.raises(ValueError):
            gram_weights(other, vocab)

    def test_nonpositive_weights_rejected(self):
        with pytest.raises(ValueError):
            GramWeights(weights=np.array([1.0, 0.0]))


@pytest.fixture(scope="session")
def big_lexicon():
    return bundled_lexicon()


class TestBundledList:
    def test_size_and_alphabet(self, big_lexicon):
        assert len(big_lexicon) >= 50_000
        assert all(len(w) <= 23 for w in big_lexicon)

    def test_vocab_scale(self, big_lexicon):
        vocab = select_ngram_vocab(big_lexicon, n_max=4, min_count=10)
        per_len = vocab.per_length_counts()
        # alphabet coverage: every distinct character of the corpus is a 1-gram
        alphabet = set("".join(big_lexicon.words))
        assert per_len[1] == len(alphabet)
        assert 0.75 * 10_000 <= len(vocab) <= 1.25 * 10_000
