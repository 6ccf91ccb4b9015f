import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wordforge.alphabet import MAX_WORD_LEN, NULL_CLASS
from wordforge.corpus import Lexicon, build_prior, select_ngram_vocab
from wordforge.encode import (
    NGramWordSVM,
    collision_groups,
    constrain_lexicon,
    count_collisions,
    decode_charseq,
    decode_ngrams_nn,
    decode_ngrams_svm,
    dump_encodings,
    encode_charseq,
    encode_dict,
    encode_lexicon_ngrams,
    encode_ngrams,
    grams,
    levenshtein,
    score_dict,
)

WORDS = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=23)


def brute_grams(word, n):
    """Oracle: enumerate every substring, deduplicate via a set."""
    out = set()
    for i in range(len(word)):
        for j in range(i + 1, min(i + n, len(word)) + 1):
            out.add(word[i:j])
    return out


def brute_levenshtein(a, b):
    """Oracle: full DP table, no row reuse."""
    m, n = len(a), len(b)
    D = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        D[i][0] = i
    for j in range(n + 1):
        D[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            D[i][j] = min(
                D[i - 1][j] + 1,
                D[i][j - 1] + 1,
                D[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return D[m][n]


def one_hot_probs(word):
    probs = np.zeros((MAX_WORD_LEN, NULL_CLASS + 1))
    slots = encode_charseq(word)
    probs[np.arange(MAX_WORD_LEN), slots] = 1.0
    return probs


class TestGrams:
    def test_spires_paper_example(self):
        expected = {"s", "p", "i", "r", "e", "sp", "pi", "ir", "re", "es",
                    "spi", "pir", "ire", "res"}
        assert grams("spires", 3) == expected

    def test_single_char(self):
        assert grams("a", 4) == {"a"}

    def test_abab_dedup(self):
        assert grams("abab", 2) == brute_grams("abab", 2) == {"a", "b", "ab", "ba"}

    @given(WORDS, st.integers(min_value=1, max_value=5))
    def test_matches_brute_force(self, word, n):
        assert grams(word, n) == brute_grams(word, n)

    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            grams("", 2)


class TestDictEncoding:
    def test_index_roundtrip(self):
        lex = Lexicon([f"w{i}" for i in range(10)])
        assert encode_dict(lex[7], lex) == 7

    def test_out_of_lexicon(self):
        with pytest.raises(ValueError):
            encode_dict("nope", Lexicon(["yes"]))


class TestCharSeq:
    def test_cat(self):
        slots = encode_charseq("cat")
        assert slots[0] == 10 + (ord("c") - ord("a"))
        assert slots[1] == 10 + (ord("a") - ord("a"))
        assert slots[2] == 10 + (ord("t") - ord("a"))
        assert np.all(slots[3:] == NULL_CLASS)

    def test_overlong_rejected(self):
        with pytest.raises(ValueError):
            encode_charseq("a" * 24)

    def test_decode_one_hot_dog(self):
        assert decode_charseq(one_hot_probs("dog")) == "dog"

    def test_interior_null_stripped(self):
        probs = one_hot_probs("dogg")
        # force slot 1 to null: prediction reads d, φ, g, g -> "dgg"
        probs[1] = 0.0
        probs[1, NULL_CLASS] = 1.0
        assert decode_charseq(probs) == "dgg"

    def test_all_null(self):
        probs = np.zeros((MAX_WORD_LEN, NULL_CLASS + 1))
        probs[:, NULL_CLASS] = 1.0
        assert decode_charseq(probs) == ""

    @given(WORDS)
    def test_roundtrip_identity(self, word):
        assert decode_charseq(one_hot_probs(word)) == word


class TestNGramEncoding:
    def test_support_size_matches_grams(self):
        lex = Lexicon(["spires"])
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        target = encode_ngrams("spires", vocab)
        assert len(target.support) == len(grams("spires", 4))
        assert target.bits.sum() == len(target.support)

    @given(st.lists(WORDS, min_size=1, max_size=15, unique=True))
    def test_bits_agree_with_grams(self, words):
        lex = Lexicon(words)
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        for w in words:
            bits = encode_ngrams(w, vocab).bits
            gs = grams(w, 4)
            for i, g in enumerate(vocab.grams):
                assert bool(bits[i]) == (g in gs)

    def test_below_threshold_grams_absent(self):
        lex = Lexicon(["abc", "abd", "abe"])
        vocab = select_ngram_vocab(lex, n_max=3, min_count=3)  # only "a","b" + 1-grams pass
        target = encode_ngrams("abc", vocab)
        assert all(vocab.grams[i] in grams("abc", 3) for i in target.support)


class TestConstrainLexicon:
    def test_hospital_beats_hostel(self):
        assert brute_levenshtein("hosptal", "hospital") == 1
        assert brute_levenshtein("hosptal", "hostel") == 2
        assert constrain_lexicon("hosptal", ["hospital", "hostel"]) == "hospital"

    def test_exact_match_returned(self):
        assert constrain_lexicon("cat", ["dog", "cat", "cab"]) == "cat"

    def test_empty_prediction(self):
        assert constrain_lexicon("", ["a", "bb"]) == "a"

    def test_tie_breaks_by_prior_then_lex(self):
        lex = Lexicon(["aa", "ab"])
        # both at distance 1 from "ac"
        assert constrain_lexicon("ac", lex.words) == "aa"
        prior = build_prior(lex, mode="uniform", sublexicon=["ab"])
        assert constrain_lexicon("ac", lex.words, prior=prior) == "ab"

    @given(WORDS, st.lists(WORDS, min_size=1, max_size=10, unique=True))
    def test_distance_minimal(self, pred, words):
        got = constrain_lexicon(pred, words)
        dists = {w: brute_levenshtein(pred, w) for w in words}
        assert dists[got] == min(dists.values())

    @given(st.lists(WORDS, min_size=1, max_size=10, unique=True), st.data())
    def test_member_is_fixed_point(self, words, data):
        w = data.draw(st.sampled_from(words))
        assert constrain_lexicon(w, words) == w

    @given(WORDS, WORDS)
    def test_levenshtein_matches_oracle(self, a, b):
        assert levenshtein(a, b) == brute_levenshtein(a, b)


class TestScoreDict:
    def test_uniform_prior_is_plain_argmax(self):
        lex = Lexicon(["a", "b", "c"])
        prior = build_prior(lex, mode="uniform")
        assert score_dict(np.array([0.2, 0.5, 0.3]), lex, prior) == "b"

    def test_hand_product(self):
        lex = Lexicon(["x", "y"])
        prior = build_prior(lex, mode="uniform", sublexicon=["x", "y"])
        prior = prior.__class__(mode="uniform", values={"x": 0.1, "y": 0.9})
        assert score_dict(np.array([0.6, 0.4]), lex, prior) == "y"  # 0.36 > 0.06

    def test_sublexicon_restricts_support(self):
        lex = Lexicon([f"w{i}" for i in range(10)])
        prior = build_prior(lex, mode="uniform", sublexicon=["w3", "w7"])
        probs = np.linspace(1, 2, 10)
        assert score_dict(probs, lex, prior) in {"w3", "w7"}

    def test_all_zero_is_error(self):
        lex = Lexicon(["a", "b"])
        prior = build_prior(lex, mode="uniform", sublexicon=["a"])
        with pytest.raises(ValueError, match="no word admissible"):
            score_dict(np.array([0.0, 1.0]), lex, prior)

    @given(st.floats(min_value=0.1, max_value=100.0))
    def test_scale_invariance_under_uniform_prior(self, scale):
        lex = Lexicon(["a", "b", "c", "d"])
        prior = build_prior(lex, mode="uniform")
        probs = np.array([0.1, 0.7, 0.15, 0.05])
        assert score_dict(probs * scale, lex, prior) == score_dict(probs, lex, prior)


class TestNGramNN:
    def setup_method(self):
        self.lex = Lexicon(["dog", "cat", "bird"])
        self.vocab = select_ngram_vocab(self.lex, n_max=4, min_count=1)
        self.enc = encode_lexicon_ngrams(self.lex, self.vocab)

    def test_exact_encoding_decodes(self):
        act = encode_ngrams("dog", self.vocab).bits.astype(float)
        assert decode_ngrams_nn(act, self.lex, self.enc) == "dog"

    def test_one_flip_still_decodes(self):
        act = encode_ngrams("dog", self.vocab).bits.astype(float)
        flip = self.vocab.index["cat"[0]] if "c" in self.vocab.index else 0
        act[flip] = 1.0 - act[flip]
        assert decode_ngrams_nn(act, self.lex, self.enc) == "dog"

    def test_all_zero_picks_smallest_support(self):
        act = np.zeros(len(self.vocab))
        sizes = {w: len(encode_ngrams(w, self.vocab).support) for w in self.lex}
        got = decode_ngrams_nn(act, self.lex, self.enc)
        assert sizes[got] == min(sizes.values())

    def test_threshold_binarizes_first(self):
        act = encode_ngrams("cat", self.vocab).bits * 0.995
        assert decode_ngrams_nn(act, self.lex, self.enc, threshold=0.99) == "cat"


class TestCollisions:
    def test_anagrams_collide_at_n1(self):
        lex = Lexicon(["ab", "ba"])
        assert count_collisions(lex, n=1) == 1

    def test_anagrams_distinct_at_n2(self):
        lex = Lexicon(["ab", "ba"])
        assert count_collisions(lex, n=2) == 0

    @given(st.lists(WORDS, min_size=1, max_size=25, unique=True), st.integers(1, 4))
    def test_matches_brute_grouping(self, words, n):
        lex = Lexicon(words)
        buckets = {}
        for w in words:
            buckets.setdefault(frozenset(brute_grams(w, n)), []).append(w)
        expected = sum(len(v) - 1 for v in buckets.values() if len(v) > 1)
        assert count_collisions(lex, n=n) == expected

    def test_groups_listed(self):
        lex = Lexicon(["ab", "ba", "cd"])
        groups = collision_groups(lex, n=1)
        assert groups == [["ab", "ba"]]


class TestNGramSVM:
    def _training_set(self, lex, vocab, rng, per_word=20, noise=0.05):
        enc = encode_lexicon_ngrams(lex, vocab).astype(np.float64)
        X, y = [], []
        for k in range(len(lex)):
            for _ in range(per_word):
                x = enc[k].copy()
                x += rng.normal(0, noise, x.shape)
                X.append(x)
                y.append(k)
        return np.array(X), np.array(y), enc

    def test_separable_training_accuracy(self):
        lex = Lexicon(["alpha", "bravo", "charl", "delta", "echo",
                       "fox", "golf", "hotel", "india", "juliet"])
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        rng = np.random.default_rng(0)
        X, y, enc = self._training_set(lex, vocab, rng)
        svm = NGramWordSVM(lex, seed=0).fit(X, y)
        pred = svm.predict(X)
        truth = [lex[k] for k in y]
        assert pred == truth

    def test_clean_bits_decode_after_training(self):
        lex = Lexicon(["one", "two", "three", "four", "five"])
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        rng = np.random.default_rng(1)
        X, y, enc = self._training_set(lex, vocab, rng)
        svm = NGramWordSVM(lex, seed=1).fit(X, y)
        for k, w in enumerate(lex):
            assert decode_ngrams_svm(enc[k], svm) == w

    def test_huge_regularization_collapses_to_chance(self):
        lex = Lexicon(["one", "two", "three", "four"])
        vocab = select_ngram_vocab(lex, n_max=4, min_count=1)
        rng = np.random.default_rng(2)
        X, y, enc = self._training_set(lex, vocab, rng)
        svm = NGramWordSVM(lex, lam=1e9, seed=2).fit(X, y)
        assert np.max(np.abs(svm.weights)) < 0.1
        preds = svm.predict(X)
        assert len(set(preds)) == 1  # constant scorer -> constant prediction
        truth = [lex[k] for k in y]
        acc = np.mean([p == t for p, t in zip(preds, truth)])
        assert acc == pytest.approx(1 / len(lex))  # chance on the balanced set

    def test_single_class_rejected(self):
        lex = Lexicon(["one", "two"])
        vocab = select_ngram_vocab(lex, n_max=2, min_count=1)
        X = np.zeros((4, len(vocab)))
        with pytest.raises(ValueError):
            NGramWordSVM(lex).fit(X, np.zeros(4, dtype=int))


class TestDumps:
    def test_formats(self, tmp_path):
        lex = Lexicon(["cat", "dog"])
        vocab = select_ngram_vocab(lex, n_max=2, min_count=1)
        dump_encodings(tmp_path / "d.tsv", lex.words, "dict", lexicon=lex)
        dump_encodings(tmp_path / "c.tsv", lex.words, "charseq")
        dump_encodings(tmp_path / "n.tsv", lex.words, "ngram", vocab=vocab)
        assert (tmp_path / "d.tsv").read_text().splitlines()[0] == "cat\t0"
        line = (tmp_path / "c.tsv").read_text().splitlines()[0]
        assert line.startswith("cat\tcat") and line.endswith("_" * 20)
        word, sup = (tmp_path / "n.tsv").read_text().splitlines()[1].split("\t")
        assert word == "dog" and len(sup.split(",")) == len(grams("dog", 2))
