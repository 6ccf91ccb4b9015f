"""Label encodings and the decoding/scoring procedures built on them.

Three encodings of a word: a single class index over a lexicon, a 23-slot
character sequence padded with a null class, and a binary bag-of-N-grams
occurrence vector over a selected vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .alphabet import MAX_WORD_LEN, NULL_CLASS, NUM_CHAR_CLASSES, char_class, class_char
from .corpus import GramWeights, LanguagePrior, Lexicon, NGramVocab


def grams(word: str, n: int) -> set[str]:
    """All distinct substrings of ``word`` with length <= n."""
    if not word:
        raise ValueError("empty word")
    if n < 1:
        raise ValueError("n must be >= 1")
    L = len(word)
    return {word[i : i + m] for m in range(1, min(n, L) + 1) for i in range(L - m + 1)}


def encode_dict(word: str, lexicon: Lexicon) -> int:
    """Class index of ``word`` in the lexicon."""
    try:
        return lexicon.index[word]
    except KeyError:
        raise ValueError(f"word {word!r} not in lexicon") from None


def encode_charseq(word: str) -> np.ndarray:
    """23-slot class-id sequence; trailing slots hold the null class."""
    if len(word) > MAX_WORD_LEN:
        raise ValueError(f"word longer than {MAX_WORD_LEN} characters: {word!r}")
    if not word:
        raise ValueError("empty word")
    slots = np.full(MAX_WORD_LEN, NULL_CLASS, dtype=np.int64)
    for i, ch in enumerate(word):
        slots[i] = char_class(ch)
    return slots


def decode_charseq(probs: np.ndarray) -> str:
    """Per-slot argmax, with every null prediction stripped.

    ``probs`` is a (23, 37) row-stochastic matrix.  Interior nulls are
    removed as well, so the output may be shorter than the number of
    non-null slots suggests.
    """
    probs = np.asarray(probs)
    if probs.shape != (MAX_WORD_LEN, NUM_CHAR_CLASSES):
        raise ValueError(f"expected ({MAX_WORD_LEN}, {NUM_CHAR_CLASSES}) matrix, got {probs.shape}")
    classes = probs.argmax(axis=1)
    return "".join(class_char(int(c)) for c in classes)


@dataclass(frozen=True)
class NGramTarget:
    """Binary gram-occurrence vector with its sorted support indices."""

    bits: np.ndarray  # (V,) uint8
    support: tuple[int, ...]


def encode_ngrams(word: str, vocab: NGramVocab) -> NGramTarget:
    """Occurrence vector of the word's grams restricted to the vocabulary.

    Grams of the word that fall below the vocabulary's selection threshold
    are simply absent from the target.
    """
    bits = np.zeros(len(vocab), dtype=np.uint8)
    support = sorted(vocab.index[g] for g in grams(word, vocab.max_n) if g in vocab.index)
    bits[support] = 1
    return NGramTarget(bits=bits, support=tuple(support))


def encode_lexicon_ngrams(lexicon: Lexicon, vocab: NGramVocab) -> np.ndarray:
    """(|lexicon|, |vocab|) matrix of gram-occurrence rows."""
    out = np.zeros((len(lexicon), len(vocab)), dtype=np.uint8)
    for i, w in enumerate(lexicon):
        out[i] = encode_ngrams(w, vocab).bits
    return out


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def constrain_lexicon(
    predicted: str,
    sublexicon: Sequence[str],
    prior: LanguagePrior | None = None,
) -> str:
    """Closest sublexicon word by edit distance.

    Ties break toward the higher prior value (when given), then
    lexicographically.
    """
    words = list(sublexicon)
    if not words:
        raise ValueError("empty sublexicon")
    best = None
    for w in words:
        d = levenshtein(predicted, w)
        p = prior[w] if prior is not None else 0.0
        key = (d, -p, w)
        if best is None or key < best:
            best = key
    return best[2]


def score_dict(word_probs: np.ndarray, lexicon: Lexicon, prior: LanguagePrior) -> str:
    """argmax over the lexicon of P(w|x) * P(w|L); ties lexicographic."""
    probs = np.asarray(word_probs, dtype=np.float64)
    if probs.shape != (len(lexicon),):
        raise ValueError(f"probability vector length {probs.shape} != lexicon size {len(lexicon)}")
    if np.any(probs < 0):
        raise ValueError("negative probabilities")
    pvals = np.array([prior[w] for w in lexicon.words])
    scores = probs * pvals
    top = scores.max()
    if top <= 0.0:
        raise ValueError("no word admissible: every posterior-prior product is zero")
    candidates = [lexicon[i] for i in np.flatnonzero(scores == top)]
    return min(candidates)


def decode_ngrams_nn(
    act: np.ndarray,
    lexicon: Lexicon,
    encodings: np.ndarray,
    threshold: float | None = None,
) -> str:
    """Word whose gram encoding is Euclidean-nearest to the activations.

    ``encodings`` is the precomputed (|lexicon|, V) bit matrix.  With a
    threshold, activations are binarized first.  Ties lexicographic.
    """
    act = np.asarray(act, dtype=np.float64)
    if threshold is not None:
        act = (act >= threshold).astype(np.float64)
    # ||a - e||^2 = ||a||^2 - 2 a.e + |support|; ||a||^2 is constant in w
    enc = encodings.astype(np.float64)
    d = enc.sum(axis=1) - 2.0 * (enc @ act)
    best = d.min()
    candidates = [lexicon[i] for i in np.flatnonzero(d == best)]
    return min(candidates)


def collision_groups(lexicon: Lexicon, n: int = 4, vocab: NGramVocab | None = None) -> list[list[str]]:
    """Groups of distinct words sharing an identical gram set."""
    groups: dict[frozenset, list[str]] = {}
    for w in lexicon:
        gs = grams(w, vocab.max_n if vocab is not None else n)
        if vocab is not None:
            gs = {g for g in gs if g in vocab.index}
        groups.setdefault(frozenset(gs), []).append(w)
    return [v for v in groups.values() if len(v) > 1]


def count_collisions(lexicon: Lexicon, n: int = 4, vocab: NGramVocab | None = None) -> int:
    """Number of words whose gram set is shared, counted as sum of
    (group size - 1) over identical-encoding groups."""
    return sum(len(g) - 1 for g in collision_groups(lexicon, n=n, vocab=vocab))


class NGramWordSVM:
    """One-vs-rest linear scorers from gram activations to lexicon words.

    Hinge loss with L2 regularization, trained by SGD.  Decoding takes the
    argmax scorer output; ties break lexicographically.
    """

    def __init__(self, lexicon: Lexicon, lam: float = 1e-4, lr: float = 0.05,
                 epochs: int = 20, batch_size: int = 64, seed: int = 0):
        if len(lexicon) < 2:
            raise ValueError("need at least 2 lexicon words")
        self.lexicon = lexicon
        self.lam = lam
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.weights: np.ndarray | None = None  # (K, V)
        self.bias: np.ndarray | None = None  # (K,)

    def fit(self, acts: np.ndarray, classes: np.ndarray) -> "NGramWordSVM":
        X = np.asarray(acts, dtype=np.float64)
        y = np.asarray(classes, dtype=np.int64)
        K = len(self.lexicon)
        if len(np.unique(y)) < 2:
            raise ValueError("degenerate single-class training set")
        n, V = X.shape
        rng = np.random.default_rng(self.seed)
        W = np.zeros((K, V))
        b = np.zeros(K)
        Y = -np.ones((n, K))
        Y[np.arange(n), y] = 1.0
        # L2 as post-step shrinkage, clipped at zero: huge lam pins W at 0
        # (constant scorers) instead of diverging. Bias is not regularized.
        shrink = max(0.0, 1.0 - self.lr * self.lam)
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                xb, yb = X[idx], Y[idx]
                margin = yb * (xb @ W.T + b)  # (B, K)
                viol = (margin < 1.0).astype(np.float64) * yb
                W += self.lr * (viol.T @ xb) / len(idx)
                W *= shrink
                b += self.lr * viol.sum(axis=0) / len(idx)
        self.weights, self.bias = W, b
        return self

    def decision_function(self, acts: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise RuntimeError("fit before decoding")
        return np.asarray(acts, dtype=np.float64) @ self.weights.T + self.bias

    def predict(self, acts: np.ndarray) -> list[str]:
        scores = self.decision_function(np.atleast_2d(acts))
        out = []
        for row in scores:
            top = row.max()
            out.append(min(self.lexicon[i] for i in np.flatnonzero(row == top)))
        return out


def decode_ngrams_svm(act: np.ndarray, svm: NGramWordSVM) -> str:
    """Single-sample convenience wrapper over NGramWordSVM.predict."""
    return svm.predict(np.atleast_2d(act))[0]


def dump_encodings(path, words: Sequence[str], kind: str,
                   lexicon: Lexicon | None = None, vocab: NGramVocab | None = None) -> None:
    """Debug dumps: one line per word in the per-encoding text format."""
    with open(path, "w", encoding="utf-8") as f:
        for w in words:
            if kind == "dict":
                f.write(f"{w}\t{encode_dict(w, lexicon)}\n")
            elif kind == "charseq":
                slots = encode_charseq(w)
                s = "".join(class_char(int(c)) or "_" for c in slots)
                f.write(f"{w}\t{s}\n")
            elif kind == "ngram":
                sup = encode_ngrams(w, vocab).support
                f.write(f"{w}\t{','.join(map(str, sup))}\n")
            else:
                raise ValueError(f"unknown encoding kind {kind!r}")
