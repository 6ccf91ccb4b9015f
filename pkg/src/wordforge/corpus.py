"""Word lists, language priors, and N-gram vocabulary selection.

All containers are immutable after construction and safe to share across
worker processes.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .alphabet import MAX_WORD_LEN, WORD_RE

log = logging.getLogger(__name__)

BUNDLED_WORDS = "words_en_50k.txt"


class Lexicon:
    """Ordered list of unique lowercase words with an inverse index."""

    def __init__(self, words: Sequence[str], n_dropped: int = 0):
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.n_dropped = n_dropped
        if len(self.index) != len(self.words):
            raise ValueError("lexicon contains duplicate words")
        for w in self.words:
            if not WORD_RE.fullmatch(w):
                raise ValueError(f"invalid lexicon word {w!r}")

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __getitem__(self, i: int) -> str:
        return self.words[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Lexicon) and self.words == other.words

    @classmethod
    def from_words(cls, raw: Iterable[str]) -> "Lexicon":
        """Case-fold, filter to [a-z0-9]{1,23} and de-duplicate.

        First-occurrence order is preserved; the number of dropped entries
        is kept for inspection and logged as a warning.
        """
        seen: dict[str, None] = {}
        dropped = 0
        for token in raw:
            w = token.strip().casefold()
            if not w:
                continue
            if not WORD_RE.fullmatch(w):
                dropped += 1
                continue
            seen.setdefault(w, None)
        if dropped:
            log.warning("dropped %d words outside [a-z0-9]{1,%d}", dropped, MAX_WORD_LEN)
        if not seen:
            raise ValueError("no valid words after filtering")
        return cls(list(seen), n_dropped=dropped)

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_words(f)

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.words) + "\n", encoding="utf-8")


def bundled_lexicon() -> Lexicon:
    """The 50k-word English list shipped with the package."""
    text = resources.files("wordforge.data").joinpath(BUNDLED_WORDS).read_text("utf-8")
    return Lexicon.from_words(text.splitlines())


class FrequencyTable:
    """Word -> non-negative count, e.g. from a corpus scan."""

    def __init__(self, counts: Mapping[str, int]):
        self.counts = {w: int(c) for w, c in counts.items()}
        for w, c in self.counts.items():
            if c < 0:
                raise ValueError(f"negative count for {w!r}")

    def __getitem__(self, word: str) -> int:
        return self.counts.get(word, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def load(cls, path) -> "FrequencyTable":
        counts = {}
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                word, _, count = line.partition("\t")
                counts[word] = int(count)
        return cls(counts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for w, c in self.counts.items():
                f.write(f"{w}\t{c}\n")


@dataclass(frozen=True)
class LanguagePrior:
    """Per-word probability P(w|L) over a lexicon; sums to one."""

    mode: str  # "uniform" | "power-law"
    values: dict[str, float]
    alpha: float | None = None

    def __getitem__(self, word: str) -> float:
        return self.values.get(word, 0.0)


def build_prior(
    lexicon: Lexicon,
    freq: FrequencyTable | None = None,
    mode: str = "uniform",
    alpha: float = 0.5,
    sublexicon: Sequence[str] | None = None,
) -> LanguagePrior:
    """Build a language prior.

    uniform: equal mass on the sublexicon (default: whole lexicon), zero
    elsewhere.  power-law: value(w) proportional to (count(w)+1)**alpha,
    with add-one smoothing covering unseen words.
    """
    if mode == "uniform":
        members = list(sublexicon) if sublexicon is not None else lexicon.words
        members = [w for w in members if w in lexicon]
        if not members:
            raise ValueError("uniform prior has empty support")
        p = 1.0 / len(members)
        return LanguagePrior(mode="uniform", values={w: p for w in members})
    if mode == "power-law":
        if alpha <= 0:
            raise ValueError("power-law exponent must be > 0")
        if freq is None or not any(w in freq.counts for w in lexicon):
            raise ValueError("power-law prior requires frequency counts covering the lexicon")
        raw = {w: (freq[w] + 1.0) ** alpha for w in lexicon}
        z = sum(raw.values())
        return LanguagePrior(mode="power-law", values={w: v / z for w, v in raw.items()}, alpha=alpha)
    raise ValueError(f"unknown prior mode {mode!r}")


def count_substrings(words: Iterable[str], n_max: int) -> Counter:
    """Total occurrence counts of every substring of length <= n_max.

    Repeats within a word each count once per occurrence.
    """
    counts: Counter = Counter()
    for w in words:
        L = len(w)
        for n in range(1, min(n_max, L) + 1):
            for i in range(L - n + 1):
                counts[w[i : i + n]] += 1
    return counts


class NGramVocab:
    """Ordered N-gram list selected by a corpus occurrence threshold."""

    def __init__(self, grams: Sequence[str], counts: Mapping[str, int], max_n: int, min_count: int):
        self.grams = list(grams)
        self.index = {g: i for i, g in enumerate(self.grams)}
        self.counts = dict(counts)
        self.max_n = max_n
        self.min_count = min_count
        if len(self.index) != len(self.grams):
            raise ValueError("duplicate grams in vocabulary")

    def __len__(self) -> int:
        return len(self.grams)

    def __contains__(self, gram) -> bool:
        return gram in self.index

    def per_length_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for g in self.grams:
            out[len(g)] = out.get(len(g), 0) + 1
        return out

    def save(self, path, weights: "GramWeights | None" = None) -> None:
        """Dump as ``gram<TAB>count<TAB>weight`` lines."""
        w = weights.weights if weights is not None else np.ones(len(self.grams))
        with open(path, "w", encoding="utf-8") as f:
            for i, g in enumerate(self.grams):
                f.write(f"{g}\t{self.counts[g]}\t{w[i]:.10g}\n")

    @classmethod
    def load(cls, path, max_n: int = 4, min_count: int = 10) -> "NGramVocab":
        grams, counts = [], {}
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                g, c, _w = line.split("\t")
                grams.append(g)
                counts[g] = int(c)
        return cls(grams, counts, max_n=max_n, min_count=min_count)


def select_ngram_vocab(lexicon: Lexicon, n_max: int = 4, min_count: int = 10) -> NGramVocab:
    """Select all grams of length <= n_max appearing >= min_count times.

    1-grams are always kept when present at all, so the vocabulary covers
    the full alphabet of the corpus.  Order: by length, then lexicographic.
    """
    if len(lexicon) == 0:
        raise ValueError("empty lexicon")
    counts = count_substrings(lexicon.words, n_max)
    kept = [g for g, c in counts.items() if c >= min_count or len(g) == 1]
    kept.sort(key=lambda g: (len(g), g))
    return NGramVocab(kept, {g: counts[g] for g in kept}, max_n=n_max, min_count=min_count)


@dataclass(frozen=True)
class GramWeights:
    """Per-gram positive weights, inverse to corpus frequency, mean one."""

    weights: np.ndarray

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("gram weights must be positive")


def gram_weights(lexicon: Lexicon, vocab: NGramVocab) -> GramWeights:
    """weight(g) proportional to 1/frequency(g), normalized to mean 1."""
    counts = count_substrings(lexicon.words, vocab.max_n)
    freq = np.array([counts.get(g, 0) for g in vocab.grams], dtype=np.float64)
    if np.any(freq == 0):
        missing = [g for g, c in zip(vocab.grams, freq) if c == 0]
        raise ValueError(f"grams with zero corpus frequency: {missing[:5]}")
    w = 1.0 / freq
    w *= len(w) / w.sum()
    return GramWeights(weights=w)


def mean_gram_set_size(lexicon: Lexicon, vocab: NGramVocab) -> float:
    """Average |G_N(w) ∩ vocab| over the lexicon."""
    total = 0
    for w in lexicon:
        gs = {w[i : i + n] for n in range(1, vocab.max_n + 1) for i in range(len(w) - n + 1)}
        total += sum(1 for g in gs if g in vocab.index)
    return total / len(lexicon)
