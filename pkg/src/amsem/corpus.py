"""Corpus streaming, frequency vocabularies, statistics, and dataset splits.

A corpus on disk is UTF-8 plain text with one tokenized sentence per line,
tokens separated by single spaces.  In-memory corpus streams are iterables
whose items are either token lists or pre-tokenized strings (split on
whitespace).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Vocabulary",
    "CorpusStats",
    "SplitSpec",
    "build_vocab",
    "corpus_stats",
    "split_dataset",
    "read_corpus",
    "write_corpus",
    "save_vocab",
    "load_vocab",
]


def tokens_of(sentence) -> list[str]:
    """Coerce a corpus-stream item (string or token sequence) to a token list."""
    if isinstance(sentence, str):
        return sentence.split()
    return list(sentence)


@dataclass(frozen=True)
class Vocabulary:
    """Dense word-to-id mapping with per-word frequencies.

    Ids are assigned by descending frequency, ties broken lexicographically,
    so identical streams always yield identical assignments.  ``total_tokens``
    counts the unfiltered stream (including words below the frequency cutoff)
    and is kept for probability estimates.
    """

    word_to_id: dict[str, int]
    id_to_word: list[str]
    counts: list[int]
    total_tokens: int

    def __len__(self) -> int:
        return len(self.id_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id


@dataclass(frozen=True)
class CorpusStats:
    sentence_count: int
    token_count: int
    type_count: int


@dataclass(frozen=True)
class SplitSpec:
    """Three-way split ratios plus the shuffle seed."""

    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 42

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError(f"ratios must be three non-negative reals: {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1: {self.ratios}")


def build_vocab(corpus_stream: Iterable, min_count: int = 1) -> Vocabulary:
    """Count the stream and keep words with frequency >= ``min_count``."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    freq: Counter[str] = Counter()
    total = 0
    for sentence in corpus_stream:
        toks = tokens_of(sentence)
        freq.update(toks)
        total += len(toks)
    kept = sorted(
        (w for w, c in freq.items() if c >= min_count),
        key=lambda w: (-freq[w], w),
    )
    return Vocabulary(
        word_to_id={w: i for i, w in enumerate(kept)},
        id_to_word=kept,
        counts=[freq[w] for w in kept],
        total_tokens=total,
    )


def corpus_stats(corpus_stream: Iterable) -> CorpusStats:
    sentences = 0
    tokens = 0
    types: set[str] = set()
    for sentence in corpus_stream:
        toks = tokens_of(sentence)
        sentences += 1
        tokens += len(toks)
        types.update(toks)
    return CorpusStats(sentences, tokens, len(types))


def split_dataset(items: Sequence, spec: SplitSpec) -> tuple[list, list, list]:
    """Shuffle deterministically and slice into train/dev/test.

    Part sizes follow the largest-remainder method: floor each ratio*n, then
    hand leftover items to the parts with the largest fractional remainders,
    ties favoring train, then dev, then test.
    """
    if not items:
        raise ValueError("cannot split an empty item list")
    n = len(items)
    raw = [r * n for r in spec.ratios]
    sizes = [math.floor(x) for x in raw]
    leftover = n - sum(sizes)
    by_remainder = sorted(range(3), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in range(leftover):
        sizes[by_remainder[i % 3]] += 1
    shuffled = list(items)
    random.Random(spec.seed).shuffle(shuffled)
    train = shuffled[: sizes[0]]
    dev = shuffled[sizes[0] : sizes[0] + sizes[1]]
    test = shuffled[sizes[0] + sizes[1] :]
    return train, dev, test


def read_corpus(path) -> Iterator[list[str]]:
    """Yield token lists from a sentence-per-line corpus file."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            toks = line.split()
            if toks:
                yield toks


def write_corpus(path, sentences: Iterable) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for sentence in sentences:
            f.write(" ".join(tokens_of(sentence)) + "\n")


def save_vocab(vocab: Vocabulary, path) -> None:
    """Write ``word<TAB>count`` ordered by id, with a total-count header."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# total_tokens\t{vocab.total_tokens}\n")
        for word, count in zip(vocab.id_to_word, vocab.counts):
            f.write(f"{word}\t{count}\n")


def load_vocab(path) -> Vocabulary:
    words: list[str] = []
    counts: list[int] = []
    total = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split("\t")
                if len(parts) == 2 and parts[0].strip() == "total_tokens":
                    total = int(parts[1])
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected word<TAB>count")
            words.append(parts[0])
            counts.append(int(parts[1]))
    return Vocabulary(
        word_to_id={w: i for i, w in enumerate(words)},
        id_to_word=words,
        counts=counts,
        total_tokens=total if total is not None else sum(counts),
    )
