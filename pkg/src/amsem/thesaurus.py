"""Distributional thesaurus: count word-context pairs, score them, prune to
salient features, and rank similar words by salient-feature overlap.

The holing step turns every token occurrence into (word, feature) pairs,
where a feature names a neighboring word within the context window,
optionally tagged with its relative position (``-1@ነው``).  Pair significance
defaults to lexicographer's mutual information,

    lmi(w, f) = n(w,f) * log2( n(w,f) * N / (n(w) * n(f)) ),

computed from the full, unpruned counts.  Pruning then drops rare pairs and
overly broad features, and each word keeps its top ``features_per_word``
features by score.  Two words are similar in proportion to how many salient
features they share; the stored neighbor lists are symmetric in that count.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import tokens_of

__all__ = [
    "HolingConfig",
    "CooccurrenceModel",
    "ThesaurusModel",
    "extract_features",
    "lmi",
    "pmi",
    "build_dt",
    "similar",
    "save_dt",
    "load_dt",
    "save_salient",
]

SIGNIFICANCE_MEASURES = ("lmi", "pmi", "freq")


@dataclass(frozen=True)
class HolingConfig:
    window: int = 3
    positional: bool = True
    min_word_feature_count: int = 2
    features_per_word: int = 1000
    max_words_per_feature: int = 1000
    significance: str = "lmi"
    weighted_overlap: bool = False

    def __post_init__(self) -> None:
        for name in ("window", "min_word_feature_count", "features_per_word",
                     "max_words_per_feature"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.significance not in SIGNIFICANCE_MEASURES:
            raise ValueError(f"unknown significance measure {self.significance!r}")


@dataclass(frozen=True)
class CooccurrenceModel:
    """Marginal and joint counts over all extracted (word, feature) pairs."""

    n_w: dict[str, int]
    n_f: dict[str, int]
    n_wf: dict[tuple[str, str], int]
    N: int


@dataclass
class ThesaurusModel:
    """Per-word salient features and overlap-ranked neighbor lists.

    ``salient[w]`` is sorted by descending score; ``neighbors[w]`` by
    descending overlap, ties lexicographic.  Every corpus word type is a key,
    so words without surviving features map to empty lists.
    """

    salient: dict[str, list[tuple[str, float]]]
    neighbors: dict[str, list[tuple[str, float]]]
    config: HolingConfig

    def __contains__(self, word: str) -> bool:
        return word in self.neighbors

    @property
    def words(self) -> list[str]:
        return sorted(self.neighbors)


def extract_features(sentence: Sequence[str], cfg: HolingConfig) -> list[tuple[str, str]]:
    """Emit one (word, feature) pair per neighbor within the window.

    With ``positional=True`` a neighbor at signed offset d yields the feature
    ``f"{d:+d}@{neighbor}"``; otherwise the feature is the bare neighbor word.
    """
    words = list(sentence)
    pairs: list[tuple[str, str]] = []
    for i, word in enumerate(words):
        lo = max(0, i - cfg.window)
        hi = min(len(words), i + cfg.window + 1)
        for j in range(lo, hi):
            if j == i:
                continue
            if cfg.positional:
                pairs.append((word, f"{j - i:+d}@{words[j]}"))
            else:
                pairs.append((word, words[j]))
    return pairs


def lmi(n_wf: int, n_w: int, n_f: int, N: int) -> float:
    """Lexicographer's mutual information of one pair."""
    if n_wf < 1 or N < 1:
        raise ValueError("lmi requires n_wf >= 1 and N >= 1")
    if n_w < 1 or n_f < 1:
        raise ValueError("lmi requires positive marginals")
    return n_wf * math.log2((n_wf * N) / (n_w * n_f))


def pmi(n_wf: int, n_w: int, n_f: int, N: int) -> float:
    if n_wf < 1 or N < 1:
        raise ValueError("pmi requires n_wf >= 1 and N >= 1")
    if n_w < 1 or n_f < 1:
        raise ValueError("pmi requires positive marginals")
    return math.log2((n_wf * N) / (n_w * n_f))


def _score(measure: str, n_wf: int, n_w: int, n_f: int, N: int) -> float:
    if measure == "lmi":
        return lmi(n_wf, n_w, n_f, N)
    if measure == "pmi":
        return pmi(n_wf, n_w, n_f, N)
    return float(n_wf)


def count_cooccurrences(
    corpus_stream: Iterable, cfg: HolingConfig
) -> tuple[CooccurrenceModel, set[str]]:
    """One pass over the corpus: pair counts plus the set of word types."""
    n_w: Counter[str] = Counter()
    n_f: Counter[str] = Counter()
    n_wf: Counter[tuple[str, str]] = Counter()
    types: set[str] = set()
    total = 0
    for sentence in corpus_stream:
        toks = tokens_of(sentence)
        types.update(toks)
        for word, feat in extract_features(toks, cfg):
            n_w[word] += 1
            n_f[feat] += 1
            n_wf[(word, feat)] += 1
            total += 1
    return CooccurrenceModel(dict(n_w), dict(n_f), dict(n_wf), total), types


def build_dt(corpus_stream: Iterable, cfg: HolingConfig | None = None) -> ThesaurusModel:
    """Count, score, prune, and rank the whole thesaurus.

    Pruning order: pairs with count below ``min_word_feature_count`` go
    first; then features left with more than ``max_words_per_feature``
    distinct words are dropped entirely.  Scores always use the full
    unpruned counts.
    """
    cfg = cfg or HolingConfig()
    counts, types = count_cooccurrences(corpus_stream, cfg)
    if not types:
        raise ValueError("cannot build a thesaurus from an empty corpus")

    surviving = {
        pair: c for pair, c in counts.n_wf.items() if c >= cfg.min_word_feature_count
    }
    feat_breadth: Counter[str] = Counter(f for _, f in surviving)
    broad = {f for f, k in feat_breadth.items() if k > cfg.max_words_per_feature}
    if broad:
        surviving = {(w, f): c for (w, f), c in surviving.items() if f not in broad}

    scored: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for (word, feat), c in surviving.items():
        s = _score(cfg.significance, c, counts.n_w[word], counts.n_f[feat], counts.N)
        scored[word].append((feat, s))

    salient: dict[str, list[tuple[str, float]]] = {w: [] for w in types}
    for word, feats in scored.items():
        feats.sort(key=lambda fs: (-fs[1], fs[0]))
        salient[word] = feats[: cfg.features_per_word]

    neighbors = _rank_neighbors(salient, cfg)
    return ThesaurusModel(salient=salient, neighbors=neighbors, config=cfg)


def _rank_neighbors(
    salient: dict[str, list[tuple[str, float]]], cfg: HolingConfig
) -> dict[str, list[tuple[str, float]]]:
    by_feature: dict[str, list[str]] = defaultdict(list)
    score_of: dict[str, dict[str, float]] = {}
    for word, feats in salient.items():
        score_of[word] = dict(feats)
        for feat, _ in feats:
            by_feature[feat].append(word)

    neighbors: dict[str, list[tuple[str, float]]] = {}
    for word, feats in salient.items():
        overlap: dict[str, float] = defaultdict(float)
        for feat, score in feats:
            for other in by_feature[feat]:
                if other == word:
                    continue
                if cfg.weighted_overlap:
                    # symmetric: the smaller of the two salience scores
                    overlap[other] += min(score, score_of[other][feat])
                else:
                    overlap[other] += 1
        ranked = sorted(overlap.items(), key=lambda kv: (-kv[1], kv[0]))
        neighbors[word] = ranked
    return neighbors


def similar(model: ThesaurusModel, word: str, k: int) -> list[tuple[str, float]]:
    """The top ``k`` neighbors of ``word`` (fewer if the list is shorter)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if word not in model.neighbors:
        raise KeyError(f"word not in thesaurus: {word!r}")
    return model.neighbors[word][:k]


def save_dt(model: ThesaurusModel, path) -> None:
    """Write ``word<TAB>neighbor<TAB>overlap`` sorted by (word, rank).

    Words with no neighbors are kept as single-field lines so the node set
    survives a round trip.
    """
    with open(path, "w", encoding="utf-8") as f:
        for word in sorted(model.neighbors):
            ranked = model.neighbors[word]
            if not ranked:
                f.write(f"{word}\n")
            for nbr, overlap in ranked:
                value = int(overlap) if float(overlap).is_integer() else overlap
                f.write(f"{word}\t{nbr}\t{value}\n")


def load_dt(path, cfg: HolingConfig | None = None) -> ThesaurusModel:
    """Rebuild neighbor lists from a DT file (salient lists are not stored)."""
    neighbors: dict[str, list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                neighbors.setdefault(parts[0], [])
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected word<TAB>neighbor<TAB>overlap")
            word, nbr, value = parts
            neighbors.setdefault(word, []).append((nbr, float(value)))
            neighbors.setdefault(nbr, [])
    salient: dict[str, list[tuple[str, float]]] = {w: [] for w in neighbors}
    return ThesaurusModel(salient=salient, neighbors=neighbors, config=cfg or HolingConfig())


def save_salient(model: ThesaurusModel, path) -> None:
    """Write ``word<TAB>feature<TAB>score`` sorted by (word, rank)."""
    with open(path, "w", encoding="utf-8") as f:
        for word in sorted(model.salient):
            for feat, score in model.salient[word]:
                f.write(f"{word}\t{feat}\t{score!r}\n")
