"""Linear-chain averaged structured perceptron for POS tagging and NER.

The feature set mirrors a classic CRF tagging setup: the word itself, its
immediate neighbors, prefixes and suffixes of lengths 1 to 3 (measured in
Unicode scalar values, since Ethiopic characters are multi-byte), and an
is-numeric flag.  Word-cluster features derived from an embedding model can
be added for semi-supervised signals.

Decoding is exact Viterbi over emission and transition weights.  Training
is mistake-driven: decode with the current weights, and on error add the
gold feature counts and subtract the predicted ones; the shipped weights
are the average over all per-sequence weight snapshots, which smooths the
late-training oscillation of the plain perceptron.

Evaluation reports both token-level metrics (per-tag and macro/micro) and,
for BIO-encoded data, span-level exact-match precision/recall/F1.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingModel, all_vectors, vector
from .ethiopic import is_numeric
from .metrics import PRFScore

__all__ = [
    "TaggedSequence",
    "TaggerModel",
    "SpanMetric",
    "TokenEvalReport",
    "SpanEvalReport",
    "WordClusters",
    "handcrafted_features",
    "embedding_features",
    "combine_features",
    "viterbi",
    "train",
    "evaluate_tokens",
    "evaluate_spans",
    "bio_spans",
    "read_conll",
    "write_conll",
    "save_model",
    "load_model",
]

BOS = "<s>"
EOS = "</s>"

SpanMetric = PRFScore

FeatureFn = Callable[[Sequence[str], int], list[str]]


@dataclass(frozen=True)
class TaggedSequence:
    tokens: list[str]
    labels: list[str]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.labels) or not self.tokens:
            raise ValueError(
                f"need equal, non-zero token/label counts "
                f"({len(self.tokens)} vs {len(self.labels)})"
            )


@dataclass
class TaggerModel:
    tagset: list[str]
    feature_weights: dict[tuple[str, str], float]
    transition_weights: dict[tuple[str, str], float]
    averaged: bool = True


def handcrafted_features(tokens: Sequence[str], i: int) -> list[str]:
    """The word-shape feature set for position ``i``.

    Emits the current word, the previous and next words (or bare BOS/EOS
    markers at the edges), prefixes and suffixes of lengths 1..3 where the
    word is long enough, ``isnum`` for all-digit tokens, and a constant
    bias feature.
    """
    if not 0 <= i < len(tokens):
        raise IndexError(f"position {i} out of range for {len(tokens)} tokens")
    w = tokens[i]
    feats = [f"w={w}"]
    feats.append("BOS" if i == 0 else f"w-1={tokens[i - 1]}")
    feats.append("EOS" if i == len(tokens) - 1 else f"w+1={tokens[i + 1]}")
    for n in range(1, min(3, len(w)) + 1):
        feats.append(f"p{n}={w[:n]}")
    for n in range(1, min(3, len(w)) + 1):
        feats.append(f"s{n}={w[-n:]}")
    if is_numeric(w):
        feats.append("isnum")
    feats.append("bias")
    return feats


@dataclass
class WordClusters:
    """K-means clustering of an embedding vocabulary, for cluster features."""

    centroids: np.ndarray
    assignment: dict[str, int]
    model: EmbeddingModel | None = None

    @classmethod
    def fit(
        cls,
        model: EmbeddingModel,
        n_clusters: int,
        seed: int = 0,
        max_iter: int = 100,
    ) -> "WordClusters":
        words = model.vocab.id_to_word
        X = np.asarray(all_vectors(model), dtype=np.float64)
        if n_clusters < 1 or n_clusters > len(words):
            raise ValueError(f"need 1 <= clusters <= {len(words)}, got {n_clusters}")
        rng = np.random.default_rng(seed)
        centroids = X[rng.choice(len(words), size=n_clusters, replace=False)].copy()
        labels = np.zeros(len(words), dtype=np.intp)
        for _ in range(max_iter):
            dists = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            new_labels = np.argmin(dists, axis=1)  # ties -> lowest centroid id
            if np.array_equal(new_labels, labels):
                labels = new_labels
                break
            labels = new_labels
            for c in range(n_clusters):
                members = X[labels == c]
                if len(members):
                    centroids[c] = members.mean(axis=0)
        return cls(centroids, {w: int(labels[i]) for i, w in enumerate(words)}, model)

    def label_of(self, word: str) -> str:
        cid = self.assignment.get(word)
        if cid is not None:
            return str(cid)
        if self.model is not None and self.model.config.subword is not None:
            v = vector(self.model, word)
            if np.linalg.norm(v) > 0:
                d = ((self.centroids - v) ** 2).sum(axis=1)
                return str(int(np.argmin(d)))
        return "UNK"


def embedding_features(tokens: Sequence[str], i: int, clusters: WordClusters) -> list[str]:
    """Cluster-id features for the current, previous, and next words."""
    if not 0 <= i < len(tokens):
        raise IndexError(f"position {i} out of range for {len(tokens)} tokens")
    feats = [f"cl={clusters.label_of(tokens[i])}"]
    feats.append("cl-1=BOS" if i == 0 else f"cl-1={clusters.label_of(tokens[i - 1])}")
    feats.append("cl+1=EOS" if i == len(tokens) - 1 else f"cl+1={clusters.label_of(tokens[i + 1])}")
    return feats


def combine_features(*fns: FeatureFn) -> FeatureFn:
    def combined(tokens: Sequence[str], i: int) -> list[str]:
        out: list[str] = []
        for fn in fns:
            out.extend(fn(tokens, i))
        return out

    return combined


def viterbi(model: TaggerModel, tokens: Sequence[str], feature_fn: FeatureFn) -> list[str]:
    """Exact argmax tag sequence under emission + transition weights.

    Score ties resolve toward earlier tags in ``model.tagset``.
    """
    if not tokens:
        raise ValueError("cannot decode an empty token sequence")
    tags = model.tagset
    W = model.feature_weights
    T = model.transition_weights
    n = len(tokens)
    emit = []
    for i in range(n):
        feats = feature_fn(tokens, i)
        emit.append([sum(W.get((f, t), 0.0) for f in feats) for t in tags])

    score = [T.get((BOS, t), 0.0) + emit[0][ti] for ti, t in enumerate(tags)]
    back: list[list[int]] = []
    for i in range(1, n):
        nxt = []
        ptr = []
        for ti, t in enumerate(tags):
            best_p, best_s = 0, None
            for pi, p in enumerate(tags):
                s = score[pi] + T.get((p, t), 0.0)
                if best_s is None or s > best_s:
                    best_p, best_s = pi, s
            nxt.append(best_s + emit[i][ti])
            ptr.append(best_p)
        score = nxt
        back.append(ptr)

    best_t, best_s = 0, None
    for ti, t in enumerate(tags):
        s = score[ti] + T.get((t, EOS), 0.0)
        if best_s is None or s > best_s:
            best_t, best_s = ti, s
    path = [best_t]
    for ptr in reversed(back):
        path.append(ptr[path[-1]])
    path.reverse()
    return [tags[ti] for ti in path]


def _sequence_counts(
    feats: list[list[str]], labels: Sequence[str]
) -> tuple[Counter, Counter]:
    fc: Counter = Counter()
    tc: Counter = Counter()
    prev = BOS
    for i, tag in enumerate(labels):
        for f in feats[i]:
            fc[(f, tag)] += 1
        tc[(prev, tag)] += 1
        prev = tag
    tc[(prev, EOS)] += 1
    return fc, tc


class _AveragedWeights:
    """Sparse weights with lazy averaging over per-sequence snapshots."""

    def __init__(self) -> None:
        self.w: dict = defaultdict(float)
        self.acc: dict = defaultdict(float)
        self.last: dict = defaultdict(int)

    def update(self, key, delta: float, t: int) -> None:
        self.acc[key] += self.w[key] * (t - self.last[key])
        self.w[key] += delta
        self.last[key] = t

    def averaged(self, t_final: int) -> dict:
        out = {}
        for key, value in self.w.items():
            total = self.acc[key] + value * (t_final - self.last[key] + 1)
            out[key] = total / t_final
        return out

    def raw(self) -> dict:
        return dict(self.w)


def train(
    data: list[TaggedSequence],
    epochs: int = 10,
    seed: int = 0,
    feature_fn: FeatureFn = handcrafted_features,
    tagset: list[str] | None = None,
    averaged: bool = True,
) -> TaggerModel:
    """Averaged structured perceptron over shuffled epochs."""
    if not data:
        raise ValueError("cannot train on an empty dataset")
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    seen = sorted({tag for seq in data for tag in seq.labels})
    if tagset is None:
        tagset = seen
    else:
        unknown = sorted(set(seen) - set(tagset))
        if unknown:
            raise ValueError(f"data contains tags outside the tagset: {unknown}")

    feats_cache = [[feature_fn(seq.tokens, i) for i in range(len(seq.tokens))] for seq in data]
    fw = _AveragedWeights()
    tw = _AveragedWeights()
    working = TaggerModel(tagset, fw.w, tw.w, averaged=False)
    rng = random.Random(seed)
    order = list(range(len(data)))
    t = 0
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            t += 1
            seq = data[idx]
            feats = feats_cache[idx]
            pred = viterbi(working, seq.tokens, lambda toks, i: feats[i])
            if pred == seq.labels:
                continue
            gold_f, gold_t = _sequence_counts(feats, seq.labels)
            pred_f, pred_t = _sequence_counts(feats, pred)
            for key, c in (gold_f - pred_f).items():
                fw.update(key, float(c), t)
            for key, c in (pred_f - gold_f).items():
                fw.update(key, -float(c), t)
            for key, c in (gold_t - pred_t).items():
                tw.update(key, float(c), t)
            for key, c in (pred_t - gold_t).items():
                tw.update(key, -float(c), t)

    if averaged:
        return TaggerModel(tagset, fw.averaged(t), tw.averaged(t), averaged=True)
    return TaggerModel(tagset, fw.raw(), tw.raw(), averaged=False)


@dataclass(frozen=True)
class TokenEvalReport:
    per_tag: dict[str, PRFScore]
    macro: PRFScore
    micro: PRFScore
    accuracy: float


def evaluate_tokens(pred: Sequence[str], gold: Sequence[str]) -> TokenEvalReport:
    """One-vs-rest token metrics; macro averages over tags present in gold."""
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: {len(pred)} predicted vs {len(gold)} gold")
    tags = sorted(set(gold))
    per_tag = {}
    for tag in tags:
        tp = sum(1 for p, g in zip(pred, gold) if p == tag and g == tag)
        fp = sum(1 for p, g in zip(pred, gold) if p == tag and g != tag)
        fn = sum(1 for p, g in zip(pred, gold) if p != tag and g == tag)
        per_tag[tag] = PRFScore.from_counts(tp, fp, fn)
    correct = sum(1 for p, g in zip(pred, gold) if p == g)
    accuracy = correct / len(gold) if gold else 0.0
    # micro over one-label-per-token predictions: P == R == accuracy
    micro = PRFScore(accuracy, accuracy, accuracy)
    return TokenEvalReport(per_tag, PRFScore.mean(list(per_tag.values())), micro, accuracy)


def bio_spans(tags: Sequence[str]) -> tuple[set[tuple[int, int, str]], int]:
    """Decode BIO tags into (start, end, class) spans with end exclusive.

    A stray I- (after O, at sequence start, or with a different class than
    the open span) is repaired by treating it as B-; the repair count is
    returned alongside the spans.
    """
    spans: set[tuple[int, int, str]] = set()
    repairs = 0
    start = None
    cls = None

    def close(end: int) -> None:
        nonlocal start, cls
        if start is not None:
            spans.add((start, end, cls))
        start, cls = None, None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
            continue
        if "-" not in tag:
            raise ValueError(f"malformed BIO tag at position {i}: {tag!r}")
        prefix, label = tag.split("-", 1)
        if prefix == "B":
            close(i)
            start, cls = i, label
        elif prefix == "I":
            if start is None or cls != label:
                repairs += 1
                close(i)
                start, cls = i, label
        else:
            raise ValueError(f"malformed BIO tag at position {i}: {tag!r}")
    close(len(tags))
    return spans, repairs


@dataclass(frozen=True)
class SpanEvalReport:
    per_class: dict[str, PRFScore]
    micro: PRFScore
    repairs: int
    degenerate: bool  # no spans on either side; all metrics defined as 0


def evaluate_spans(
    pred: Sequence[Sequence[str]], gold: Sequence[Sequence[str]]
) -> SpanEvalReport:
    """Exact-match span metrics over BIO sequences.

    A predicted span is correct only if a gold span with identical
    boundaries and class exists.
    """
    if len(pred) != len(gold):
        raise ValueError(f"sequence count mismatch: {len(pred)} vs {len(gold)}")
    repairs = 0
    pred_spans: set[tuple[int, int, int, str]] = set()
    gold_spans: set[tuple[int, int, int, str]] = set()
    for si, (p, g) in enumerate(zip(pred, gold)):
        if len(p) != len(g):
            raise ValueError(f"length mismatch in sequence {si}: {len(p)} vs {len(g)}")
        ps, r1 = bio_spans(p)
        gs, r2 = bio_spans(g)
        repairs += r1 + r2
        pred_spans.update((si, *s) for s in ps)
        gold_spans.update((si, *s) for s in gs)

    classes = sorted({s[3] for s in pred_spans} | {s[3] for s in gold_spans})
    per_class = {}
    for cls in classes:
        pc = {s for s in pred_spans if s[3] == cls}
        gc = {s for s in gold_spans if s[3] == cls}
        tp = len(pc & gc)
        per_class[cls] = PRFScore.from_counts(tp, len(pc) - tp, len(gc) - tp)
    tp = len(pred_spans & gold_spans)
    micro = PRFScore.from_counts(tp, len(pred_spans) - tp, len(gold_spans) - tp)
    return SpanEvalReport(per_class, micro, repairs, degenerate=not pred_spans and not gold_spans)


# ---------------------------------------------------------------------------
# CoNLL I/O and model persistence


def read_conll(path) -> list[TaggedSequence]:
    """Read ``token<TAB>tag`` lines, blank line between sequences."""
    sequences: list[TaggedSequence] = []
    tokens: list[str] = []
    labels: list[str] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                if tokens:
                    sequences.append(TaggedSequence(tokens, labels))
                    tokens, labels = [], []
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>tag, got {line!r}")
            tokens.append(parts[0])
            labels.append(parts[1])
    if tokens:
        sequences.append(TaggedSequence(tokens, labels))
    return sequences


def write_conll(sequences: Iterable[TaggedSequence], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            for tok, tag in zip(seq.tokens, seq.labels):
                f.write(f"{tok}\t{tag}\n")
            f.write("\n")


def save_model(model: TaggerModel, path) -> None:
    doc = {
        "tagset": model.tagset,
        "averaged": model.averaged,
        "feature_weights": {t: {} for t in model.tagset},
        "transitions": [[p, t, w] for (p, t), w in sorted(model.transition_weights.items())],
    }
    for (feat, tag), w in model.feature_weights.items():
        doc["feature_weights"][tag][feat] = w
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, ensure_ascii=False, sort_keys=True)


def load_model(path) -> TaggerModel:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    fw = {
        (feat, tag): w
        for tag, feats in doc["feature_weights"].items()
        for feat, w in feats.items()
    }
    tw = {(p, t): w for p, t, w in doc["transitions"]}
    return TaggerModel(doc["tagset"], fw, tw, doc["averaged"])
