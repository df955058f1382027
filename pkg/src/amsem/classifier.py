"""Document classification: TF-IDF features, multinomial logistic
regression trained with mini-batch SGD, and dummy baselines.

The TF-IDF weighting is fully pinned down so results are reproducible
across implementations: idf(t) = ln((1 + N) / (1 + df(t))) + 1, raw counts
times idf, then L2 normalization per document.  The regression objective is
mean cross-entropy plus (l2/2) * ||W||^2.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import log
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import tokens_of
from .metrics import PRFScore

__all__ = [
    "LabeledDocument",
    "TfidfModel",
    "LinearClassifier",
    "EvalReport",
    "fit_tfidf",
    "transform",
    "transform_corpus",
    "train_logreg",
    "logreg_loss_and_grad",
    "baseline",
    "evaluate",
    "read_documents",
]

BASELINE_STRATEGIES = ("stratified", "uniform", "most_frequent")


@dataclass(frozen=True)
class LabeledDocument:
    tokens: list[str]
    label: str


@dataclass(frozen=True)
class TfidfModel:
    vocab: dict[str, int]  # term -> column, lexicographic
    idf: np.ndarray
    doc_count: int


@dataclass
class LinearClassifier:
    classes: list[str]
    weights: np.ndarray  # |classes| x |vocab|
    bias: np.ndarray

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(_scores(X, self.weights, self.bias))

    def predict(self, X) -> list[str]:
        proba = self.predict_proba(X)
        return [self.classes[i] for i in np.argmax(proba, axis=1)]


def fit_tfidf(docs: Iterable) -> TfidfModel:
    """Learn the vocabulary and idf weights from training documents."""
    df: Counter[str] = Counter()
    n = 0
    for doc in docs:
        n += 1
        df.update(set(tokens_of(doc)))
    if n == 0:
        raise ValueError("cannot fit TF-IDF on an empty document list")
    if not df:
        raise ValueError("cannot fit TF-IDF: all documents are empty")
    terms = sorted(df)
    idf = np.array([log((1 + n) / (1 + df[t])) + 1.0 for t in terms])
    return TfidfModel({t: i for i, t in enumerate(terms)}, idf, n)


def transform(model: TfidfModel, doc) -> sp.csr_matrix:
    """One L2-normalized tf-idf row; unseen terms are ignored.

    A document with no in-vocabulary terms maps to the zero vector.
    """
    counts = Counter(tokens_of(doc))
    cols = []
    vals = []
    for term, c in sorted(counts.items()):
        col = model.vocab.get(term)
        if col is not None:
            cols.append(col)
            vals.append(c * model.idf[col])
    data = np.asarray(vals, dtype=np.float64)
    norm = np.linalg.norm(data)
    if norm > 0:
        data = data / norm
    return sp.csr_matrix(
        (data, (np.zeros(len(cols), dtype=np.intp), np.asarray(cols, dtype=np.intp))),
        shape=(1, len(model.vocab)),
    )


def transform_corpus(model: TfidfModel, docs: Iterable) -> sp.csr_matrix:
    rows = [transform(model, doc) for doc in docs]
    if not rows:
        return sp.csr_matrix((0, len(model.vocab)))
    return sp.vstack(rows, format="csr")


def _scores(X, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.asarray(X @ W.T) + b


def _softmax(S: np.ndarray) -> np.ndarray:
    S = S - S.max(axis=1, keepdims=True)
    e = np.exp(S)
    return e / e.sum(axis=1, keepdims=True)


def logreg_loss_and_grad(W: np.ndarray, b: np.ndarray, X, y_idx: np.ndarray, l2: float):
    """Full-batch objective and exact gradients.

    loss = mean cross-entropy + (l2/2) * ||W||^2 over documents X with class
    indices ``y_idx``.
    """
    n = X.shape[0]
    P = _softmax(_scores(X, W, b))
    loss = float(-np.mean(np.log(P[np.arange(n), y_idx]))) + 0.5 * l2 * float((W**2).sum())
    G = P.copy()
    G[np.arange(n), y_idx] -= 1.0
    G /= n
    grad_W = np.asarray(X.T @ G).T + l2 * W
    grad_b = G.sum(axis=0)
    return loss, grad_W, grad_b


def train_logreg(
    X,
    y: Sequence[str],
    l2: float = 1e-4,
    epochs: int = 100,
    lr: float = 0.5,
    seed: int = 0,
    batch_size: int | None = 32,
) -> LinearClassifier:
    """Mini-batch SGD on the multinomial objective, shuffled per epoch.

    ``batch_size=None`` runs full-batch gradient descent.
    """
    y = list(y)
    if X.shape[0] != len(y):
        raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    classes = sorted(set(y))
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    class_idx = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([class_idx[c] for c in y])
    n, d = X.shape
    W = np.zeros((len(classes), d))
    b = np.zeros(len(classes))
    bs = n if batch_size is None else min(batch_size, n)
    rng = np.random.default_rng(seed & (2**63 - 1))
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            batch = order[start : start + bs]
            Xb = X[batch]
            P = _softmax(_scores(Xb, W, b))
            G = P
            G[np.arange(len(batch)), y_idx[batch]] -= 1.0
            G /= len(batch)
            W -= lr * (np.asarray(Xb.T @ G).T + l2 * W)
            b -= lr * G.sum(axis=0)
    return LinearClassifier(classes, W, b)


def baseline(
    strategy: str, train_labels: Sequence[str], test_size: int, seed: int = 0
) -> list[str]:
    """Label predictions from one of the three dummy strategies.

    ``most_frequent`` is constant (ties lexicographic) and ignores the seed;
    ``stratified`` draws i.i.d. from the empirical training distribution;
    ``uniform`` draws i.i.d. from the distinct label set.
    """
    if strategy not in BASELINE_STRATEGIES:
        raise ValueError(f"unknown baseline strategy {strategy!r}")
    if not train_labels:
        raise ValueError("baseline needs non-empty training labels")
    counts = Counter(train_labels)
    labels = sorted(counts)
    if strategy == "most_frequent":
        majority = min(labels, key=lambda c: (-counts[c], c))
        return [majority] * test_size
    rng = np.random.default_rng(seed & (2**63 - 1))
    if strategy == "stratified":
        total = sum(counts.values())
        p = np.array([counts[c] / total for c in labels])
        draws = rng.choice(len(labels), size=test_size, p=p)
    else:
        draws = rng.choice(len(labels), size=test_size)
    return [labels[i] for i in draws]


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    per_class: dict[str, PRFScore]


def evaluate(
    pred: Sequence[str], gold: Sequence[str], averaging: str = "macro"
) -> EvalReport:
    """Per-class one-vs-rest metrics aggregated over classes present in gold.

    ``macro`` weighs classes equally; ``weighted`` weighs them by support.
    """
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: {len(pred)} predicted vs {len(gold)} gold")
    if averaging not in ("macro", "weighted"):
        raise ValueError(f"unknown averaging {averaging!r}")
    classes = sorted(set(gold))
    per_class = {}
    support = {}
    for cls in classes:
        tp = sum(1 for p, g in zip(pred, gold) if p == cls and g == cls)
        fp = sum(1 for p, g in zip(pred, gold) if p == cls and g != cls)
        fn = sum(1 for p, g in zip(pred, gold) if p != cls and g == cls)
        per_class[cls] = PRFScore.from_counts(tp, fp, fn)
        support[cls] = tp + fn
    if averaging == "macro":
        agg = PRFScore.mean(list(per_class.values()))
    else:
        total = sum(support.values())
        agg = PRFScore(
            sum(per_class[c].precision * support[c] for c in classes) / total,
            sum(per_class[c].recall * support[c] for c in classes) / total,
            sum(per_class[c].f1 * support[c] for c in classes) / total,
        )
    return EvalReport(agg.precision, agg.recall, agg.f1, per_class)


def read_documents(path) -> list[LabeledDocument]:
    """Read a ``label<TAB>text`` TSV, one document per line."""
    docs: list[LabeledDocument] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected label<TAB>text")
            docs.append(LabeledDocument(parts[1].split(), parts[0]))
    return docs
