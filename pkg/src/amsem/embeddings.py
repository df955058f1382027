"""Static word embeddings: skip-gram and CBOW with negative sampling,
optional hashed character n-gram (subword) vectors, and vector queries.

The trainer optimizes, per (center, context) pair, the contrastive
objective

    loss = softplus(-u_pos . v) + sum_n softplus(u_n . v)

where v is the input representation (for skip-gram the center word, for
CBOW the mean of the context words' representations), u_pos the output row
of the positive word, and each u_n the output row of a negative drawn from
the unigram distribution raised to 0.75.  Frequent words are subsampled;
the learning rate decays linearly per processed token down to 1e-4 of its
initial value.

With subword vectors enabled, a word's input representation is the sum of
its word vector and the vectors of its character n-grams (the word padded
with ``<`` and ``>``), each n-gram hashed with 32-bit FNV-1a into a fixed
number of buckets.

Single-worker training is bit-deterministic under a fixed seed.  With
``workers > 1`` the trainer runs hogwild-style: threads apply unsynchronized
sparse updates to the shared matrices, races are tolerated, and no
determinism is promised.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np
from scipy.special import expit

from .corpus import Vocabulary, build_vocab, tokens_of

__all__ = [
    "SubwordConfig",
    "EmbedConfig",
    "EmbeddingModel",
    "ParseError",
    "NegativeSampler",
    "train",
    "init_model",
    "corpus_loss",
    "vector",
    "nearest",
    "all_vectors",
    "save",
    "load",
    "char_ngrams",
    "ngram_bucket_ids",
    "fnv1a_32",
    "pair_loss_and_grad",
    "cbow_loss_and_grad",
    "preset",
]

NS_EXPONENT = 0.75
LR_FLOOR_FACTOR = 1e-4


@dataclass(frozen=True)
class SubwordConfig:
    ngram_len: int = 5
    bucket_count: int = 2_000_000


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 5
    mode: str = "cbow"  # or "skipgram"
    subword: SubwordConfig | None = None
    subsample_t: float = 1e-3  # <= 0 disables subsampling
    seed: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1 or self.negatives < 1 or self.window < 1:
            raise ValueError("dim, negatives, and window must all be >= 1")
        if self.mode not in ("skipgram", "cbow"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.epochs < 1 or self.workers < 1:
            raise ValueError("epochs and workers must be >= 1")


def preset(name: str, **overrides) -> EmbedConfig:
    """Named hyperparameter bundles for the two embedding flavors."""
    if name == "word2vec":
        cfg = EmbedConfig()
    elif name == "fasttext":
        cfg = EmbedConfig(dim=300, window=5, negatives=10, mode="cbow",
                          subword=SubwordConfig(ngram_len=5))
    else:
        raise ValueError(f"unknown preset {name!r}")
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class EmbeddingModel:
    vocab: Vocabulary
    input_vectors: np.ndarray  # |V| x dim
    config: EmbedConfig
    ngram_vectors: np.ndarray | None = None  # bucket_count x dim
    output_vectors: np.ndarray | None = None  # kept during training only
    epoch_losses: list[float] = field(default_factory=list)


class ParseError(ValueError):
    """Malformed embedding file; message carries the offending line number."""


# ---------------------------------------------------------------------------
# subword machinery


def fnv1a_32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def char_ngrams(word: str, n: int) -> list[str]:
    """Character n-grams of exact length n over the boundary-padded word."""
    padded = f"<{word}>"
    return [padded[i : i + n] for i in range(len(padded) - n + 1)]


def ngram_bucket_ids(word: str, sub: SubwordConfig) -> list[int]:
    return [
        fnv1a_32(g.encode("utf-8")) % sub.bucket_count
        for g in char_ngrams(word, sub.ngram_len)
    ]


# ---------------------------------------------------------------------------
# objective and gradients


def pair_loss_and_grad(v: np.ndarray, U: np.ndarray, labels: np.ndarray):
    """Loss and exact gradients of the negative-sampling objective.

    ``v`` is the input representation, ``U`` the stacked output rows
    (positive first by convention), ``labels`` their 0/1 targets.  Returns
    (loss, dloss/dv, dloss/dU).
    """
    s = U @ v
    loss = float(np.sum(np.logaddexp(0.0, np.where(labels == 1, -s, s))))
    g = expit(s) - labels
    return loss, g @ U, np.outer(g, v)


def cbow_loss_and_grad(R: np.ndarray, U: np.ndarray, labels: np.ndarray):
    """Same objective with the input representation = mean of rows of R.

    Returns (loss, dloss/dR, dloss/dU); the gradient w.r.t. each context row
    is the mean-vector gradient divided by the row count.
    """
    h = R.mean(axis=0)
    loss, grad_h, grad_U = pair_loss_and_grad(h, U, labels)
    grad_R = np.repeat(grad_h[None, :] / len(R), len(R), axis=0)
    return loss, grad_R, grad_U


class NegativeSampler:
    """Draw word ids from the unigram distribution raised to 0.75."""

    def __init__(self, counts, power: float = NS_EXPONENT):
        w = np.asarray(counts, dtype=np.float64) ** power
        total = w.sum()
        if total <= 0:
            raise ValueError("sampler needs at least one positive count")
        self.cumulative = np.cumsum(w / total)
        self.cumulative[-1] = 1.0

    def draw(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return np.searchsorted(self.cumulative, rng.random(k), side="right")


# ---------------------------------------------------------------------------
# training


def _keep_probabilities(vocab: Vocabulary, t: float) -> np.ndarray:
    """Per-id probability of surviving frequent-word subsampling.

    Words at or below the threshold frequency always survive.
    """
    keep = np.ones(len(vocab), dtype=np.float64)
    if t <= 0 or len(vocab) == 0:
        return keep
    train_words = sum(vocab.counts)
    f = np.asarray(vocab.counts, dtype=np.float64) / train_words
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (np.sqrt(f / t) + 1.0) * (t / f)
    return np.minimum(keep, raw)


class _TrainState:
    """Matrices plus everything derived from the vocabulary."""

    def __init__(self, model: EmbeddingModel):
        self.model = model
        cfg = model.config
        self.keep = _keep_probabilities(model.vocab, cfg.subsample_t)
        self.sampler = NegativeSampler(model.vocab.counts)
        if cfg.subword is not None:
            self.word_ngrams = [
                np.asarray(ngram_bucket_ids(w, cfg.subword), dtype=np.intp)
                for w in model.vocab.id_to_word
            ]
        else:
            self.word_ngrams = None

    def repr_of(self, wid: int) -> np.ndarray:
        v = self.model.input_vectors[wid].copy()
        if self.word_ngrams is not None:
            ids = self.word_ngrams[wid]
            if len(ids):
                v += self.model.ngram_vectors[ids].sum(axis=0)
        return v


def init_model(corpus_stream: Iterable, cfg: EmbedConfig) -> EmbeddingModel:
    """Build the vocabulary and seed the weight matrices, before any update.

    Fails when the corpus has no sentence with at least two in-vocabulary
    tokens, since such a corpus yields no training pair.
    """
    return _init_from_sentences([tokens_of(s) for s in corpus_stream], cfg)


def _init_from_sentences(sentences: list[list[str]], cfg: EmbedConfig) -> EmbeddingModel:
    vocab = build_vocab(sentences, cfg.min_count)
    if len(vocab) == 0:
        raise ValueError("degenerate corpus: vocabulary is empty after min_count filtering")
    if not any(sum(w in vocab for w in s) >= 2 for s in sentences):
        raise ValueError("degenerate corpus: no sentence has two in-vocabulary tokens")
    rng = np.random.default_rng(cfg.seed & (2**63 - 1))
    inputs = (rng.random((len(vocab), cfg.dim)) - 0.5) / cfg.dim
    ngrams = None
    if cfg.subword is not None:
        ngrams = (rng.random((cfg.subword.bucket_count, cfg.dim)) - 0.5) / cfg.dim
    outputs = np.zeros((len(vocab), cfg.dim))
    return EmbeddingModel(vocab, inputs, cfg, ngrams, outputs)


def _sentence_ids(sentences, vocab: Vocabulary) -> list[list[int]]:
    w2i = vocab.word_to_id
    out = []
    for s in sentences:
        ids = [w2i[w] for w in s if w in w2i]
        if ids:
            out.append(ids)
    return out


def _epoch_pairs(
    sent_ids: list[list[int]],
    state: _TrainState,
    cfg: EmbedConfig,
    rng: np.random.Generator,
    counter: list[int],
    planned: int,
) -> Iterator[tuple]:
    """One epoch of training pairs: (alpha, center_id, context, negatives).

    ``context`` is an id for skip-gram and an id list for CBOW.  The learning
    rate decays with the raw in-vocabulary token count, subsampled tokens
    included; negatives colliding with the positive word are dropped.
    """
    lr_floor = cfg.initial_lr * LR_FLOOR_FACTOR
    keep = state.keep
    for ids in sent_ids:
        before = counter[0]
        counter[0] += len(ids)
        kept: list[tuple[int, int]] = []
        for r, wid in enumerate(ids):
            if keep[wid] >= 1.0 or rng.random() < keep[wid]:
                kept.append((wid, r))
        for j, (wid, r) in enumerate(kept):
            alpha = max(lr_floor, cfg.initial_lr * (1.0 - (before + r) / planned))
            lo = max(0, j - cfg.window)
            hi = min(len(kept), j + cfg.window + 1)
            if cfg.mode == "skipgram":
                for jj in range(lo, hi):
                    if jj == j:
                        continue
                    ctx = kept[jj][0]
                    negs = state.sampler.draw(rng, cfg.negatives)
                    yield alpha, wid, ctx, negs[negs != ctx]
            else:
                ctx = [kept[jj][0] for jj in range(lo, hi) if jj != j]
                if not ctx:
                    continue
                negs = state.sampler.draw(rng, cfg.negatives)
                yield alpha, wid, ctx, negs[negs != wid]


def _apply_sg(state: _TrainState, alpha, center, ctx, negs) -> float:
    model = state.model
    idx = np.concatenate(([ctx], negs))
    labels = np.zeros(len(idx))
    labels[0] = 1.0
    v = state.repr_of(center)
    U = model.output_vectors[idx]
    loss, grad_v, grad_U = pair_loss_and_grad(v, U, labels)
    np.add.at(model.output_vectors, idx, -alpha * grad_U)
    delta = -alpha * grad_v
    model.input_vectors[center] += delta
    if state.word_ngrams is not None:
        ids = state.word_ngrams[center]
        if len(ids):
            np.add.at(model.ngram_vectors, ids, delta)
    return loss

def _apply_cbow(state: _TrainState, alpha, center, ctx, negs) -> float:
    model = state.model
    idx = np.concatenate(([center], negs))
    labels = np.zeros(len(idx))
    labels[0] = 1.0
    R = np.stack([state.repr_of(c) for c in ctx])
    U = model.output_vectors[idx]
    loss, grad_R, grad_U = cbow_loss_and_grad(R, U, labels)
    np.add.at(model.output_vectors, idx, -alpha * grad_U)
    delta = -alpha * grad_R[0]  # identical across context rows
    np.add.at(model.input_vectors, np.asarray(ctx, dtype=np.intp), delta)
    if state.word_ngrams is not None:
        for c in ctx:
            ids = state.word_ngrams[c]
            if len(ids):
                np.add.at(model.ngram_vectors, ids, delta)
    return loss


def train(corpus_stream: Iterable, cfg: EmbedConfig | None = None) -> EmbeddingModel:
    """Train an embedding model over a re-iterable corpus stream.

    The stream is materialized, so it must fit in memory.  Mean per-pair
    loss of each epoch (measured before each update) lands in
    ``model.epoch_losses`` for single-worker runs.
    """
    cfg = cfg or EmbedConfig()
    sentences = [tokens_of(s) for s in corpus_stream]
    model = _init_from_sentences(sentences, cfg)
    sent_ids = _sentence_ids(sentences, model.vocab)
    state = _TrainState(model)
    planned = cfg.epochs * sum(len(ids) for ids in sent_ids)
    apply_pair = _apply_sg if cfg.mode == "skipgram" else _apply_cbow

    if cfg.workers == 1:
        rng = np.random.default_rng((cfg.seed & (2**63 - 1)) + 1)
        counter = [0]
        for _ in range(cfg.epochs):
            total, pairs = 0.0, 0
            for alpha, center, ctx, negs in _epoch_pairs(
                sent_ids, state, cfg, rng, counter, planned
            ):
                total += apply_pair(state, alpha, center, ctx, negs)
                pairs += 1
            model.epoch_losses.append(total / pairs if pairs else 0.0)
    else:
        _train_hogwild(state, sent_ids, cfg, planned, apply_pair)
    return model


def _train_hogwild(state, sent_ids, cfg, planned, apply_pair) -> None:
    counter = [0]  # shared, unsynchronized by design

    def work(worker: int) -> None:
        shard = sent_ids[worker :: cfg.workers]
        rng = np.random.default_rng([(cfg.seed & (2**63 - 1)) + 1, worker])
        for _ in range(cfg.epochs):
            for pair in _epoch_pairs(shard, state, cfg, rng, counter, planned):
                apply_pair(state, *pair)

    threads = [threading.Thread(target=work, args=(w,)) for w in range(cfg.workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


def corpus_loss(model: EmbeddingModel, corpus_stream: Iterable, seed: int = 0) -> float:
    """Mean per-pair objective over one pass of the corpus, without updates.

    Subsampling and negative draws come from a generator seeded here, so two
    calls with the same seed score exactly the same pair set.
    """
    if model.output_vectors is None:
        raise ValueError("corpus_loss needs a model that kept its output vectors")
    cfg = model.config
    sent_ids = _sentence_ids([tokens_of(s) for s in corpus_stream], model.vocab)
    state = _TrainState(model)
    rng = np.random.default_rng(seed & (2**63 - 1))
    total, pairs = 0.0, 0
    planned = max(1, sum(len(ids) for ids in sent_ids))
    for _, center, ctx, negs in _epoch_pairs(sent_ids, state, cfg, rng, [0], planned):
        if cfg.mode == "skipgram":
            idx = np.concatenate(([ctx], negs))
            v = state.repr_of(center)
        else:
            idx = np.concatenate(([center], negs))
            v = np.stack([state.repr_of(c) for c in ctx]).mean(axis=0)
        labels = np.zeros(len(idx))
        labels[0] = 1.0
        loss, _, _ = pair_loss_and_grad(v, model.output_vectors[idx], labels)
        total += loss
        pairs += 1
    return total / pairs if pairs else 0.0


# ---------------------------------------------------------------------------
# queries and persistence


def vector(model: EmbeddingModel, word: str) -> np.ndarray:
    """The input representation of ``word``.

    For subword models this is the word vector plus its n-gram vectors;
    out-of-vocabulary words resolve to the n-gram sum alone (a zero vector
    when the word is shorter than the n-gram length).  Without subword
    vectors, out-of-vocabulary words raise KeyError.
    """
    wid = model.vocab.word_to_id.get(word)
    sub = model.config.subword
    if sub is None or model.ngram_vectors is None:
        if wid is None:
            raise KeyError(f"word not in embedding vocabulary: {word!r}")
        return model.input_vectors[wid].copy()
    v = (
        np.zeros(model.config.dim)
        if wid is None
        else model.input_vectors[wid].copy()
    )
    ids = ngram_bucket_ids(word, sub)
    if ids:
        v += model.ngram_vectors[np.asarray(ids, dtype=np.intp)].sum(axis=0)
    return v


def all_vectors(model: EmbeddingModel) -> np.ndarray:
    """Input representations of every vocabulary word, stacked by id."""
    if model.config.subword is None or model.ngram_vectors is None:
        return model.input_vectors
    return np.stack([vector(model, w) for w in model.vocab.id_to_word])


def nearest(model: EmbeddingModel, word: str, k: int) -> list[tuple[str, float]]:
    """Top-k vocabulary words by cosine similarity, query excluded."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = vector(model, word)
    qn = np.linalg.norm(q)
    M = all_vectors(model)
    norms = np.linalg.norm(M, axis=1)
    denom = norms * qn
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(denom > 0, M @ q / denom, 0.0)
    order = sorted(
        (i for i in range(len(M)) if model.vocab.id_to_word[i] != word),
        key=lambda i: (-cos[i], model.vocab.id_to_word[i]),
    )
    return [(model.vocab.id_to_word[i], float(cos[i])) for i in order[:k]]


def save(model: EmbeddingModel, path) -> None:
    """Write the word2vec text format: ``<V> <dim>`` then one word per line.

    Vectors are the composed input representations, serialized with shortest
    round-tripping decimals, so save/load is lossless.
    """
    M = all_vectors(model)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(model.vocab)} {model.config.dim}\n")
        for wid, word in enumerate(model.vocab.id_to_word):
            f.write(word + " " + " ".join(repr(float(x)) for x in M[wid]) + "\n")


def load(path) -> EmbeddingModel:
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if not header.strip():
            raise ParseError(f"{path}:1: empty or missing header")
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:1: header must be '<vocab_size> <dim>'")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:1: non-integer header fields") from None
        if count < 0 or dim < 1:
            raise ParseError(f"{path}:1: invalid header values {count} {dim}")
        words: list[str] = []
        rows: list[np.ndarray] = []
        for lineno, line in enumerate(f, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) != dim + 1:
                raise ParseError(
                    f"{path}:{lineno}: expected 1 word + {dim} values, got {len(fields)} fields"
                )
            try:
                rows.append(np.array([float(x) for x in fields[1:]]))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric vector component") from None
            words.append(fields[0])
        if len(words) != count:
            raise ParseError(f"{path}: header declares {count} rows, found {len(words)}")
        if not words:
            raise ParseError(f"{path}: no vectors")
    vocab = Vocabulary(
        word_to_id={w: i for i, w in enumerate(words)},
        id_to_word=words,
        counts=[1] * len(words),
        total_tokens=len(words),
    )
    return EmbeddingModel(vocab, np.stack(rows), EmbedConfig(dim=dim, min_count=1))
