"""Node embeddings over the thesaurus similarity graph.

The thesaurus turns into an undirected weighted graph (words as nodes,
top-k neighbor overlaps as edge weights), and two random-walk methods embed
its nodes by reusing the skip-gram trainer over walk corpora:

* DeepWalk trains directly on truncated random walks, so embeddings reflect
  neighborhood and community structure.
* Role2Vec first replaces every node in a walk by a structural role id
  (by default the log2-binned degree) and trains over the role sequences;
  nodes sharing a role share one embedding vector exactly.

Walks are seeded per (seed, node, walk index), so walk generation can be
parallelized without changing its output.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .corpus import Vocabulary
from .embeddings import EmbedConfig, EmbeddingModel, train
from .thesaurus import ThesaurusModel

__all__ = [
    "WeightedGraph",
    "WalkConfig",
    "RoleConfig",
    "dt_to_graph",
    "random_walks",
    "deepwalk",
    "role2vec",
    "save_graph",
    "load_graph",
    "ROLE_ATTRIBUTES",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge weights.

    Adjacency lists are sorted by neighbor id and symmetric; self-loops are
    rejected.  Degree-0 nodes are legitimate members of the node set.
    """

    nodes: list[str]
    adjacency: list[list[tuple[int, float]]]

    def __post_init__(self) -> None:
        seen: dict[tuple[int, int], float] = {}
        for u, nbrs in enumerate(self.adjacency):
            last = -1
            for v, w in nbrs:
                if v == u:
                    raise ValueError(f"self-loop at node {self.nodes[u]!r}")
                if w <= 0:
                    raise ValueError(f"non-positive weight on edge {u}-{v}")
                if v <= last:
                    raise ValueError(f"adjacency of node {u} is not sorted by id")
                last = v
                seen[(u, v)] = w
        for (u, v), w in seen.items():
            if seen.get((v, u)) != w:
                raise ValueError(f"asymmetric edge {self.nodes[u]!r}-{self.nodes[v]!r}")

    def __len__(self) -> int:
        return len(self.nodes)

    def degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def node_id(self, label: str) -> int:
        try:
            return self.nodes.index(label)
        except ValueError:
            raise KeyError(f"node not in graph: {label!r}") from None

    @classmethod
    def from_edges(cls, nodes: list[str], edges: dict[tuple[int, int], float]) -> "WeightedGraph":
        """Build from undirected edges keyed by unordered id pairs."""
        adj: list[dict[int, float]] = [dict() for _ in nodes]
        for (u, v), w in edges.items():
            adj[u][v] = max(adj[u].get(v, 0.0), w)
            adj[v][u] = max(adj[v].get(u, 0.0), w)
        return cls(nodes, [sorted(d.items()) for d in adj])


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 5
    dim: int = 128
    epochs: int = 5
    negatives: int = 5
    initial_lr: float = 0.025
    seed: int = 1
    weighted_transitions: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.walk_length < 1 or self.walks_per_node < 1:
            raise ValueError("walk_length and walks_per_node must be >= 1")


def _log2_degree_bin(graph: WeightedGraph, node_id: int) -> int:
    return int(math.floor(math.log2(graph.degree(node_id) + 1)))


ROLE_ATTRIBUTES: dict[str, Callable[[WeightedGraph, int], int]] = {
    "log2_degree_bin": _log2_degree_bin,
}


@dataclass(frozen=True)
class RoleConfig:
    attribute: str = "log2_degree_bin"

    def __post_init__(self) -> None:
        if self.attribute not in ROLE_ATTRIBUTES:
            raise ValueError(f"unknown role attribute {self.attribute!r}")


def dt_to_graph(model: ThesaurusModel, top_k: int = 20) -> WeightedGraph:
    """Thesaurus words become nodes; each word links to its top-k neighbors.

    Edge weight is the overlap count, symmetrized by maximum.  Words with no
    neighbors stay in the graph as isolated nodes.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    nodes = sorted(model.neighbors)
    if not nodes:
        raise ValueError("cannot build a graph from an empty thesaurus")
    ids = {w: i for i, w in enumerate(nodes)}
    edges: dict[tuple[int, int], float] = {}
    for word, ranked in model.neighbors.items():
        u = ids[word]
        for nbr, overlap in ranked[:top_k]:
            v = ids[nbr]
            key = (min(u, v), max(u, v))
            edges[key] = max(edges.get(key, 0.0), float(overlap))
    return WeightedGraph.from_edges(nodes, edges)


def _walk_rng(seed: int, node_id: int, walk_index: int) -> np.random.Generator:
    # stable across processes and platforms, unlike hash()
    digest = hashlib.sha256(f"{seed}:{node_id}:{walk_index}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def random_walks(graph: WeightedGraph, cfg: WalkConfig) -> list[list[str]]:
    """``walks_per_node`` truncated random walks from every node.

    Transitions are uniform over neighbors, or weight-proportional with
    ``weighted_transitions``.  A walk stops early only at a node with no
    neighbors, so isolated nodes yield single-node walks.
    """
    if len(graph) == 0:
        raise ValueError("cannot walk an empty graph")
    walks: list[list[str]] = []
    cumulative = None
    if cfg.weighted_transitions:
        cumulative = []
        for nbrs in graph.adjacency:
            if nbrs:
                w = np.asarray([x for _, x in nbrs], dtype=np.float64)
                c = np.cumsum(w / w.sum())
                c[-1] = 1.0
                cumulative.append(c)
            else:
                cumulative.append(None)
    for node_id in range(len(graph)):
        for wi in range(cfg.walks_per_node):
            rng = _walk_rng(cfg.seed, node_id, wi)
            walk = [node_id]
            while len(walk) < cfg.walk_length:
                nbrs = graph.adjacency[walk[-1]]
                if not nbrs:
                    break
                if cfg.weighted_transitions:
                    pick = int(np.searchsorted(cumulative[walk[-1]], rng.random(), side="right"))
                else:
                    pick = int(rng.integers(len(nbrs)))
                walk.append(nbrs[pick][0])
            walks.append([graph.nodes[i] for i in walk])
    return walks


def _walk_embed_config(cfg: WalkConfig) -> EmbedConfig:
    # Subsampling is disabled: every node is frequent in a walk corpus, and
    # the default threshold would gut small graphs.
    return EmbedConfig(
        dim=cfg.dim,
        window=cfg.window,
        negatives=cfg.negatives,
        epochs=cfg.epochs,
        initial_lr=cfg.initial_lr,
        min_count=1,
        mode="skipgram",
        subsample_t=0.0,
        seed=cfg.seed,
        workers=cfg.workers,
    )


def deepwalk(graph: WeightedGraph, cfg: WalkConfig | None = None) -> EmbeddingModel:
    """Skip-gram embeddings over random walks; vocabulary equals the node set."""
    cfg = cfg or WalkConfig()
    walks = random_walks(graph, cfg)
    return train(walks, _walk_embed_config(cfg))


def role2vec(
    graph: WeightedGraph,
    walk_cfg: WalkConfig | None = None,
    role_cfg: RoleConfig | None = None,
) -> EmbeddingModel:
    """Attributed-walk embeddings: nodes are embedded through their roles.

    Every walk is rewritten into the sequence of role ids before skip-gram
    training, and each node receives its role's vector, so structurally
    equivalent nodes get bit-identical embeddings.
    """
    walk_cfg = walk_cfg or WalkConfig()
    role_cfg = role_cfg or RoleConfig()
    attribute = ROLE_ATTRIBUTES[role_cfg.attribute]
    roles = [attribute(graph, i) for i in range(len(graph))]
    role_label = {graph.nodes[i]: f"role-{roles[i]}" for i in range(len(graph))}

    walks = random_walks(graph, walk_cfg)
    role_walks = [[role_label[node] for node in walk] for walk in walks]
    role_model = train(role_walks, _walk_embed_config(walk_cfg))

    rows = np.stack(
        [role_model.input_vectors[role_model.vocab.word_to_id[role_label[n]]] for n in graph.nodes]
    )
    vocab = Vocabulary(
        word_to_id={n: i for i, n in enumerate(graph.nodes)},
        id_to_word=list(graph.nodes),
        counts=[1] * len(graph),
        total_tokens=len(graph),
    )
    return EmbeddingModel(vocab, rows, _walk_embed_config(walk_cfg))


def save_graph(graph: WeightedGraph, path) -> None:
    """Edge-list TSV ``node<TAB>node<TAB>weight``, each edge once (u <= v by
    label); isolated nodes appear as single-field lines."""
    with open(path, "w", encoding="utf-8") as f:
        for u, label in enumerate(graph.nodes):
            if not graph.adjacency[u]:
                f.write(f"{label}\n")
        for u, label in enumerate(graph.nodes):
            for v, w in graph.adjacency[u]:
                if graph.nodes[u] <= graph.nodes[v]:
                    value = int(w) if float(w).is_integer() else w
                    f.write(f"{label}\t{graph.nodes[v]}\t{value}\n")


def load_graph(path) -> WeightedGraph:
    labels: dict[str, None] = {}
    raw_edges: list[tuple[str, str, float]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                labels.setdefault(parts[0])
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected node<TAB>node<TAB>weight")
            u, v, w = parts[0], parts[1], float(parts[2])
            labels.setdefault(u)
            labels.setdefault(v)
            raw_edges.append((u, v, w))
    nodes = sorted(labels)
    ids = {n: i for i, n in enumerate(nodes)}
    edges: dict[tuple[int, int], float] = {}
    for u, v, w in raw_edges:
        key = (min(ids[u], ids[v]), max(ids[u], ids[v]))
        edges[key] = max(edges.get(key, 0.0), w)
    return WeightedGraph.from_edges(nodes, edges)
