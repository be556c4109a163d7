"""Tree-structured dependency model over skill co-occurrence.

Each vocabulary token becomes a binary presence indicator (does the skill
occur in a given tutorial).  Pairwise mutual information weights every
candidate edge and a greedy spanning pass keeps the edge set of greatest
total weight, which yields the maximum-weight spanning tree.  The tree is
then oriented from a root to act as a directed acyclic dependency graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..ingest.extraction import Corpus
from .base import ChainingBackend, EmptyCorpus, PredictionResult, UnknownToken
from .info import mutual_information


class SingletonVocabulary(ValueError):
    """Structure learning needs at least two distinct tokens."""


@dataclass(frozen=True)
class ChowLiuTree:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    root: str
    parents: dict[str, str]  # child -> parent, root absent
    # P(child present | parent absent/present), Laplace-smoothed, and the
    # root's marginal presence probability; used only for prediction.
    edge_cpts: dict[str, tuple[float, float]]
    root_marginal: float

    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)


def _presence_table(corpus: Corpus, a: str, b: str) -> list[list[int]]:
    table = [[0, 0], [0, 0]]
    for seq in corpus.sequences:
        toks = set(seq.tokens)
        table[int(a in toks)][int(b in toks)] += 1
    return table


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def fit_chow_liu(corpus: Corpus, root: Optional[str] = None) -> ChowLiuTree:
    """Learn the maximum-weight spanning tree over presence indicators.

    Greedy edge addition in descending weight order, with deterministic
    ties (lower vocabulary indices first).  The root defaults to the
    ``start`` sentinel when present, else the node of maximum degree with
    ties broken by vocabulary order.
    """
    if not corpus.sequences:
        raise EmptyCorpus("cannot learn structure from an empty corpus")
    vocab = tuple(sorted(corpus.vocabulary))
    if len(vocab) < 2:
        raise SingletonVocabulary("need at least two tokens to span a tree")

    weights: dict[tuple[int, int], float] = {}
    for i in range(len(vocab)):
        for j in range(i + 1, len(vocab)):
            weights[(i, j)] = mutual_information(_presence_table(corpus, vocab[i], vocab[j]))

    candidates = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    uf = _UnionFind(len(vocab))
    chosen: list[tuple[int, int, float]] = []
    for (i, j), w in candidates:
        if uf.union(i, j):
            chosen.append((i, j, w))
        if len(chosen) == len(vocab) - 1:
            break

    adjacency: dict[str, list[str]] = {t: [] for t in vocab}
    for i, j, _ in chosen:
        adjacency[vocab[i]].append(vocab[j])
        adjacency[vocab[j]].append(vocab[i])

    if root is None:
        if "start" in vocab:
            root = "start"
        else:
            root = max(vocab, key=lambda t: (len(adjacency[t]), -vocab.index(t)))
    elif root not in vocab:
        raise UnknownToken(root)

    parents: dict[str, str] = {}
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for node in frontier:
            for nb in sorted(adjacency[node]):
                if nb not in seen:
                    parents[nb] = node
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt

    n = len(corpus.sequences)
    edge_cpts: dict[str, tuple[float, float]] = {}
    for child, parent in parents.items():
        both = absent_parent = parent_only = child_only = 0
        for seq in corpus.sequences:
            toks = set(seq.tokens)
            p, c = parent in toks, child in toks
            both += p and c
            parent_only += p and not c
            child_only += c and not p
            absent_parent += not p and not c
        p1_given_0 = (child_only + 1) / (child_only + absent_parent + 2)
        p1_given_1 = (both + 1) / (both + parent_only + 2)
        edge_cpts[child] = (p1_given_0, p1_given_1)
    root_present = sum(root in set(seq.tokens) for seq in corpus.sequences)
    root_marginal = (root_present + 1) / (n + 2)

    edges = tuple((vocab[i], vocab[j], w) for i, j, w in chosen)
    return ChowLiuTree(
        nodes=vocab,
        edges=edges,
        root=root,
        parents=parents,
        edge_cpts=edge_cpts,
        root_marginal=root_marginal,
    )


class ChowLiuBackend:
    """Next-action prediction along the oriented dependency tree.

    Scores the current token's children by their smoothed conditional
    presence probability; a leaf falls back to uniform over the nodes.
    This is a structural heuristic: the tree models co-occurrence, not
    order, so positional accuracy is left to the transition model.
    """

    def __init__(self, tree: ChowLiuTree, name: str = "chow_liu"):
        self.tree = tree
        self.name = name

    def predict_next(self, history: Sequence[str]) -> PredictionResult:
        if not history:
            raise ValueError("history must be non-empty")
        last = history[-1]
        if last not in self.tree.nodes:
            raise UnknownToken(last)
        children = sorted(c for c, p in self.tree.parents.items() if p == last)
        if not children:
            return PredictionResult.from_scores(self.tree.nodes, {})
        scores = {c: self.tree.edge_cpts[c][1] for c in children}
        return PredictionResult.from_scores(self.tree.nodes, scores)
