"""Directed channel forwarding graph."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class ForwardingGraph:
    """Edge ``u -> v`` with weight = number of messages in ``u`` forwarded from ``v``.

    ``nodes`` holds channel ids in ascending order; edge arrays use positions
    into ``nodes``.
    """

    nodes: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    dropped_external_forwards: int = 0
    self_forwards: int = 0
    _index: dict | None = field(default=None, repr=False)
    _undirected: sp.csr_matrix | None = field(default=None, repr=False)

    @classmethod
    def from_edges(cls, nodes, edges, **kw) -> "ForwardingGraph":
        """Build from channel ids and ``(u, v, w)`` triples in channel-id space."""
        nodes = np.array(sorted(set(int(n) for n in nodes)), dtype=np.int64)
        index = {int(c): i for i, c in enumerate(nodes)}
        agg: Counter = Counter()
        for u, v, w in edges:
            if u == v:
                continue
            agg[(index[int(u)], index[int(v)])] += w
        keys = sorted(agg)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        weight = np.array([agg[k] for k in keys], dtype=np.float64)
        g = cls(nodes, src, dst, weight, **kw)
        g._index = index
        return g

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def index(self) -> dict[int, int]:
        if self._index is None:
            self._index = {int(c): i for i, c in enumerate(self.nodes)}
        return self._index

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def adjacency(self) -> sp.csr_matrix:
        """Directed weight matrix W with W[u, v] = weight of ``u -> v``."""
        return sp.csr_matrix((self.weight, (self.src, self.dst)), shape=(self.n, self.n))

    def undirected(self) -> sp.csr_matrix:
        """Symmetric projection A with A[i, j] = w(i->j) + w(j->i)."""
        if self._undirected is None:
            w = self.adjacency()
            self._undirected = (w + w.T).tocsr()
            self._undirected.sort_indices()
        return self._undirected

    def binary(self) -> "ForwardingGraph":
        return ForwardingGraph(self.nodes, self.src, self.dst, np.ones_like(self.weight),
                               self.dropped_external_forwards, self.self_forwards)

    def edges(self):
        for s, d, w in zip(self.src, self.dst, self.weight):
            yield int(self.nodes[s]), int(self.nodes[d]), float(w)

    def relabel(self, mapping: dict[int, int]) -> "ForwardingGraph":
        """Same graph with channel ids renamed through ``mapping``."""
        return ForwardingGraph.from_edges(
            [mapping[int(c)] for c in self.nodes],
            [(mapping[u], mapping[v], w) for u, v, w in self.edges()],
        )


def build_graph(corpus, binary: bool = False) -> ForwardingGraph:
    """Forwarding graph over every channel of ``corpus``.

    Forwards from channels absent from the corpus are counted in
    ``dropped_external_forwards``; self-forwards in ``self_forwards``.
    """
    nodes = sorted(ch.channel_id for ch in corpus)
    index = {c: i for i, c in enumerate(nodes)}
    counts: Counter = Counter()
    dropped = selfs = 0
    for ch in corpus:
        u = index[ch.channel_id]
        for msg in ch.messages:
            v = msg.forwarded_from
            if v is None:
                continue
            if v == ch.channel_id:
                selfs += 1
                continue
            j = index.get(v)
            if j is None:
                dropped += 1
                continue
            counts[(u, j)] += 1
    keys = sorted(counts)
    src = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    dst = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    if binary:
        weight = np.ones(len(keys), dtype=np.float64)
    else:
        weight = np.fromiter((counts[k] for k in keys), dtype=np.float64, count=len(keys))
    g = ForwardingGraph(np.array(nodes, dtype=np.int64), src, dst, weight, dropped, selfs)
    g._index = index
    return g


def write_edges(graph: ForwardingGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for u, v, wt in graph.edges():
            w.writerow([u, v, int(wt) if wt == int(wt) else wt])


def save_graph(graph: ForwardingGraph, path) -> None:
    """Compact binary form (``.npz``)."""
    np.savez_compressed(
        path, nodes=graph.nodes, src=graph.src, dst=graph.dst, weight=graph.weight,
        meta=np.array([graph.dropped_external_forwards, graph.self_forwards], dtype=np.int64),
    )


def load_graph(path) -> ForwardingGraph:
    with np.load(path) as z:
        dropped, selfs = (int(x) for x in z["meta"])
        return ForwardingGraph(z["nodes"], z["src"], z["dst"], z["weight"], dropped, selfs)
