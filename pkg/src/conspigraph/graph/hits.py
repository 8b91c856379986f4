"""Hub and authority scores by power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forwarding import ForwardingGraph


@dataclass
class HitsScores:
    authority: dict[int, float]
    hub: dict[int, float]
    iterations: int
    converged: bool

    def top(self, k: int, members=None, by: str = "authority") -> list[tuple[int, float]]:
        """Top ``k`` channels by score, ties broken by ascending channel id."""
        scores = self.authority if by == "authority" else self.hub
        items = scores.items() if members is None else ((c, scores[c]) for c in members if c in scores)
        return sorted(items, key=lambda kv: (-kv[1], kv[0]))[:k]


def _unit(x: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(x)
    return x / norm if norm > 0 else x


def hits(graph: ForwardingGraph, tolerance: float = 1e-8, max_iterations: int = 1000) -> HitsScores:
    """A channel is authoritative when strong hubs forward from it.

    Edge ``u -> v`` (u forwarded a message from v) adds u's hub score to v's
    authority.  Iterates ``a = unit(W^T h)``, ``h = unit(W a)`` from a uniform
    start until no coordinate changes by ``tolerance`` or more.
    """
    n = graph.n
    nodes = [int(c) for c in graph.nodes]
    if n == 0 or len(graph.weight) == 0:
        zeros = {c: 0.0 for c in nodes}
        return HitsScores(zeros, dict(zeros), 0, True)
    w = graph.adjacency()
    wt = w.T.tocsr()
    h = np.full(n, 1.0 / np.sqrt(n))
    a = h.copy()
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        a_new = _unit(wt @ h)
        h_new = _unit(w @ a_new)
        delta = max(np.abs(a_new - a).max(), np.abs(h_new - h).max())
        a, h = a_new, h_new
        if delta < tolerance:
            converged = True
            break
    return HitsScores(
        {c: float(x) for c, x in zip(nodes, a)},
        {c: float(x) for c, x in zip(nodes, h)},
        it,
        converged,
    )
