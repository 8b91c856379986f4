"""Newman-Girvan modularity on the undirected weighted projection."""

from __future__ import annotations

import numpy as np

from .forwarding import ForwardingGraph


def membership_array(graph: ForwardingGraph, assignment) -> np.ndarray:
    """Community label per node position.  ``assignment`` maps channel id -> label
    or is already an array aligned with ``graph.nodes``."""
    if isinstance(assignment, dict):
        try:
            return np.array([assignment[int(c)] for c in graph.nodes], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"assignment does not cover node {exc.args[0]}") from None
    arr = np.asarray(assignment, dtype=np.int64)
    if arr.shape != (graph.n,):
        raise ValueError("assignment length does not match node count")
    return arr


def modularity_from_csr(a, membership: np.ndarray, resolution: float = 1.0) -> float:
    """Q = (1/2m) * sum_ij [A_ij - resolution * k_i k_j / 2m] * delta(c_i, c_j)."""
    a = a.tocsr()
    two_m = float(a.data.sum())
    if two_m == 0:
        return 0.0
    labels = np.asarray(membership, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= 2 * labels.size):
        _, labels = np.unique(labels, return_inverse=True)
    counts = np.diff(a.indptr)
    rows = np.repeat(np.arange(a.shape[0]), counts)
    k = np.bincount(rows, weights=a.data, minlength=a.shape[0])
    internal = float(a.data[labels[rows] == labels[a.indices]].sum())
    tot = np.bincount(labels, weights=k)
    return internal / two_m - resolution * float(np.dot(tot, tot)) / (two_m * two_m)


def modularity(graph: ForwardingGraph, assignment, resolution: float = 1.0) -> float:
    """Weighted modularity of ``assignment`` on ``graph`` (0 for an edgeless graph)."""
    return modularity_from_csr(graph.undirected(), membership_array(graph, assignment), resolution)
