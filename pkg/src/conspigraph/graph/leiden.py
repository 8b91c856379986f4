"""Leiden community detection maximizing modularity.

Works on the undirected weighted projection of a ``ForwardingGraph``.  Each
outer iteration runs fast local moving, refinement inside every community and
aggregation on the refined partition until no node moves, then repeats from
the resulting partition until it stops changing.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .forwarding import ForwardingGraph
from .modularity import modularity_from_csr

log = logging.getLogger(__name__)


@dataclass
class Partition:
    assignment: dict[int, int]
    modularity: float
    resolution: float = 1.0
    seed: int = 0
    history: list[float] = field(default_factory=list)
    iterations: int = 0

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for node, c in sorted(self.assignment.items()):
            out.setdefault(c, []).append(node)
        return dict(sorted(out.items()))

    def membership(self, graph: ForwardingGraph) -> np.ndarray:
        return np.array([self.assignment[int(c)] for c in graph.nodes], dtype=np.int64)


class _Level:
    """Adjacency lists of one aggregation level (self-loops kept apart)."""

    def __init__(self, a: sp.csr_matrix):
        a = a.tocsr()
        a.sort_indices()
        self.n = a.shape[0]
        self.k = np.asarray(a.sum(axis=1)).ravel().tolist()
        indptr, indices, data = a.indptr.tolist(), a.indices.tolist(), a.data.tolist()
        self.nbrs: list[list[int]] = []
        self.wts: list[list[float]] = []
        for i in range(self.n):
            lo, hi = indptr[i], indptr[i + 1]
            nb, wt = [], []
            for j, w in zip(indices[lo:hi], data[lo:hi]):
                if j != i:
                    nb.append(j)
                    wt.append(w)
            self.nbrs.append(nb)
            self.wts.append(wt)
        self.a = a


def _move_nodes_fast(level: _Level, comm: list[int], gamma: float, two_m: float, rng) -> bool:
    n = level.n
    k, nbrs, wts = level.k, level.nbrs, level.wts
    tot = [0.0] * n
    size = [0] * n
    for i in range(n):
        tot[comm[i]] += k[i]
        size[comm[i]] += 1
    empty = [c for c in range(n) if size[c] == 0]
    order = rng.permutation(n).tolist()
    queue = deque(order)
    queued = [True] * n
    moved = False
    scale = gamma / two_m
    while queue:
        i = queue.popleft()
        queued[i] = False
        old = comm[i]
        ki = k[i]
        links: dict[int, float] = {}
        for j, w in zip(nbrs[i], wts[i]):
            c = comm[j]
            links[c] = links.get(c, 0.0) + w
        tot[old] -= ki
        size[old] -= 1
        best = old
        best_score = links.get(old, 0.0) - scale * ki * tot[old]
        for c, w in links.items():
            if c == old:
                continue
            s = w - scale * ki * tot[c]
            if s > best_score + 1e-12 * (1.0 + abs(best_score)):
                best, best_score = c, s
        if best_score < -1e-12 * (1.0 + abs(best_score)) and size[old] > 0:
            # an empty community scores exactly 0
            best = empty.pop() if empty else old
        if size[old] == 0 and best != old:
            empty.append(old)
        comm[i] = best
        tot[best] += ki
        size[best] += 1
        if best != old:
            moved = True
            for j in nbrs[i]:
                if not queued[j] and comm[j] != best:
                    queued[j] = True
                    queue.append(j)
    return moved


def _refine(level: _Level, comm: list[int], gamma: float, two_m: float, rng) -> list[int]:
    """Refined partition: merge singletons inside each community, greedily."""
    n = level.n
    k, nbrs, wts = level.k, level.nbrs, level.wts
    scale = gamma / two_m
    ref = list(range(n))
    rtot = list(k)
    singleton = [True] * n
    members: dict[int, list[int]] = {}
    for i in range(n):
        members.setdefault(comm[i], []).append(i)
    # weight from each node / refined community to the rest of its community
    node_in = [0.0] * n
    for i in range(n):
        ci = comm[i]
        node_in[i] = sum(w for j, w in zip(nbrs[i], wts[i]) if comm[j] == ci)
    rext = list(node_in)
    comm_tot: dict[int, float] = {}
    for i in range(n):
        comm_tot[comm[i]] = comm_tot.get(comm[i], 0.0) + k[i]

    for c, nodes in members.items():
        if len(nodes) == 1:
            continue
        kc = comm_tot[c]
        for idx in rng.permutation(len(nodes)).tolist():
            v = nodes[idx]
            if not singleton[v]:
                continue
            kv = k[v]
            if node_in[v] < scale * kv * (kc - kv) - 1e-12:
                continue
            links: dict[int, float] = {}
            for j, w in zip(nbrs[v], wts[v]):
                if comm[j] == c and ref[j] != ref[v]:
                    r = ref[j]
                    links[r] = links.get(r, 0.0) + w
            best, best_gain = None, 0.0
            for r, w in links.items():
                tr = rtot[r]
                if rext[r] < scale * tr * (kc - tr) - 1e-12:
                    continue
                gain = w - scale * kv * tr
                if gain > best_gain + 1e-12 * (1.0 + abs(best_gain)) or (best is None and gain >= 0):
                    best, best_gain = r, gain
            if best is None:
                continue
            own = ref[v]
            ref[v] = best
            rtot[best] += kv
            rtot[own] -= kv
            w_vb = links[best]
            rext[best] = rext[best] + node_in[v] - 2.0 * w_vb
            rext[own] = 0.0
            singleton[v] = False
            for j in nbrs[v]:
                if ref[j] == best:
                    singleton[j] = False
    return ref


def _dense(labels) -> tuple[np.ndarray, int]:
    uniq, inv = np.unique(np.asarray(labels), return_inverse=True)
    return inv.astype(np.int64), len(uniq)


def _aggregate(a: sp.csr_matrix, labels: np.ndarray, n_groups: int) -> sp.csr_matrix:
    m = sp.csr_matrix((np.ones(len(labels)), (np.arange(len(labels)), labels)), shape=(len(labels), n_groups))
    return (m.T @ a @ m).tocsr()


def _split_disconnected(a: sp.csr_matrix, membership: np.ndarray) -> np.ndarray:
    """Split every community into its connected components."""
    n = a.shape[0]
    coo = a.tocoo()
    keep = membership[coo.row] == membership[coo.col]
    inner = sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=(n, n))
    _, comp = connected_components(inner, directed=False)
    return _dense(membership * (n + 1) + comp)[0]


def _canonical(membership: np.ndarray) -> np.ndarray:
    """Relabel communities 0.. in order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty(len(membership), dtype=np.int64)
    for i, c in enumerate(membership.tolist()):
        if c not in mapping:
            mapping[c] = len(mapping)
        out[i] = mapping[c]
    return out


def _leiden_iteration(a0: sp.csr_matrix, start: np.ndarray, gamma: float, two_m: float, rng) -> np.ndarray:
    node_map = np.arange(a0.shape[0])
    a = a0
    comm = list(start.tolist())
    while True:
        level = _Level(a)
        _move_nodes_fast(level, comm, gamma, two_m, rng)
        labels, n_comm = _dense(comm)
        if n_comm == level.n:
            return labels[node_map]
        ref = _refine(level, labels.tolist(), gamma, two_m, rng)
        ref_labels, n_ref = _dense(ref)
        if n_ref == level.n:
            # refinement merged nothing; aggregate on the unrefined partition
            ref_labels, n_ref = labels, n_comm
        agg_comm = np.zeros(n_ref, dtype=np.int64)
        agg_comm[ref_labels] = labels
        a = _aggregate(a, ref_labels, n_ref)
        node_map = ref_labels[node_map]
        comm = agg_comm.tolist()


def leiden_membership(a: sp.csr_matrix, resolution: float = 1.0, seed: int = 0,
                      max_iterations: int = 100, initial: np.ndarray | None = None) -> tuple[np.ndarray, list[float]]:
    """Membership vector for symmetric adjacency ``a`` and the modularity after each outer iteration."""
    n = a.shape[0]
    membership = np.arange(n) if initial is None else _dense(initial)[0]
    two_m = float(a.sum())
    if n == 0:
        return membership, []
    if two_m == 0:
        membership = np.arange(n)
        return membership, [0.0]
    rng = np.random.default_rng(seed)
    history = [modularity_from_csr(a, membership, resolution)]
    for _ in range(max_iterations):
        new = _leiden_iteration(a, membership, resolution, two_m, rng)
        new = _canonical(_split_disconnected(a, new))
        history.append(modularity_from_csr(a, new, resolution))
        if np.array_equal(new, _canonical(membership)):
            membership = new
            break
        membership = new
    else:
        log.warning("leiden did not reach a fixed point in %d iterations", max_iterations)
    return _canonical(membership), history


def leiden_partition(graph: ForwardingGraph, resolution: float = 1.0, seed: int = 0,
                     max_iterations: int = 100) -> Partition:
    """Partition the channels of ``graph`` into communities.

    Deterministic for a fixed ``seed``; ``history`` logs modularity after each
    outer iteration (starting from singletons).
    """
    a = graph.undirected()
    membership, history = leiden_membership(a, resolution, seed, max_iterations)
    q = modularity_from_csr(a, membership, resolution)
    assignment = {int(c): int(m) for c, m in zip(graph.nodes, membership)}
    return Partition(assignment, q, resolution, seed, history, max(0, len(history) - 1))


def is_connected_partition(graph: ForwardingGraph, partition: Partition) -> bool:
    a = graph.undirected()
    m = partition.membership(graph)
    return bool(np.array_equal(_canonical(_split_disconnected(a, m)), _canonical(m)))
