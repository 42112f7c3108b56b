"""Immutable undirected simple graphs: construction, components, summary statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "UndirectedGraph",
    "NetworkStats",
    "build_graph",
    "component_labels",
    "induced_subgraph",
    "largest_connected_component",
    "mean_local_clustering",
    "network_stats",
]


@dataclass(frozen=True)
class UndirectedGraph:
    """Simple undirected graph over dense node indices ``0 .. node_count - 1``.

    Edges are stored once as index pairs with ``edge_u < edge_v``, ordered
    lexicographically.  ``indptr``/``neighbors`` hold a CSR adjacency layout
    with every neighbor list sorted.  All arrays are frozen after
    construction so instances can be shared freely across workers.
    """

    node_count: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    indptr: np.ndarray
    neighbors: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.edge_u, self.edge_v, self.indptr, self.neighbors):
            arr.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self, node: int) -> np.ndarray:
        """Sorted neighbor indices of ``node``."""
        return self.neighbors[self.indptr[node] : self.indptr[node + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        nbrs = self.adjacency(i)
        pos = int(np.searchsorted(nbrs, j))
        return pos < nbrs.size and int(nbrs[pos]) == j

    def edges(self) -> Iterator[tuple[int, int]]:
        """Iterate edges as ``(u, v)`` pairs with ``u < v``."""
        return zip(self.edge_u.tolist(), self.edge_v.tolist())

    def equals(self, other: "UndirectedGraph") -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
        )


def _compile(node_count: int, eu: np.ndarray, ev: np.ndarray) -> UndirectedGraph:
    """Assemble a graph from deduplicated ``u < v`` edge arrays."""
    eu = np.asarray(eu, dtype=np.int64)
    ev = np.asarray(ev, dtype=np.int64)
    order = np.lexsort((ev, eu))
    eu, ev = eu[order], ev[order]
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    perm = np.lexsort((dst, src))
    neighbors = dst[perm]
    counts = np.bincount(src, minlength=node_count)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return UndirectedGraph(node_count, eu, ev, indptr, neighbors)


def build_graph(
    edge_list: Iterable[tuple[Hashable, Hashable]],
    node_ids: Sequence[Hashable] | None = None,
) -> tuple[UndirectedGraph, dict[Hashable, int]]:
    """Build a simple graph from raw id pairs.

    Repeated and reversed pairs collapse to a single edge and self loops are
    dropped.  When ``node_ids`` is given it fixes the node universe and index
    order, and edges referencing ids outside it are rejected.  Otherwise the
    universe is the sorted set of endpoint ids (ids must then be mutually
    orderable).  Returns the graph together with the id -> index mapping.
    """
    pairs = list(edge_list)
    if node_ids is not None:
        ids = list(node_ids)
        index: dict[Hashable, int] = {}
        for k, nid in enumerate(ids):
            if nid in index:
                raise ValueError(f"duplicate node id {nid!r} in node list")
            index[nid] = k
        for a, b in pairs:
            if a not in index:
                raise ValueError(f"edge references unknown node id {a!r}")
            if b not in index:
                raise ValueError(f"edge references unknown node id {b!r}")
    else:
        seen = set()
        for a, b in pairs:
            seen.add(a)
            seen.add(b)
        ids = sorted(seen)
        index = {nid: k for k, nid in enumerate(ids)}

    dedup: set[tuple[int, int]] = set()
    for a, b in pairs:
        ia, ib = index[a], index[b]
        if ia == ib:
            continue
        dedup.add((ia, ib) if ia < ib else (ib, ia))
    if dedup:
        arr = np.array(sorted(dedup), dtype=np.int64)
        eu, ev = arr[:, 0], arr[:, 1]
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)
    return _compile(len(ids), eu, ev), index


def component_labels(graph: UndirectedGraph) -> tuple[np.ndarray, int]:
    """Label connected components 0, 1, ... in order of first discovery by node index."""
    n = graph.node_count
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = current
        stack = [start]
        while stack:
            node = stack.pop()
            for nb in graph.adjacency(node).tolist():
                if labels[nb] < 0:
                    labels[nb] = current
                    stack.append(nb)
        current += 1
    return labels, current


def induced_subgraph(
    graph: UndirectedGraph, nodes: Sequence[int] | np.ndarray
) -> tuple[UndirectedGraph, dict[int, int]]:
    """Subgraph induced by ``nodes``, renumbered densely in ascending original order.

    Returns the subgraph and the old-index -> new-index mapping.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size == 0:
        raise ValueError("empty node selection")
    if nodes[0] < 0 or nodes[-1] >= graph.node_count:
        raise ValueError("node index out of range")
    keep = np.isin(graph.edge_u, nodes) & np.isin(graph.edge_v, nodes)
    eu = np.searchsorted(nodes, graph.edge_u[keep])
    ev = np.searchsorted(nodes, graph.edge_v[keep])
    sub = _compile(int(nodes.size), eu, ev)
    mapping = {int(old): new for new, old in enumerate(nodes.tolist())}
    return sub, mapping


def largest_connected_component(
    graph: UndirectedGraph,
) -> tuple[UndirectedGraph, dict[int, int]]:
    """Extract the largest connected component.

    Ties between equal-size components resolve to the one containing the
    smallest original node index.  Raises on an empty graph.
    """
    if graph.node_count == 0:
        raise ValueError("cannot take the largest component of an empty graph")
    labels, n_comp = component_labels(graph)
    sizes = np.bincount(labels, minlength=n_comp)
    # Discovery order means the first maximal label contains the smallest index.
    best = int(np.argmax(sizes))
    return induced_subgraph(graph, np.flatnonzero(labels == best))


def mean_local_clustering(graph: UndirectedGraph) -> float:
    """Mean over all nodes of the local clustering coefficient.

    A node of degree < 2 contributes 0.
    """
    if graph.node_count == 0:
        raise ValueError("empty graph")
    total = 0.0
    for i in range(graph.node_count):
        nbrs = graph.adjacency(i)
        k = int(nbrs.size)
        if k < 2:
            continue
        links = 0
        for j in nbrs.tolist():
            adj_j = graph.adjacency(j)
            links += int(np.count_nonzero(np.isin(adj_j, nbrs, assume_unique=True) & (adj_j > j)))
        total += 2.0 * links / (k * (k - 1))
    return total / graph.node_count


@dataclass(frozen=True)
class NetworkStats:
    """Whole-graph summary plus largest-component coverage fractions."""

    n_nodes: int
    n_edges: int
    density: float
    mean_degree: float
    mean_clustering: float
    n_components: int
    lcc_node_fraction: float
    lcc_edge_fraction: float


def network_stats(graph: UndirectedGraph, lcc: UndirectedGraph) -> NetworkStats:
    """Summary statistics of ``graph`` with coverage of its component ``lcc``."""
    if graph.node_count == 0:
        raise ValueError("empty graph")
    n, m = graph.node_count, graph.edge_count
    density = 2.0 * m / (n * (n - 1)) if n > 1 else 0.0
    _, n_comp = component_labels(graph)
    # An edgeless graph has nothing to cover; report the vacuous fraction 1.
    edge_fraction = lcc.edge_count / m if m else 1.0
    return NetworkStats(
        n_nodes=n,
        n_edges=m,
        density=density,
        mean_degree=2.0 * m / n,
        mean_clustering=mean_local_clustering(graph),
        n_components=n_comp,
        lcc_node_fraction=lcc.node_count / n,
        lcc_edge_fraction=edge_fraction,
    )
