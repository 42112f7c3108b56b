"""Attribute mixing measures on a partitioned graph.

All attribute-dependent quantities are computed on the subgraph induced by
the nodes whose attribute is observed, with degrees and edge totals
recomputed there.  The structural partition is taken as given (found on the
full graph) and restricted to the same nodes.

The within/between decomposition splits every edge by whether its endpoints
share a community, then measures attribute assortativity separately inside
communities and across them.  Normalized variants divide by the maximum
attainable value under the same degree null, so 1 means every (within or
between) edge joins same-attribute nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .community import Partition
from .graph import UndirectedGraph, induced_subgraph

__all__ = [
    "SegregationReport",
    "CommunityNetwork",
    "CommunityNode",
    "CommunityTie",
    "attribute_modularity",
    "within_community_modularity",
    "between_community_modularity",
    "segregation_report",
    "build_community_network",
    "community_network_to_dot",
    "community_network_to_json_dict",
]


def _labeled_subgraph(
    graph: UndirectedGraph, labels: np.ndarray
) -> tuple[UndirectedGraph, np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (graph.node_count,):
        raise ValueError("labels must cover every node (use negative codes for missing)")
    nodes = np.flatnonzero(labels >= 0)
    if nodes.size == 0:
        raise ValueError("no node carries the attribute")
    sub, _ = induced_subgraph(graph, nodes)
    return sub, nodes, labels[nodes]


def attribute_modularity(graph: UndirectedGraph, labels: Sequence[int] | np.ndarray) -> float:
    """Modularity of the attribute labeling itself (all ordered pairs convention).

    Restricted to the subgraph induced by labeled nodes; raises if that
    subgraph has no edges.
    """
    sub, _, lab = _labeled_subgraph(graph, np.asarray(labels))
    m = sub.edge_count
    if m == 0:
        raise ValueError("no edges join labeled nodes")
    same = lab[sub.edge_u] == lab[sub.edge_v]
    e_same = int(same.sum())
    deg_by_label = np.bincount(lab, weights=sub.degrees)
    return float(e_same / m - ((deg_by_label / (2.0 * m)) ** 2).sum())


def _decompose(
    sub: UndirectedGraph, comm: np.ndarray
) -> tuple[np.ndarray, int, int, np.ndarray, np.ndarray]:
    same = comm[sub.edge_u] == comm[sub.edge_v]
    m_within = int(same.sum())
    m_between = sub.edge_count - m_within
    n = sub.node_count
    wdeg = np.bincount(sub.edge_u[same], minlength=n) + np.bincount(
        sub.edge_v[same], minlength=n
    )
    return same, m_within, m_between, wdeg, sub.degrees - wdeg


def _normalized(edge_term: float, null_term: float, two_m: float) -> tuple[float, float, float]:
    q = (edge_term - null_term) / two_m
    q_max = (two_m - null_term) / two_m
    # q_max == 0 forces q == 0 (all relevant degree mass in one cell); the
    # natural limit of q/q_max is 0 there.
    q_norm = q / q_max if q_max > 0.0 else 0.0
    return q, q_max, q_norm


def _restricted_inputs(
    graph: UndirectedGraph, labels: np.ndarray, partition: Partition
) -> tuple[UndirectedGraph, np.ndarray, np.ndarray]:
    if partition.assignment.shape != (graph.node_count,):
        raise ValueError("partition does not cover this graph")
    sub, nodes, lab = _labeled_subgraph(graph, labels)
    return sub, lab, partition.assignment[nodes]


def within_community_modularity(
    graph: UndirectedGraph,
    labels: Sequence[int] | np.ndarray,
    partition: Partition,
) -> tuple[float, float, float]:
    """Attribute assortativity of within-community edges.

    Returns ``(q_within, q_within_max, q_within_norm)``.  Degrees count only
    within-community edges of the labeled subgraph; raises if there are none.
    """
    sub, lab, comm = _restricted_inputs(graph, np.asarray(labels), partition)
    same_comm, m_w, _, wdeg, _ = _decompose(sub, comm)
    if m_w == 0:
        raise ValueError("no within-community edges join labeled nodes")
    same_lab = lab[sub.edge_u] == lab[sub.edge_v]
    edge_term = 2.0 * int((same_comm & same_lab).sum())
    n_labels = int(lab.max()) + 1
    group = comm * n_labels + lab
    group_sums = np.bincount(group, weights=wdeg)
    two_m = 2.0 * m_w
    null_term = float((group_sums.astype(float) ** 2).sum()) / two_m
    return _normalized(edge_term, null_term, two_m)


def between_community_modularity(
    graph: UndirectedGraph,
    labels: Sequence[int] | np.ndarray,
    partition: Partition,
) -> tuple[float, float, float]:
    """Attribute assortativity of between-community edges.

    Returns ``(q_between, q_between_max, q_between_norm)``.  Degrees count
    only community-crossing edges of the labeled subgraph; raises if there
    are none.
    """
    sub, lab, comm = _restricted_inputs(graph, np.asarray(labels), partition)
    same_comm, _, m_b, _, bdeg = _decompose(sub, comm)
    if m_b == 0:
        raise ValueError("no between-community edges join labeled nodes")
    same_lab = lab[sub.edge_u] == lab[sub.edge_v]
    edge_term = 2.0 * int((~same_comm & same_lab).sum())
    n_labels = int(lab.max()) + 1
    label_sums = np.bincount(lab, weights=bdeg)
    group_sums = np.bincount(comm * n_labels + lab, weights=bdeg)
    two_m = 2.0 * m_b
    # sum_ij k_i k_j [x_i = x_j][h_i != h_j]
    #   = sum_a (sum_{x=a} k)^2 - sum_{c,a} (sum_{x=a,h=c} k)^2
    null_term = (
        float((label_sums.astype(float) ** 2).sum())
        - float((group_sums.astype(float) ** 2).sum())
    ) / two_m
    return _normalized(edge_term, null_term, two_m)


@dataclass(frozen=True)
class SegregationReport:
    """Every mixing measure for one attribute on one partitioned graph."""

    attribute: str
    q_attr: float
    q_within: float
    q_between: float
    q_within_max: float
    q_between_max: float
    q_within_norm: float
    q_between_norm: float
    n_used: int


def segregation_report(
    graph: UndirectedGraph,
    labels: Sequence[int] | np.ndarray,
    partition: Partition,
    attribute: str,
) -> SegregationReport:
    """Convenience bundle of attribute, within, and between modularity."""
    labels = np.asarray(labels, dtype=np.int64)
    q_attr = attribute_modularity(graph, labels)
    q_w, q_w_max, q_w_norm = within_community_modularity(graph, labels, partition)
    q_b, q_b_max, q_b_norm = between_community_modularity(graph, labels, partition)
    return SegregationReport(
        attribute=attribute,
        q_attr=q_attr,
        q_within=q_w,
        q_between=q_b,
        q_within_max=q_w_max,
        q_between_max=q_b_max,
        q_within_norm=q_w_norm,
        q_between_norm=q_b_norm,
        n_used=int((labels >= 0).sum()),
    )


@dataclass(frozen=True)
class CommunityNode:
    """One retained community with its attribute composition.

    ``composition`` holds fractions over members whose attribute is observed;
    the unobserved share is reported separately as ``missing_fraction``.
    """

    community: int
    size: int
    node_fraction: float
    composition: Mapping[str, float]
    missing_fraction: float


@dataclass(frozen=True)
class CommunityTie:
    community_a: int
    community_b: int
    tie_count: int
    possible_ties: int
    density: float


@dataclass(frozen=True)
class CommunityNetwork:
    """Coarse community-level view of a partitioned graph."""

    nodes: tuple[CommunityNode, ...]
    ties: tuple[CommunityTie, ...]
    node_min_fraction: float
    edge_min_fraction: float
    node_fraction_retained: float
    tie_fraction_retained: float


def build_community_network(
    graph: UndirectedGraph,
    partition: Partition,
    labels: Sequence[int] | np.ndarray,
    node_min_fraction: float = 0.05,
    edge_min_fraction: float = 0.05,
    category_names: Sequence[str] | None = None,
) -> CommunityNetwork:
    """Collapse a partitioned graph to communities and their cross ties.

    Communities keep a node if their size is at least ``node_min_fraction``
    of the graph's nodes; a tie between two retained communities is kept if
    the number of cross edges is at least ``edge_min_fraction`` of the
    possible pairs between them.  Raises if no community passes the size
    threshold.
    """
    if partition.assignment.shape != (graph.node_count,):
        raise ValueError("partition does not cover this graph")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (graph.node_count,):
        raise ValueError("labels must cover every node (use negative codes for missing)")
    n = graph.node_count
    h0 = partition.assignment - 1
    retained = np.flatnonzero(partition.sizes >= node_min_fraction * n)
    if retained.size == 0:
        raise ValueError("no community reaches the size threshold")
    retained_set = set(retained.tolist())

    def _name(code: int) -> str:
        if category_names is not None and 0 <= code < len(category_names):
            return category_names[code]
        return str(code)

    nodes = []
    for c in retained.tolist():
        members = np.flatnonzero(h0 == c)
        member_labels = labels[members]
        observed = member_labels[member_labels >= 0]
        if observed.size:
            counts = np.bincount(observed)
            composition = {
                _name(code): float(cnt / observed.size)
                for code, cnt in enumerate(counts.tolist())
                if cnt
            }
        else:
            composition = {}
        nodes.append(
            CommunityNode(
                community=int(c + 1),
                size=int(members.size),
                node_fraction=float(members.size / n),
                composition=composition,
                missing_fraction=float((members.size - observed.size) / members.size),
            )
        )

    cross: dict[tuple[int, int], int] = {}
    for u, v in zip(h0[graph.edge_u].tolist(), h0[graph.edge_v].tolist()):
        if u == v or u not in retained_set or v not in retained_set:
            continue
        key = (u, v) if u < v else (v, u)
        cross[key] = cross.get(key, 0) + 1
    ties = []
    kept_tie_total = 0
    for (a, b), count in sorted(cross.items()):
        possible = int(partition.sizes[a]) * int(partition.sizes[b])
        if count >= edge_min_fraction * possible:
            ties.append(
                CommunityTie(
                    community_a=int(a + 1),
                    community_b=int(b + 1),
                    tie_count=count,
                    possible_ties=possible,
                    density=count / possible,
                )
            )
            kept_tie_total += count

    retained_nodes = int(partition.sizes[retained].sum())
    return CommunityNetwork(
        nodes=tuple(nodes),
        ties=tuple(ties),
        node_min_fraction=node_min_fraction,
        edge_min_fraction=edge_min_fraction,
        node_fraction_retained=retained_nodes / n,
        tie_fraction_retained=kept_tie_total / graph.edge_count if graph.edge_count else 0.0,
    )


def community_network_to_dot(network: CommunityNetwork, title: str = "communities") -> str:
    """Graphviz DOT rendering; node labels carry size and composition shares."""
    lines = [f"graph {_dot_id(title)} {{", "  node [shape=circle];"]
    for node in network.nodes:
        comp = " ".join(
            f"{name} {share:.0%}" for name, share in sorted(node.composition.items())
        )
        label_parts = [f"c{node.community}", f"n={node.size}"]
        if comp:
            label_parts.append(comp)
        if node.missing_fraction:
            label_parts.append(f"missing {node.missing_fraction:.0%}")
        label = "\\n".join(label_parts)
        lines.append(f'  c{node.community} [label="{label}"];')
    for tie in network.ties:
        lines.append(
            f'  c{tie.community_a} -- c{tie.community_b} [label="{tie.tie_count}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(text: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in text)
    return safe if safe and not safe[0].isdigit() else f"g_{safe}"


def community_network_to_json_dict(network: CommunityNetwork) -> dict:
    """JSON-serializable view of a community network."""
    return {
        "node_min_fraction": network.node_min_fraction,
        "edge_min_fraction": network.edge_min_fraction,
        "node_fraction_retained": network.node_fraction_retained,
        "tie_fraction_retained": network.tie_fraction_retained,
        "nodes": [
            {
                "community": node.community,
                "size": node.size,
                "node_fraction": node.node_fraction,
                "composition": dict(sorted(node.composition.items())),
                "missing_fraction": node.missing_fraction,
            }
            for node in network.nodes
        ],
        "ties": [
            {
                "community_a": tie.community_a,
                "community_b": tie.community_b,
                "tie_count": tie.tie_count,
                "possible_ties": tie.possible_ties,
                "density": tie.density,
            }
            for tie in network.ties
        ],
    }
