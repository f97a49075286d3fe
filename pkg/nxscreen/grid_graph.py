# -*- coding: utf-8 -*-

"""Bus-branch graph of a case and the distance/search-level subgraphs built around a seed branch."""

from dataclasses import dataclass
import logging
import math

import networkx as nx
import numpy as np

from .constants import *


__all__ = [
    "GridGraph",
    "SearchSubgraph",
    "ROLE_SEED",
    "ROLE_DESIRED",
    "ROLE_NEIGHBOR",
    "build_graph",
    "hop_distances",
    "branch_hop_distance",
    "build_subgraph",
    "subgraph_weighted_graph",
    "subgraph_to_dot",
]

logger = logging.getLogger(__name__)

ROLE_SEED = "seed"
ROLE_DESIRED = "desired"
ROLE_NEIGHBOR = "neighbor"


@dataclass(frozen=True, eq=False)
class GridGraph:
    """In-service buses and branches as a weighted multigraph.

    Edges of ``multigraph`` are keyed by branch index. ``simple`` is the unweighted simple projection
    used for hop distances.
    """

    multigraph: nx.MultiGraph
    simple: nx.Graph
    weights: dict
    ends: dict

    def __contains__(self, branch):
        return branch in self.ends

    @property
    def branches(self):
        return sorted(self.ends)


@dataclass(frozen=True)
class SearchSubgraph:
    seed: int
    desired: frozenset
    node_set: frozenset
    edge_set: frozenset
    d: int
    sl: int

    def node_roles(self, graph):
        """Maps every subgraph node to seed, desired or neighbor."""
        seed_nodes = set(graph.ends[self.seed])
        desired_nodes = {n for b in self.desired for n in graph.ends[b]}
        roles = {}
        for node in self.node_set:
            if node in seed_nodes:
                roles[node] = ROLE_SEED
            elif node in desired_nodes:
                roles[node] = ROLE_DESIRED
            else:
                roles[node] = ROLE_NEIGHBOR
        return roles


def build_graph(case, metrics):
    """Builds the weighted multigraph of in-service branches.

    Each edge gets weight 1 / (|M| + eps) with eps = WEIGHT_EPSILON_FACTOR * max|M|, so the
    highest-impact branches are the shortest and attract the most shortest paths. When every M is
    zero all weights are 1.

    Args:
        case: The network.
        metrics: BranchMetrics computed for the same case.

    Returns:
        A GridGraph.
    """
    in_service = case.in_service_branches()
    magnitudes = np.abs(metrics.m_value)
    largest = max((magnitudes[i] for i in in_service), default=0.0)
    eps = WEIGHT_EPSILON_FACTOR * largest if largest > 0.0 else 1.0

    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(bus.id for bus in case.buses if bus.in_service)
    weights = {}
    ends = {}
    for i in in_service:
        br = case.branches[i]
        weights[i] = 1.0 / (magnitudes[i] + eps)
        ends[i] = br.ends
        multigraph.add_edge(br.from_bus, br.to_bus, key=i, weight=weights[i])

    return GridGraph(
        multigraph=multigraph,
        simple=nx.Graph(multigraph),
        weights=weights,
        ends=ends,
    )


def hop_distances(graph, sources, cutoff=None):
    """Unweighted BFS distances from the nearest of `sources`, optionally stopping at `cutoff` hops."""
    distances = {}
    for depth, layer in enumerate(nx.bfs_layers(graph.simple, list(sources))):
        if cutoff is not None and depth > cutoff:
            break
        for node in layer:
            distances[node] = depth
    return distances


def _require_branch(graph, branch):
    if branch not in graph:
        raise ValueError("Branch %d is not an in-service branch of the graph" % branch)


def branch_hop_distance(graph, b1, b2):
    """Hop distance between two branches: the minimum BFS distance over their endpoint pairs.

    Returns:
        0 for branches sharing a bus, math.inf when they lie in different islands.
    """
    _require_branch(graph, b1)
    _require_branch(graph, b2)
    distances = hop_distances(graph, graph.ends[b1])
    return min(distances.get(node, math.inf) for node in graph.ends[b2])


def build_subgraph(graph, seed, high_m, d, sl):
    """Builds the search subgraph around a seed branch.

    The desired branches are the seed plus every branch of `high_m` within d hops of it. The node set
    holds every bus within sl hops of an end of a desired branch, and the edge set every branch with
    both ends in the node set. With sl >= d the result is connected.

    Args:
        graph: The GridGraph.
        seed: Seed branch index.
        high_m: Candidate high-impact branches.
        d: Distance, in hops, for admitting high-impact branches.
        sl: Search level, in hops, around the desired branches.

    Returns:
        A SearchSubgraph.
    """
    if d < 0 or sl < 0:
        raise ValueError("distance and search level must be nonnegative")
    if sl < d:
        raise ValueError("search-level must be >= distance (got sl=%d, d=%d)" % (sl, d))
    _require_branch(graph, seed)

    from_seed = hop_distances(graph, graph.ends[seed], cutoff=d)
    desired = {seed}
    for b in high_m:
        if b in graph and any(node in from_seed for node in graph.ends[b]):
            desired.add(b)

    sources = sorted({node for b in desired for node in graph.ends[b]})
    node_set = frozenset(hop_distances(graph, sources, cutoff=sl))
    edge_set = frozenset(
        b for b, (u, v) in graph.ends.items() if u in node_set and v in node_set
    )
    logger.debug(
        "subgraph for seed %d (d=%d, sl=%d): %d desired, %d nodes, %d edges",
        seed,
        d,
        sl,
        len(desired),
        len(node_set),
        len(edge_set),
    )
    return SearchSubgraph(
        seed=seed,
        desired=frozenset(desired),
        node_set=node_set,
        edge_set=edge_set,
        d=d,
        sl=sl,
    )


def subgraph_weighted_graph(graph, sub):
    """Returns the subgraph as its own weighted MultiGraph (edge keys are branch indices)."""
    multigraph = nx.MultiGraph()
    multigraph.add_nodes_from(sorted(sub.node_set))
    for b in sorted(sub.edge_set):
        u, v = graph.ends[b]
        multigraph.add_edge(u, v, key=b, weight=graph.weights[b])
    return multigraph


def subgraph_to_dot(graph, sub):
    """Renders a subgraph as DOT text with node roles and desired-branch flags."""
    roles = sub.node_roles(graph)
    lines = [
        "graph seed_%d {" % sub.seed,
        '  graph [d=%d, sl=%d];' % (sub.d, sub.sl),
    ]
    for node in sorted(sub.node_set):
        lines.append('  "%d" [role=%s];' % (node, roles[node]))
    for b in sorted(sub.edge_set):
        u, v = graph.ends[b]
        lines.append(
            '  "%d" -- "%d" [branch=%d, weight=%.6g, desired=%s];'
            % (u, v, b, graph.weights[b], "true" if b in sub.desired else "false")
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
