# -*- coding: utf-8 -*-

"""Group betweenness centrality of edge sets on weighted multigraphs, and greedy group selection.

For an edge set E the score is the sum over ordered node pairs (s, t), s != t, of the fraction of
minimum-weight s-t paths that use at least one edge of E. Which pairs take part is set by the pair
rule:

* ``endpoints``: s and t must not be an end of any edge in E (the default);
* ``pair``: only pairs whose two nodes are the ends of an edge in E are dropped;
* ``none``: every pair with s != t counts.

Path counting follows Brandes: one Dijkstra per source builds the shortest-path DAG and its path
counts. The DAGs do not depend on E, so they are built once per graph (``ShortestPathIndex``) and
every score only re-counts the paths that avoid E.
"""

from dataclasses import dataclass
import heapq
import logging
import math

from .constants import *


__all__ = [
    "GbcResult",
    "ShortestPathIndex",
    "gbc_score",
    "select_group",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GbcResult:
    """A greedy selection and the score after each addition.

    The scores never decrease under PAIR_RULE_NONE. Under the other rules an added edge can
    exclude pairs that earlier edges were credited for, so a step may score lower than the one
    before it.
    """

    group: tuple
    scores: tuple

    @property
    def final_score(self):
        return self.scores[-1] if self.scores else 0.0


def _check_rule(rule):
    if rule not in PAIR_RULES:
        raise ValueError(
            "Unknown pair rule %r (expected one of %s)" % (rule, ", ".join(PAIR_RULES))
        )


class _SourceDag:
    __slots__ = ("order", "preds", "sigma")

    def __init__(self, order, preds, sigma):
        self.order = order
        self.preds = preds
        self.sigma = sigma


class ShortestPathIndex:
    """Shortest-path DAGs and path counts from every node of a weighted multigraph.

    Args:
        graph: A networkx MultiGraph whose edge keys identify branches and whose edges carry a
            positive ``weight``.
        tolerance: Relative tolerance under which two path lengths are considered equal.
    """

    def __init__(self, graph, tolerance=PATH_TIE_TOLERANCE):
        self.tolerance = tolerance
        self.nodes = sorted(graph.nodes())
        self.edges = {}
        self._adjacency = {node: [] for node in self.nodes}
        for u, v, key, weight in sorted(graph.edges(keys=True, data="weight")):
            if weight is None or not weight > 0.0 or not math.isfinite(weight):
                raise ValueError("Edge %r needs a positive finite weight" % (key,))
            self.edges[key] = (u, v)
            self._adjacency[u].append((v, key, weight))
            self._adjacency[v].append((u, key, weight))
        self._dags = {s: self._single_source(s) for s in self.nodes}

    def _single_source(self, source):
        dist = {source: 0.0}
        done = set()
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v, _, w in self._adjacency[u]:
                candidate = d + w
                if v not in dist or candidate < dist[v]:
                    dist[v] = candidate
                    heapq.heappush(heap, (candidate, v))

        order = sorted((n for n in dist if n != source), key=lambda n: (dist[n], n))
        preds = {}
        sigma = {source: 1}
        for v in order:
            limit = self.tolerance * dist[v]
            tight = [
                (u, key)
                for u, key, w in self._adjacency[v]
                if u in dist and dist[u] < dist[v] and abs(dist[u] + w - dist[v]) <= limit
            ]
            preds[v] = tight
            sigma[v] = sum(sigma[u] for u, _ in tight)
        return _SourceDag(order, preds, sigma)

    def path_count(self, s, t):
        """Number of shortest s-t paths (0 when t is unreachable)."""
        return self._dags[s].sigma.get(t, 0)

    def score(self, edge_set, rule=PAIR_RULE_ENDPOINTS):
        """Group betweenness of `edge_set` under the given pair rule."""
        _check_rule(rule)
        edge_set = frozenset(edge_set)
        unknown = edge_set.difference(self.edges)
        if unknown:
            raise ValueError("Edges not in graph: %s" % sorted(unknown))
        if not edge_set:
            return 0.0

        excluded_nodes = set()
        excluded_pairs = set()
        if rule == PAIR_RULE_ENDPOINTS:
            excluded_nodes = {n for e in edge_set for n in self.edges[e]}
        elif rule == PAIR_RULE_PAIR:
            excluded_pairs = {frozenset(self.edges[e]) for e in edge_set}

        terms = []
        for s in self.nodes:
            if s in excluded_nodes:
                continue
            dag = self._dags[s]
            avoiding = {s: 1}
            for t in dag.order:
                count = 0
                for u, key in dag.preds[t]:
                    if key not in edge_set:
                        count += avoiding[u]
                avoiding[t] = count
                if t in excluded_nodes or frozenset((s, t)) in excluded_pairs:
                    continue
                total = dag.sigma[t]
                if total and count < total:
                    terms.append((total - count) / total)
        return math.fsum(terms)


def gbc_score(graph, e_set, rule=PAIR_RULE_ENDPOINTS, index=None):
    """Group betweenness centrality of an edge set.

    Args:
        graph: Weighted networkx MultiGraph (edge keys are branch indices).
        e_set: Edge keys forming the group.
        rule: Pair rule, one of constants.PAIR_RULES.
        index: A prebuilt ShortestPathIndex of `graph`, to skip rebuilding it.

    Returns:
        The score; 0 for an empty set. Disconnected pairs contribute nothing.
    """
    if index is None:
        index = ShortestPathIndex(graph)
    return index.score(e_set, rule)


def select_group(graph, x, forced=(), rule=PAIR_RULE_ENDPOINTS, index=None):
    """Greedily grows an edge group of size x.

    The forced edges are added first, in the order given. Each further step adds the edge with the
    largest resulting score; near-equal scores (SCORE_TIE_TOLERANCE) go to the lowest edge key.

    Args:
        graph: Weighted networkx MultiGraph (edge keys are branch indices).
        x: Target group size, 1 <= x <= edge count.
        forced: Edges that must be in the group.
        rule: Pair rule, one of constants.PAIR_RULES.
        index: A prebuilt ShortestPathIndex of `graph`.

    Returns:
        A GbcResult with the selection order and the score after each addition.
    """
    if index is None:
        index = ShortestPathIndex(graph)
    edges = sorted(index.edges)
    if x < 1:
        raise ValueError("x must be at least 1")
    if x > len(edges):
        raise ValueError("x=%d exceeds the %d available edges" % (x, len(edges)))
    forced = list(forced) if isinstance(forced, (list, tuple)) else sorted(forced)
    missing = [e for e in forced if e not in index.edges]
    if missing:
        raise ValueError("Forced edges not in graph: %s" % missing)
    if len(set(forced)) > x:
        raise ValueError("%d forced edges exceed x=%d" % (len(set(forced)), x))

    group = []
    scores = []
    for e in forced:
        if e not in group:
            group.append(e)
            scores.append(index.score(group, rule))

    while len(group) < x:
        best, best_score = None, None
        for e in edges:
            if e in group:
                continue
            value = index.score(group + [e], rule)
            if best is None or value > best_score + SCORE_TIE_TOLERANCE * max(1.0, abs(best_score)):
                best, best_score = e, value
        group.append(best)
        scores.append(best_score)

    logger.debug("selected group %s with score %.6g", group, scores[-1])
    return GbcResult(group=tuple(group), scores=tuple(scores))
