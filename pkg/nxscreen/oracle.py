# -*- coding: utf-8 -*-

"""Brute-force references: exhaustive N-1/N-2 enumeration and exact GBC for small graphs."""

from dataclasses import dataclass
from fractions import Fraction
import heapq
import itertools
import logging
import math

import numpy as np

from .constants import *
from .dc_sensitivities import compute_lodf, dc_outage_flows, solve_dc
from .validation import ValidationOptions, validate_many


__all__ = [
    "InstanceTooLargeError",
    "BruteForceResult",
    "severity_key",
    "brute_force_contingencies",
    "shortest_edge_paths",
    "gbc_score_exact",
    "gbc_exhaustive",
]

logger = logging.getLogger(__name__)

# weights are rationalized to this denominator before exact path comparisons
RATIONAL_DENOMINATOR = 10**9


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    """Outcome of an exhaustive enumeration.

    Attributes:
        records: ContingencyRecords of every validated set, most severe first.
        enumerated_count: Number of x-subsets of in-service branches considered.
        screened_out: Sets skipped by the DC prescreen (no DC overload, no islanding).
    """

    records: list
    enumerated_count: int
    screened_out: int = 0

    @property
    def violating(self):
        return [r for r in self.records if r.report.has_violations]


def severity_key(record):
    """Sort key: unsolved, then shed load, overflow count, voltage count, reserve limit."""
    report = record.report
    return (
        not report.unsolved,
        -report.islanded_load_mw,
        -report.overflow_count,
        -(report.undervoltage_count + report.overvoltage_count),
        not report.reserve_limit,
        record.branches,
    )


def _overloaded(case, flows, skip):
    for i, br in enumerate(case.branches):
        if i in skip or not br.status or br.rate_a <= 0.0:
            continue
        if abs(flows[i]) > br.rate_a:
            return True
    return False


def _prescreen(case, subsets):
    """Keeps the subsets whose DC outage overloads a branch or islands the network."""
    if not subsets:
        return []
    dc = solve_dc(case)
    kept = []
    if len(subsets[0]) == 1:
        sens = compute_lodf(case, dc)
        for subset in subsets:
            (k,) = subset
            if sens.bridge[k]:
                kept.append(subset)
                continue
            post = dc.flows + np.nan_to_num(sens.lodf[:, k]) * dc.flows[k]
            if _overloaded(case, post, {k}):
                kept.append(subset)
        return kept

    for subset in subsets:
        post = dc_outage_flows(case, subset)
        if post is None or _overloaded(case, post.flows, set(subset)):
            kept.append(subset)
    return kept


def brute_force_contingencies(case, x, dc_prescreen=None, options=None, threads=1):
    """Enumerates every x-subset of in-service branches and validates it.

    Args:
        case: The network.
        x: Outage order, 1 or 2.
        dc_prescreen: Skip sets with no DC overload and no islanding. None turns it on for x = 2
            only, so that every single outage gets a full validation.
        options: ValidationOptions for the sets that are validated.
        threads: Worker threads for validation.

    Returns:
        A BruteForceResult with records sorted by severity_key.
    """
    if x not in (1, 2):
        raise ValueError("brute force supports x = 1 or 2, got %d" % x)
    if dc_prescreen is None:
        dc_prescreen = x == 2
    if options is None:
        options = ValidationOptions()
    branches = case.in_service_branches()
    subsets = list(itertools.combinations(branches, x))
    enumerated = len(subsets)

    screened_out = 0
    if dc_prescreen:
        kept = _prescreen(case, subsets)
        screened_out = enumerated - len(kept)
        logger.info("DC prescreen kept %d of %d sets", len(kept), enumerated)
        subsets = kept

    records = validate_many(case, subsets, options, threads=threads)
    records.sort(key=severity_key)
    return BruteForceResult(records=records, enumerated_count=enumerated, screened_out=screened_out)


def _rational(weight):
    return Fraction(weight).limit_denominator(RATIONAL_DENOMINATOR)


def _adjacency(graph):
    adjacency = {node: [] for node in graph.nodes()}
    ends = {}
    for u, v, key, weight in graph.edges(keys=True, data="weight"):
        w = _rational(weight)
        adjacency[u].append((v, key, w))
        adjacency[v].append((u, key, w))
        ends[key] = (u, v)
    return adjacency, ends


def shortest_edge_paths(graph, source):
    """Every minimum-weight path from `source`, exact on rationalized weights.

    Returns:
        A dict mapping each reachable node other than the source to a list of paths, each a tuple
        of edge keys.
    """
    adjacency, _ = _adjacency(graph)
    dist = {source: Fraction(0)}
    heap = [(Fraction(0), source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, _, w in adjacency[u]:
            if v not in dist or d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))

    paths = {source: [()]}
    for t in sorted(dist, key=lambda n: (dist[n], n)):
        if t == source:
            continue
        paths[t] = [
            p + (key,)
            for u, key, w in adjacency[t]
            if u in dist and dist[u] + w == dist[t]
            for p in paths[u]
        ]
    del paths[source]
    return paths


def _all_pair_paths(graph):
    return {
        (s, t): [frozenset(p) for p in found]
        for s in graph.nodes()
        for t, found in shortest_edge_paths(graph, s).items()
    }


def _score(pair_paths, ends, e_set, rule):
    e_set = frozenset(e_set)
    if not e_set:
        return Fraction(0)
    excluded_nodes = set()
    excluded_pairs = set()
    if rule == PAIR_RULE_ENDPOINTS:
        excluded_nodes = {n for e in e_set for n in ends[e]}
    elif rule == PAIR_RULE_PAIR:
        excluded_pairs = {frozenset(ends[e]) for e in e_set}
    total = Fraction(0)
    for (s, t), paths in pair_paths.items():
        if s in excluded_nodes or t in excluded_nodes or frozenset((s, t)) in excluded_pairs:
            continue
        hits = sum(1 for p in paths if p & e_set)
        if hits:
            total += Fraction(hits, len(paths))
    return total


def _check_rule(rule):
    if rule not in PAIR_RULES:
        raise ValueError("Unknown pair rule %r" % rule)


def gbc_score_exact(graph, e_set, rule=PAIR_RULE_ENDPOINTS):
    """Group betweenness of an edge set by enumerating every shortest path. Returns a Fraction."""
    _check_rule(rule)
    _, ends = _adjacency(graph)
    missing = set(e_set).difference(ends)
    if missing:
        raise ValueError("Edges not in graph: %s" % sorted(missing))
    return _score(_all_pair_paths(graph), ends, e_set, rule)


def gbc_exhaustive(graph, x, rule=PAIR_RULE_ENDPOINTS):
    """Best edge group of size x over all subsets, with exact arithmetic.

    Args:
        graph: Weighted networkx MultiGraph with at most EXHAUSTIVE_MAX_EDGES edges.
        x: Group size, 1 <= x <= EXHAUSTIVE_MAX_GROUP.
        rule: Pair rule.

    Returns:
        A tuple (group, score): the lowest sorted tuple of edge keys among the optimal groups and
        its score as a Fraction.

    Raises:
        InstanceTooLargeError: If the graph or the group size exceeds the limits.
    """
    _check_rule(rule)
    edges = sorted(key for _, _, key in graph.edges(keys=True))
    if len(edges) > EXHAUSTIVE_MAX_EDGES or x > EXHAUSTIVE_MAX_GROUP:
        raise InstanceTooLargeError(
            "exhaustive search is limited to %d edges and x <= %d (got %d edges, x=%d)"
            % (EXHAUSTIVE_MAX_EDGES, EXHAUSTIVE_MAX_GROUP, len(edges), x)
        )
    if not 1 <= x <= len(edges):
        raise ValueError("x must lie between 1 and the edge count %d" % len(edges))

    _, ends = _adjacency(graph)
    pair_paths = _all_pair_paths(graph)
    best, best_score = None, None
    for group in itertools.combinations(edges, x):
        value = _score(pair_paths, ends, group, rule)
        if best is None or value > best_score:
            best, best_score = group, value
    logger.debug("exhaustive optimum over C(%d, %d): %s", len(edges), x, best)
    return best, best_score
