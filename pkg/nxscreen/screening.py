# -*- coding: utf-8 -*-

"""The screening pipeline: metrics, top-a% seeds, per-seed subgraphs, greedy GBC groups."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import time

from .constants import *
from .dc_sensitivities import solve_dc, compute_lodf
from .metrics import compute_metrics, rank_branches
from .grid_graph import build_graph, build_subgraph, subgraph_weighted_graph
from .gbc import ShortestPathIndex, select_group


__all__ = [
    "ScreeningConfig",
    "CandidateSet",
    "ScreeningResult",
    "prepare",
    "run_screening",
    "screen",
    "compare_with_baseline",
    "timing_sweep",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScreeningConfig:
    """Parameters of one screening run.

    Attributes:
        x: Contingency order (size of every candidate set).
        d: Distance in hops for admitting other high-impact branches into a seed's subgraph.
        sl: Search level in hops around the desired branches; must be >= d.
        a_percent: Share of branches used as seeds (and as the high-impact set).
        max_candidates: Cap on the number of emitted sets.
        seed_limit: Optional cap on the number of seeds, taken from the top of the ranking.
        pair_rule: GBC pair rule.
        threads: Worker threads for the per-seed pipelines.
    """

    x: int
    d: int
    sl: int
    a_percent: float = DEFAULT_A_PERCENT
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    seed_limit: int = None
    pair_rule: str = PAIR_RULE_ENDPOINTS
    threads: int = 1

    def __post_init__(self):
        if self.x < 1:
            raise ValueError("x must be at least 1")
        if self.d < 0:
            raise ValueError("distance must be nonnegative")
        if self.sl < self.d:
            raise ValueError("search-level must be >= distance")
        if not 0.0 < self.a_percent <= 100.0:
            raise ValueError("top-percent must lie in (0, 100]")
        if self.max_candidates < 1:
            raise ValueError("max-candidates must be at least 1")
        if self.seed_limit is not None and self.seed_limit < 1:
            raise ValueError("seed-limit must be at least 1")
        if self.pair_rule not in PAIR_RULES:
            raise ValueError("Unknown pair rule %r" % self.pair_rule)
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True)
class CandidateSet:
    branches: frozenset
    seed: int
    gbc_trace: tuple
    group: tuple = ()

    @property
    def gbc_score(self):
        return self.gbc_trace[-1] if self.gbc_trace else 0.0


@dataclass(eq=False)
class ScreeningResult:
    """Candidates of a run plus what produced them and how long each stage took (seconds)."""

    candidates: list
    seeds: list
    skipped: list
    timings: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class _Prepared:
    dc: object
    sensitivities: object
    metrics: object
    graph: object
    seconds: float


def prepare(case):
    """Runs the seed-independent stages (DC flow, LODF, metrics, graph) once for a case."""
    start = time.perf_counter()
    dc = solve_dc(case)
    sens = compute_lodf(case, dc)
    metrics = compute_metrics(case, dc, sens)
    graph = build_graph(case, metrics)
    return _Prepared(dc, sens, metrics, graph, time.perf_counter() - start)


def _screen_seed(graph, seed, high_m, cfg):
    t0 = time.perf_counter()
    sub = build_subgraph(graph, seed, high_m, cfg.d, cfg.sl)
    weighted = subgraph_weighted_graph(graph, sub)
    t1 = time.perf_counter()
    if len(sub.edge_set) < cfg.x:
        return seed, None, t1 - t0, 0.0
    index = ShortestPathIndex(weighted)
    result = select_group(weighted, cfg.x, forced=[seed], rule=cfg.pair_rule, index=index)
    t2 = time.perf_counter()
    candidate = CandidateSet(
        branches=frozenset(result.group),
        seed=seed,
        gbc_trace=result.scores,
        group=result.group,
    )
    return seed, candidate, t1 - t0, t2 - t1


def screen(case, cfg, prepared=None):
    """Runs the screening pipeline and reports per-stage timings.

    Args:
        case: The network.
        cfg: A ScreeningConfig.
        prepared: Output of prepare(case), to share the seed-independent stages between runs.

    Returns:
        A ScreeningResult. Candidates are deduplicated by branch set, keeping the one with the
        highest final GBC score, and ordered by seed branch index.
    """
    if prepared is None:
        prepared = prepare(case)
    seeds = rank_branches(prepared.metrics, cfg.a_percent)
    high_m = frozenset(seeds)
    if cfg.seed_limit is not None:
        seeds = seeds[: cfg.seed_limit]

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(
                pool.map(lambda s: _screen_seed(prepared.graph, s, high_m, cfg), seeds)
            )
    else:
        outcomes = [_screen_seed(prepared.graph, s, high_m, cfg) for s in seeds]

    best = {}
    skipped = []
    subgraph_time = gbc_time = 0.0
    for seed, candidate, t_sub, t_gbc in sorted(outcomes, key=lambda o: o[0]):
        subgraph_time += t_sub
        gbc_time += t_gbc
        if candidate is None:
            logger.info("seed %d skipped: subgraph has fewer than %d edges", seed, cfg.x)
            skipped.append(seed)
            continue
        kept = best.get(candidate.branches)
        if kept is None or candidate.gbc_score > kept.gbc_score:
            best[candidate.branches] = candidate

    candidates = sorted(best.values(), key=lambda c: c.seed)[: cfg.max_candidates]
    logger.info(
        "screening x=%d d=%d sl=%d: %d seeds, %d candidates",
        cfg.x,
        cfg.d,
        cfg.sl,
        len(seeds),
        len(candidates),
    )
    return ScreeningResult(
        candidates=candidates,
        seeds=seeds,
        skipped=skipped,
        timings={
            "metrics": prepared.seconds,
            "subgraphs": subgraph_time,
            "gbc": gbc_time,
        },
    )


def run_screening(case, cfg):
    """Identifies candidate N-x outage sets; see screen() for the ordering and deduplication."""
    return screen(case, cfg).candidates


def compare_with_baseline(case, cfg, prepared=None):
    """Screens with cfg and with d = 0, the search-level-only subgraphs.

    Returns:
        A list of (CandidateSet, novel) pairs for cfg's candidates, where novel is True when the
        baseline run did not produce the same branch set.
    """
    if prepared is None:
        prepared = prepare(case)
    found = screen(case, cfg, prepared).candidates
    baseline = screen(case, replace(cfg, d=0), prepared).candidates
    known = {c.branches for c in baseline}
    return [(c, c.branches not in known) for c in found]


def timing_sweep(case, d_values, sl_values, x_values, a_percent=DEFAULT_A_PERCENT, threads=1):
    """Times the screening stages over a grid of (d, sl, x); combinations with sl < d are skipped.

    Returns:
        A list of dicts keyed by constants.TIMING_COLUMNS.
    """
    prepared = prepare(case)
    rows = []
    for d in d_values:
        for sl in sl_values:
            if sl < d:
                continue
            for x in x_values:
                cfg = ScreeningConfig(x=x, d=d, sl=sl, a_percent=a_percent, threads=threads)
                start = time.perf_counter()
                result = screen(case, cfg, prepared)
                elapsed = time.perf_counter() - start
                rows.append(
                    {
                        "d": d,
                        "sl": sl,
                        "x": x,
                        "seeds": len(result.seeds),
                        "candidates": len(result.candidates),
                        "metrics_s": result.timings["metrics"],
                        "subgraphs_s": result.timings["subgraphs"],
                        "gbc_s": result.timings["gbc"],
                        "total_s": elapsed,
                    }
                )
    return rows
