# -*- coding: utf-8 -*-

"""Validation of outage sets: island split, per-island power flow and violation classification."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math
import time

import networkx as nx
import numpy as np

from .constants import *
from .dc_sensitivities import SingularSystemError, bus_injections, solve_dc
from .powerflow import solve_ac


__all__ = [
    "VIOLATION_OVERFLOW",
    "VIOLATION_UNDERVOLTAGE",
    "VIOLATION_OVERVOLTAGE",
    "ViolationDetail",
    "ViolationReport",
    "ContingencyRecord",
    "ValidationOptions",
    "Island",
    "DcIslandSolution",
    "apply_outage",
    "classify",
    "default_reserve_requirement",
    "validate_contingency",
    "validate_many",
]

logger = logging.getLogger(__name__)

VIOLATION_OVERFLOW = "overflow"
VIOLATION_UNDERVOLTAGE = "undervoltage"
VIOLATION_OVERVOLTAGE = "overvoltage"


@dataclass(frozen=True)
class ViolationDetail:
    """One violated limit. `element` is a branch index for overflows and a bus id otherwise."""

    kind: str
    element: int
    value: float
    limit: float


@dataclass(frozen=True)
class ViolationReport:
    overflow_count: int = 0
    undervoltage_count: int = 0
    overvoltage_count: int = 0
    reserve_limit: bool = False
    unsolved: bool = False
    islanded_load_mw: float = 0.0
    details: tuple = ()

    @property
    def has_violations(self):
        return bool(
            self.overflow_count
            or self.undervoltage_count
            or self.overvoltage_count
            or self.reserve_limit
            or self.unsolved
            or self.islanded_load_mw > 0.0
        )


@dataclass(frozen=True)
class ContingencyRecord:
    """A validated outage set: branch indices in ascending order, their report and wall time (s)."""

    x: int
    branches: tuple
    report: ViolationReport
    runtime: float = 0.0
    gbc_score: float = None

    def __post_init__(self):
        if self.x != len(self.branches):
            raise ValueError("x=%d does not match %d branches" % (self.x, len(self.branches)))


@dataclass(frozen=True)
class ValidationOptions:
    """How outage sets are validated.

    Attributes:
        method: "ac" for the Newton-Raphson power flow, "dc" for a DC re-solve (no voltages).
        reserve_req: Required spinning reserve in MW; None takes the largest online generator
            capacity of the base case.
        enforce_q_limits: Whether the AC solver switches PV buses at their reactive limits.
        tolerance: AC mismatch tolerance, per unit.
        max_iterations: Newton iterations per start.
    """

    method: str = METHOD_AC
    reserve_req: float = None
    enforce_q_limits: bool = True
    tolerance: float = AC_TOLERANCE
    max_iterations: int = AC_MAX_ITERATIONS

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError("Unknown method %r (expected one of %s)" % (self.method, ", ".join(METHODS)))
        if self.reserve_req is not None and (self.reserve_req < 0 or not math.isfinite(self.reserve_req)):
            raise ValueError("reserve requirement must be a nonnegative number of MW")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True, eq=False)
class Island:
    """One connected component left by an outage.

    Attributes:
        case: The component as a standalone case (None when it has no online generator).
        bus_ids: Bus ids of the component.
        branch_map: Island branch index -> branch index in the full case.
        energized: Whether the component has an online generator.
        shed_load_mw: Load lost because the component is not energized.
    """

    case: object
    bus_ids: tuple
    branch_map: tuple = ()
    energized: bool = True
    shed_load_mw: float = 0.0

    @property
    def load_mw(self):
        if self.case is None:
            return self.shed_load_mw
        return sum(bus.p_load for bus in self.case.buses)


@dataclass(frozen=True, eq=False)
class DcIslandSolution:
    """DC counterpart of AcSolution, restricted to what classification reads."""

    branch_mva: np.ndarray
    gen_p: np.ndarray
    converged: bool
    v_mag: np.ndarray = field(default=None)


def default_reserve_requirement(case):
    """Capacity (MW) of the largest online generator."""
    return max((g.p_max for g in case.generators if g.status), default=0.0)


def _check_outage(case, branches):
    for b in branches:
        if not 0 <= b < case.n_branch:
            raise ValueError("Branch index %d out of range" % b)
        if not case.branches[b].status:
            raise ValueError("Branch %s is already out of service" % case.branch_label(b))


def apply_outage(case, branches):
    """Switches branches out and splits the network into islands.

    Islands with an online generator come back as solvable cases. An island without a slack bus
    gets one at the bus of its largest online generator (by p_max, lowest generator index on
    ties). Islands without generation come back with case=None and their load as shed load.

    Args:
        case: The network.
        branches: In-service branch indices to remove.

    Returns:
        A list of Island, ordered by smallest bus id.
    """
    branches = set(branches)
    _check_outage(case, branches)
    outaged = case.with_branch_status(branches, False)
    in_service = outaged.in_service_branches()

    graph = nx.Graph()
    graph.add_nodes_from(bus.id for bus in outaged.buses if bus.in_service)
    graph.add_edges_from(outaged.branches[i].ends for i in in_service)
    components = sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0])

    islands = []
    for component in components:
        members = set(component)
        buses = [outaged.buses[outaged.bus_index[b]] for b in component]
        gens = [g for g in outaged.generators if g.bus in members]
        online = [k for k, g in enumerate(gens) if g.status]
        if not online:
            shed = sum(bus.p_load for bus in buses)
            if shed > 0.0:
                logger.debug("island %s has no generation; %.3g MW shed", component, shed)
            islands.append(Island(None, tuple(component), energized=False, shed_load_mw=shed))
            continue

        if not any(bus.kind == BUS_SLACK for bus in buses):
            promoted = max(online, key=lambda k: (gens[k].p_max, -k))
            slack_bus = gens[promoted].bus
            logger.debug("promoting bus %d to slack in island %s", slack_bus, component)
            buses = [replace(bus, kind=BUS_SLACK) if bus.id == slack_bus else bus for bus in buses]

        branch_map = tuple(
            i for i in in_service if outaged.branches[i].from_bus in members
        )
        sub = replace(
            outaged,
            buses=tuple(buses),
            branches=tuple(outaged.branches[i] for i in branch_map),
            generators=tuple(gens),
            name="%s_island_%d" % (case.name, component[0]),
        )
        islands.append(Island(sub, tuple(component), branch_map))
    return islands


def _solve_dc_island(island):
    sub = island.case
    try:
        dc = solve_dc(sub)
    except SingularSystemError as e:
        logger.info("DC solve failed in %s: %s", sub.name, e)
        return DcIslandSolution(np.zeros(sub.n_branch), np.zeros(len(sub.generators)), False)

    gen_p = np.array([g.p_gen if g.status else 0.0 for g in sub.generators])
    gen_p += _share_imbalance(sub, -float(np.sum(bus_injections(sub))))
    return DcIslandSolution(np.abs(dc.flows), gen_p, True)


def _share_imbalance(sub, imbalance):
    """Splits an island's active power imbalance over its units.

    The first online unit at the slack bus takes all of it. Without one, every online unit takes a
    share proportional to p_max (equal shares when all p_max are zero).
    """
    share = np.zeros(len(sub.generators))
    slack_bus = sub.slack_buses()[0]
    online = [k for k, g in enumerate(sub.generators) if g.status]
    for k in online:
        if sub.generators[k].bus == slack_bus:
            share[k] = imbalance
            return share
    if not online:
        return share
    weights = np.array([max(sub.generators[k].p_max, 0.0) for k in online])
    if weights.sum() <= 0.0:
        weights = np.ones(len(online))
    share[online] = imbalance * weights / weights.sum()
    return share


def _solve_island(island, options):
    if options.method == METHOD_DC:
        return _solve_dc_island(island)
    return solve_ac(
        island.case,
        tolerance=options.tolerance,
        max_iterations=options.max_iterations,
        enforce_q_limits=options.enforce_q_limits,
    )


def classify(solutions, islands, case, reserve_req):
    """Turns per-island power flow results into a violation report.

    Args:
        solutions: One entry per island: an AcSolution or DcIslandSolution, or None for islands
            without generation.
        islands: The islands returned by apply_outage.
        case: The full network (for limits and labels).
        reserve_req: Required reserve in MW.

    Returns:
        A ViolationReport. Unsolved islands contribute no limit violations and their generators
        count at scheduled output.
    """
    details = []
    unsolved = False
    shed = 0.0
    headroom = 0.0
    for island, sol in zip(islands, solutions):
        if not island.energized:
            shed += island.shed_load_mw
            continue
        sub = island.case
        carries_load = island.load_mw > 0.0
        if sol is None or not sol.converged:
            unsolved = True
            if carries_load:
                headroom += sum(g.p_max - g.p_gen for g in sub.generators if g.status)
            continue

        flows = sol.branch_mva
        for k, original in enumerate(island.branch_map):
            rate = case.branches[original].rate_a
            if rate > 0.0 and flows[k] > rate:
                details.append(ViolationDetail(VIOLATION_OVERFLOW, original, float(flows[k]), rate))

        if sol.v_mag is not None:
            for i, bus in enumerate(sub.buses):
                vm = sol.v_mag[i]
                if vm < bus.v_min:
                    details.append(ViolationDetail(VIOLATION_UNDERVOLTAGE, bus.id, float(vm), bus.v_min))
                elif vm > bus.v_max:
                    details.append(ViolationDetail(VIOLATION_OVERVOLTAGE, bus.id, float(vm), bus.v_max))

        if carries_load:
            headroom += sum(
                g.p_max - sol.gen_p[k] for k, g in enumerate(sub.generators) if g.status
            )

    counts = {kind: 0 for kind in (VIOLATION_OVERFLOW, VIOLATION_UNDERVOLTAGE, VIOLATION_OVERVOLTAGE)}
    for detail in details:
        counts[detail.kind] += 1
    return ViolationReport(
        overflow_count=counts[VIOLATION_OVERFLOW],
        undervoltage_count=counts[VIOLATION_UNDERVOLTAGE],
        overvoltage_count=counts[VIOLATION_OVERVOLTAGE],
        reserve_limit=headroom < reserve_req,
        unsolved=unsolved,
        islanded_load_mw=shed,
        details=tuple(details),
    )


def validate_contingency(case, branches, options=None, gbc_score=None):
    """Removes an outage set, solves every island and classifies the result.

    Args:
        case: The base network.
        branches: Branch indices of the outage set.
        options: ValidationOptions; defaults to an AC validation.
        gbc_score: Screening score to carry on the record.

    Returns:
        A ContingencyRecord.
    """
    if options is None:
        options = ValidationOptions()
    reserve_req = options.reserve_req
    if reserve_req is None:
        reserve_req = default_reserve_requirement(case)

    start = time.perf_counter()
    islands = apply_outage(case, branches)
    solutions = [_solve_island(island, options) if island.energized else None for island in islands]
    report = classify(solutions, islands, case, reserve_req)
    elapsed = time.perf_counter() - start

    ordered = tuple(sorted(branches))
    logger.debug(
        "outage %s: %d islands, %d overflow, %d under, %d over, reserve=%s, unsolved=%s",
        [case.branch_label(b) for b in ordered],
        len(islands),
        report.overflow_count,
        report.undervoltage_count,
        report.overvoltage_count,
        report.reserve_limit,
        report.unsolved,
    )
    return ContingencyRecord(
        x=len(ordered),
        branches=ordered,
        report=report,
        runtime=elapsed,
        gbc_score=gbc_score,
    )


def validate_many(case, sets, options=None, threads=1, scores=None):
    """Validates several outage sets, returning records in the order of `sets`.

    Args:
        case: The base network (read-only; every validation works on its own copy).
        sets: Iterable of branch index collections.
        options: ValidationOptions shared by all sets.
        threads: Worker threads.
        scores: Optional GBC scores aligned with `sets`.
    """
    sets = [tuple(s) for s in sets]
    if scores is None:
        scores = [None] * len(sets)
    if options is None:
        options = ValidationOptions()
    if options.reserve_req is None:
        options = replace(options, reserve_req=default_reserve_requirement(case))
    if threads < 1:
        raise ValueError("threads must be at least 1")

    def work(item):
        branches, score = item
        return validate_contingency(case, branches, options, score)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, zip(sets, scores)))
    else:
        records = [work(item) for item in zip(sets, scores)]
    logger.info("validated %d outage sets", len(records))
    return records
