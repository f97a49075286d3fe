# -*- coding: utf-8 -*-

"""Lossless DC power flow and the linear sensitivities derived from it (ISF, PTDF, LODF)."""

from dataclasses import dataclass
import logging

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu

from .constants import *


__all__ = [
    "DcSolution",
    "DcSensitivities",
    "SingularSystemError",
    "bus_injections",
    "make_bdc",
    "solve_dc",
    "compute_lodf",
    "dc_outage_flows",
    "dc_balance_residual",
    "graph_bridges",
    "is_connected",
]

logger = logging.getLogger(__name__)


class SingularSystemError(ValueError):
    """Raised when the reduced susceptance matrix cannot be factorized."""


@dataclass(frozen=True, eq=False)
class DcSolution:
    """Bus angles (radians, dense bus order) and branch flows (MW, branch order)."""

    theta: np.ndarray
    flows: np.ndarray
    injections: np.ndarray


@dataclass(frozen=True, eq=False)
class DcSensitivities:
    """Slack-referenced injection shift factors and line outage distribution factors.

    ``lodf[l, k]`` is the fraction of branch k's pre-outage flow that lands on branch l when k
    trips. Columns of bridge and out-of-service branches hold NaN.
    """

    isf: np.ndarray
    lodf: np.ndarray
    base_flow: np.ndarray
    bridge: np.ndarray
    in_service: np.ndarray


def _branch_mask(case, outaged=()):
    outaged = set(outaged)
    mask = np.zeros(case.n_branch, dtype=bool)
    for i in case.in_service_branches():
        if i not in outaged:
            mask[i] = True
    return mask


def _slack_index(case):
    slacks = case.slack_buses()
    if len(slacks) != 1:
        raise SingularSystemError(
            "DC power flow needs exactly one slack bus, found %d" % len(slacks)
        )
    return case.bus_index[slacks[0]]


def is_connected(case, outaged=()):
    """Tests whether the in-service buses form a single island once `outaged` is removed."""
    graph = nx.Graph()
    graph.add_nodes_from(bus.id for bus in case.buses if bus.in_service)
    mask = _branch_mask(case, outaged)
    graph.add_edges_from(case.branches[i].ends for i in np.flatnonzero(mask))
    return graph.number_of_nodes() > 0 and nx.is_connected(graph)


def bus_injections(case):
    """Net active injection (MW) per bus: online generation minus load and shunt conductance."""
    p = np.zeros(case.n_bus)
    for gen in case.generators:
        if gen.status:
            p[case.bus_index[gen.bus]] += gen.p_gen
    for i, bus in enumerate(case.buses):
        if bus.in_service:
            p[i] -= bus.p_load + bus.gs
        else:
            p[i] = 0.0
    return p


def make_bdc(case, outaged=()):
    """Builds the DC susceptance matrices.

    Args:
        case: The network.
        outaged: Branch indices to treat as switched out.

    Returns:
        A tuple (Bbus, Bf, b): the nodal susceptance matrix (buses x buses), the branch-flow matrix
        (branches x buses) mapping angles to per-unit flows, and the per-branch susceptance vector
        (zero for inactive branches).
    """
    mask = _branch_mask(case, outaged)
    m, n = case.n_branch, case.n_bus
    f = np.array([case.bus_index[br.from_bus] for br in case.branches], dtype=int)
    t = np.array([case.bus_index[br.to_bus] for br in case.branches], dtype=int)
    x = np.array([br.reactance for br in case.branches], dtype=float)
    b = np.zeros(m)
    b[mask] = 1.0 / x[mask]

    rows = np.r_[np.arange(m), np.arange(m)]
    cols = np.r_[f, t]
    bf = csr_matrix((np.r_[b, -b], (rows, cols)), shape=(m, n))
    incidence = csr_matrix(
        (np.r_[np.ones(m), -np.ones(m)], (rows, cols)), shape=(m, n)
    )
    bbus = (incidence.T @ bf).tocsr()
    return bbus, bf, b


def solve_dc(case, outaged=()):
    """Solves the lossless DC power flow B.theta = P with the slack angle at zero.

    Raises:
        SingularSystemError: If the in-service network is not a single island or the reduced
            susceptance matrix is singular.
    """
    if not is_connected(case, outaged):
        raise SingularSystemError("in-service network is not a single island")

    slack = _slack_index(case)
    bbus, bf, _ = make_bdc(case, outaged)
    p = bus_injections(case)
    active = np.array([bus.in_service for bus in case.buses])
    keep = np.flatnonzero(active & (np.arange(case.n_bus) != slack))

    theta = np.zeros(case.n_bus)
    if keep.size:
        reduced = bbus[keep][:, keep].tocsc()
        try:
            theta[keep] = splu(reduced).solve(p[keep] / case.base_mva)
        except RuntimeError as e:
            raise SingularSystemError("susceptance matrix is singular: %s" % e)
        if not np.all(np.isfinite(theta)):
            raise SingularSystemError("susceptance matrix is singular")

    flows = (bf @ theta) * case.base_mva
    return DcSolution(theta=theta, flows=flows, injections=p)


def dc_balance_residual(case, dc):
    """Largest nodal active power mismatch (p.u.) over the non-slack in-service buses."""
    bbus, _, _ = make_bdc(case)
    mismatch = bbus @ dc.theta - dc.injections / case.base_mva
    slack = _slack_index(case)
    active = np.array([bus.in_service for bus in case.buses])
    active[slack] = False
    return float(np.max(np.abs(mismatch[active]), initial=0.0))


def dc_outage_flows(case, outaged):
    """Re-solves the DC power flow with the given branches removed.

    Returns:
        The post-outage DcSolution, or None when the outage splits the network.
    """
    if not is_connected(case, outaged):
        return None
    return solve_dc(case, outaged)


def graph_bridges(case):
    """Flags each in-service branch whose removal disconnects the in-service multigraph."""
    graph = nx.MultiGraph()
    graph.add_nodes_from(bus.id for bus in case.buses if bus.in_service)
    in_service = case.in_service_branches()
    graph.add_edges_from(case.branches[i].ends for i in in_service)
    pairs = set()
    for u, v in nx.bridges(graph):
        pairs.add((u, v))
        pairs.add((v, u))
    flags = np.zeros(case.n_branch, dtype=bool)
    for i in in_service:
        flags[i] = case.branches[i].ends in pairs
    return flags


def compute_lodf(case, dc):
    """Computes ISF and LODF matrices for a connected case.

    The ISF is obtained from a sparse LU factorization of the reduced susceptance matrix. For an
    outage of branch k = (m, n) the LODF column is PTDF_(m,n) / (1 - PTDF_k,(m,n)); a
    denominator within BRIDGE_TOLERANCE of zero marks k as a bridge and its column is left NaN.

    Args:
        case: The network.
        dc: Its base-case DC solution.

    Returns:
        DcSensitivities for the case.
    """
    slack = _slack_index(case)
    bbus, bf, _ = make_bdc(case)
    active = np.array([bus.in_service for bus in case.buses])
    keep = np.flatnonzero(active & (np.arange(case.n_bus) != slack))
    in_service = _branch_mask(case)

    isf = np.zeros((case.n_branch, case.n_bus))
    if keep.size:
        try:
            lu = splu(bbus[keep][:, keep].tocsc())
        except RuntimeError as e:
            raise SingularSystemError("susceptance matrix is singular: %s" % e)
        inverse = lu.solve(np.eye(keep.size))
        isf[:, keep] = bf[:, keep] @ inverse

    f = np.array([case.bus_index[br.from_bus] for br in case.branches], dtype=int)
    t = np.array([case.bus_index[br.to_bus] for br in case.branches], dtype=int)
    ptdf = isf[:, f] - isf[:, t]
    denominator = 1.0 - np.diag(ptdf)

    bridge = in_service & (np.abs(denominator) < BRIDGE_TOLERANCE)
    usable = in_service & ~bridge

    lodf = np.full((case.n_branch, case.n_branch), np.nan)
    cols = np.flatnonzero(usable)
    lodf[:, cols] = ptdf[:, cols] / denominator[cols]
    lodf[cols, cols] = -1.0

    if cols.size and np.nanmax(np.abs(lodf[:, cols])) > LODF_SANITY_BOUND:
        logger.warning(
            "LODF magnitude above %g: near-singular outage denominators", LODF_SANITY_BOUND
        )
    logger.info(
        "computed LODF for %d branches, %d bridges", int(in_service.sum()), int(bridge.sum())
    )

    return DcSensitivities(
        isf=isf,
        lodf=lodf,
        base_flow=np.array(dc.flows, dtype=float),
        bridge=bridge,
        in_service=in_service,
    )
