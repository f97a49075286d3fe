# -*- coding: utf-8 -*-

from dataclasses import dataclass
import math

import numpy as np

from .constants import *


__all__ = [
    "BranchMetrics",
    "compute_nlodf",
    "compute_m",
    "compute_metrics",
    "rank_branches",
]


@dataclass(frozen=True, eq=False)
class BranchMetrics:
    """Per-branch impact metrics.

    Attributes:
        nlodf: Raw mean/std ratio of each outage's |LODF| column (inf for bridges and zero spread).
        capped: min(nlodf, 1).
        m_value: Base-case flow (MW) scaled by the capped factor.
        rank: All branch indices ordered by descending |m_value|, ties by ascending index.
        in_service: Which branches the metrics apply to. Out-of-service branches carry nan/0.
    """

    nlodf: np.ndarray
    capped: np.ndarray
    m_value: np.ndarray
    rank: np.ndarray
    in_service: np.ndarray


def compute_nlodf(sens, i):
    """Dispersion-normalised impact of an outage of branch i.

    Takes the absolute LODFs of every other in-service branch for the outage of i and returns their
    mean divided by their population standard deviation.

    Args:
        sens: DcSensitivities of the case.
        i: An in-service branch index.

    Returns:
        The NLODF value, or math.inf when i is a bridge or the column has no spread.
    """
    if sens.bridge[i]:
        return math.inf
    mask = sens.in_service.copy()
    mask[i] = False
    column = np.abs(sens.lodf[mask, i])
    column = column[~np.isnan(column)]
    if column.size == 0:
        return math.inf
    std = float(np.std(column))
    if std == 0.0:
        return math.inf
    return float(np.mean(column)) / std


def compute_m(dc, nlodf_i, i):
    """Returns PF(i) * min(NLODF(i), 1) in MW, keeping the sign of the base-case flow."""
    return float(dc.flows[i]) * min(nlodf_i, 1.0)


def _descending_abs_order(values):
    # lexsort sorts by the last key first
    return np.lexsort((np.arange(len(values)), -np.abs(values)))


def compute_metrics(case, dc, sens):
    """Evaluates NLODF and M for every in-service branch and ranks them by |M|."""
    n = case.n_branch
    nlodf = np.full(n, np.nan)
    m_value = np.zeros(n)
    for i in np.flatnonzero(sens.in_service):
        nlodf[i] = compute_nlodf(sens, i)
        m_value[i] = compute_m(dc, nlodf[i], i)
    capped = np.minimum(nlodf, 1.0)
    order = _descending_abs_order(m_value)
    # out-of-service branches go last
    order = np.r_[order[sens.in_service[order]], order[~sens.in_service[order]]]
    return BranchMetrics(
        nlodf=nlodf,
        capped=capped,
        m_value=m_value,
        rank=order,
        in_service=sens.in_service.copy(),
    )


def rank_branches(metrics, a_percent):
    """Selects the top a% of in-service branches by |M|.

    Args:
        metrics: BranchMetrics of the case.
        a_percent: Share of branches to return, 0 < a_percent <= 100.

    Returns:
        A list of ceil(a_percent / 100 * branch count) branch indices, largest |M| first, ties
        broken by ascending branch index.
    """
    if not 0.0 < a_percent <= 100.0:
        raise ValueError("a_percent must lie in (0, 100], got %g" % a_percent)
    count = int(np.count_nonzero(metrics.in_service))
    # float noise such as 3.0000000000000004 must not round up
    wanted = min(count, int(math.ceil(round(a_percent / 100.0 * count, 9))))
    return [int(i) for i in metrics.rank[:wanted]]
