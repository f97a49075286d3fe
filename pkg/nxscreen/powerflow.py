# -*- coding: utf-8 -*-

"""Full AC power flow: polar Newton-Raphson with generator reactive limit enforcement."""

from dataclasses import dataclass
import logging
import warnings

import numpy as np
from scipy.sparse import csr_matrix, diags, hstack, vstack
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from .constants import *


__all__ = [
    "AcSolution",
    "make_ybus",
    "bus_power_mismatch",
    "solve_ac",
]

logger = logging.getLogger(__name__)

# slack in MVAr before a reactive limit counts as violated
Q_LIMIT_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class AcSolution:
    """Result of an AC power flow.

    Per-bus arrays use the case's dense bus order (NaN for out-of-service buses), per-branch arrays
    the branch order (0 for inactive branches), per-generator arrays the generator order.
    """

    v_mag: np.ndarray
    v_ang: np.ndarray
    branch_mva_from: np.ndarray
    branch_mva_to: np.ndarray
    gen_p: np.ndarray
    gen_q: np.ndarray
    converged: bool
    iterations: int
    mismatch: float
    start: str = "warm"

    @property
    def branch_mva(self):
        return np.maximum(self.branch_mva_from, self.branch_mva_to)


def _active_branches(case):
    mask = np.zeros(case.n_branch, dtype=bool)
    mask[case.in_service_branches()] = True
    return mask


def make_ybus(case):
    """Builds the bus admittance matrix and the branch from/to admittance matrices.

    Only in-service branches and the shunts of in-service buses are stamped.

    Returns:
        A tuple (Ybus, Yf, Yt) of sparse complex matrices, so that the per-unit branch end currents
        are Yf @ V and Yt @ V.
    """
    n, m = case.n_bus, case.n_branch
    active = _active_branches(case)
    f = np.array([case.bus_index[br.from_bus] for br in case.branches], dtype=int)
    t = np.array([case.bus_index[br.to_bus] for br in case.branches], dtype=int)
    r = np.array([br.resistance for br in case.branches])
    x = np.array([br.reactance for br in case.branches])
    b = np.array([br.charging for br in case.branches])
    ratio = np.array([br.tap for br in case.branches])
    shift = np.array([br.shift for br in case.branches])

    ys = np.zeros(m, dtype=complex)
    ys[active] = 1.0 / (r[active] + 1j * x[active])
    bc = np.where(active, b, 0.0)
    tap = np.where(ratio != 0.0, ratio, 1.0) * np.exp(1j * np.pi / 180.0 * shift)

    ytt = ys + 1j * bc / 2.0
    yff = ytt / (tap * np.conj(tap))
    yft = -ys / np.conj(tap)
    ytf = -ys / tap

    ysh = np.array(
        [(bus.gs + 1j * bus.bs) / case.base_mva if bus.in_service else 0.0 for bus in case.buses]
    )

    rows = np.r_[np.arange(m), np.arange(m)]
    yf = csr_matrix((np.r_[yff, yft], (rows, np.r_[f, t])), shape=(m, n))
    yt = csr_matrix((np.r_[ytf, ytt], (rows, np.r_[f, t])), shape=(m, n))
    cf = csr_matrix((np.ones(m), (np.arange(m), f)), shape=(m, n))
    ct = csr_matrix((np.ones(m), (np.arange(m), t)), shape=(m, n))
    ybus = (cf.T @ yf + ct.T @ yt + diags(ysh)).tocsr()
    return ybus, yf, yt


def _ds_dv(ybus, v):
    ibus = ybus @ v
    diag_v = diags(v)
    diag_i = diags(ibus)
    diag_vnorm = diags(v / np.abs(v))
    ds_dvm = diag_v @ (ybus @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm
    ds_dva = 1j * (diag_v @ (diag_i - ybus @ diag_v).conj())
    return ds_dvm.tocsr(), ds_dva.tocsr()


def bus_power_mismatch(ybus, v, sbus):
    """Complex nodal mismatch V * conj(Ybus V) - Sbus, per unit."""
    return v * np.conj(ybus @ v) - sbus


def _newton(ybus, sbus, v0, pv, pq, tolerance, max_iterations):
    """Plain Newton-Raphson for fixed bus types. Returns (V, converged, iterations, mismatch)."""
    v = v0.copy()
    va, vm = np.angle(v), np.abs(v)
    pvpq = np.r_[pv, pq]
    n_pvpq = len(pvpq)

    def mismatch(volts):
        mis = bus_power_mismatch(ybus, volts, sbus)
        return np.r_[mis[pvpq].real, mis[pq].imag]

    residual = mismatch(v)
    norm = float(np.max(np.abs(residual), initial=0.0))
    if norm < tolerance:
        return v, True, 0, norm

    for iteration in range(1, max_iterations + 1):
        ds_dvm, ds_dva = _ds_dv(ybus, v)
        j11 = ds_dva[pvpq][:, pvpq].real
        j12 = ds_dvm[pvpq][:, pq].real
        j21 = ds_dva[pq][:, pvpq].imag
        j22 = ds_dvm[pq][:, pq].imag
        if len(pq):
            jacobian = vstack([hstack([j11, j12]), hstack([j21, j22])], format="csc")
        else:
            jacobian = j11.tocsc()

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MatrixRankWarning)
            dx = -spsolve(jacobian, residual)
        if not np.all(np.isfinite(dx)):
            return v, False, iteration, np.inf

        va[pvpq] += dx[:n_pvpq]
        vm[pq] += dx[n_pvpq:]
        v = vm * np.exp(1j * va)
        vm, va = np.abs(v), np.angle(v)

        residual = mismatch(v)
        norm = float(np.max(np.abs(residual), initial=0.0))
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            return v, False, iteration, np.inf
        if norm < tolerance:
            return v, True, iteration, norm

    return v, False, max_iterations, norm


class _Model:
    """Per-unit quantities of a case that the solver needs, in dense bus order."""

    def __init__(self, case):
        self.case = case
        self.ybus, self.yf, self.yt = make_ybus(case)
        n = case.n_bus
        self.active = np.array([bus.in_service for bus in case.buses])
        self.p_load = np.array([bus.p_load for bus in case.buses])
        self.q_load = np.array([bus.q_load for bus in case.buses])

        self.gen_bus = np.array([case.bus_index[g.bus] for g in case.generators], dtype=int)
        self.gen_on = np.array([g.status for g in case.generators], dtype=bool)
        if len(self.gen_bus):
            self.gen_on &= self.active[self.gen_bus]

        self.p_gen = np.zeros(n)
        self.q_gen = np.zeros(n)
        self.q_max = np.zeros(n)
        self.q_min = np.zeros(n)
        self.v_set = np.ones(n)
        has_gen = np.zeros(n, dtype=bool)
        for k, gen in enumerate(case.generators):
            if not self.gen_on[k]:
                continue
            i = self.gen_bus[k]
            self.p_gen[i] += gen.p_gen
            self.q_gen[i] += gen.q_gen
            self.q_max[i] += gen.q_max
            self.q_min[i] += gen.q_min
            if not has_gen[i]:
                self.v_set[i] = gen.v_set
            has_gen[i] = True

        slacks = [case.bus_index[b] for b in case.slack_buses()]
        self.slack = slacks[0] if slacks else None
        kinds = [bus.kind for bus in case.buses]
        self.pv = [
            i
            for i in range(n)
            if self.active[i] and kinds[i] == BUS_PV and has_gen[i] and i != self.slack
        ]
        self.has_gen = has_gen

    def initial_voltage(self, flat, pv):
        n = self.case.n_bus
        if flat:
            vm = np.ones(n)
            va = np.zeros(n)
        else:
            vm = np.array([bus.v_mag if bus.v_mag > 0 else 1.0 for bus in self.case.buses])
            va = np.radians([bus.v_ang for bus in self.case.buses])
        controlled = list(pv) + ([self.slack] if self.slack is not None else [])
        for i in controlled:
            if self.has_gen[i]:
                vm[i] = self.v_set[i]
        vm[~self.active] = 1.0
        va[~self.active] = 0.0
        return vm * np.exp(1j * va)

    def sbus(self, q_fixed):
        base = self.case.base_mva
        s = (self.p_gen - self.p_load) + 1j * (q_fixed - self.q_load)
        s[~self.active] = 0.0
        return s / base


def _solve_with_limits(model, flat, enforce_q_limits, tolerance, max_iterations):
    pv = list(model.pv)
    # generators at PQ buses inject their scheduled Q
    q_fixed = model.q_gen.copy()
    v = model.initial_voltage(flat, pv)
    total_iterations = 0
    rounds = Q_LIMIT_ROUNDS if enforce_q_limits else 1

    for round_number in range(1, rounds + 1):
        pq = [
            i
            for i in range(model.case.n_bus)
            if model.active[i] and i != model.slack and i not in pv
        ]
        v, converged, iterations, norm = _newton(
            model.ybus,
            model.sbus(q_fixed),
            v,
            np.array(pv, dtype=int),
            np.array(pq, dtype=int),
            tolerance,
            max_iterations,
        )
        total_iterations += iterations
        if not converged or not enforce_q_limits:
            return v, converged, total_iterations, norm, q_fixed

        q_gen = _bus_reactive_generation(model, v)
        over = [i for i in pv if q_gen[i] > model.q_max[i] + Q_LIMIT_MARGIN]
        under = [i for i in pv if q_gen[i] < model.q_min[i] - Q_LIMIT_MARGIN]
        if not over and not under:
            return v, True, total_iterations, norm, q_fixed
        if round_number == rounds:
            logger.warning(
                "reactive limits still violated at %d PV buses after %d rounds",
                len(over) + len(under),
                rounds,
            )
            return v, True, total_iterations, norm, q_fixed
        for i in over:
            q_fixed[i] = model.q_max[i]
        for i in under:
            q_fixed[i] = model.q_min[i]
        switched = set(over) | set(under)
        logger.debug("switching %d PV buses to PQ at reactive limits", len(switched))
        pv = [i for i in pv if i not in switched]

    return v, False, total_iterations, norm, q_fixed


def _bus_reactive_generation(model, v):
    s = bus_power_mismatch(model.ybus, v, 0.0) * model.case.base_mva
    return s.imag + model.q_load


def _dispatch(model, v):
    """Splits bus-level generation back onto individual generators."""
    case = model.case
    s = bus_power_mismatch(model.ybus, v, 0.0) * case.base_mva
    p_bus = s.real + model.p_load
    q_bus = s.imag + model.q_load

    gen_p = np.array([g.p_gen if on else 0.0 for g, on in zip(case.generators, model.gen_on)])
    gen_q = np.zeros(len(case.generators))
    online = np.flatnonzero(model.gen_on)
    for i in sorted({int(model.gen_bus[k]) for k in online}):
        units = [k for k in online if model.gen_bus[k] == i]
        if i == model.slack:
            others = sum(gen_p[k] for k in units[1:])
            gen_p[units[0]] = p_bus[i] - others
        ranges = np.array([case.generators[k].q_max - case.generators[k].q_min for k in units])
        if ranges.sum() > 0:
            shares = ranges / ranges.sum()
        else:
            shares = np.full(len(units), 1.0 / len(units))
        for k, share in zip(units, shares):
            gen_q[k] = q_bus[i] * share
    return gen_p, gen_q


def solve_ac(
    case,
    tolerance=AC_TOLERANCE,
    max_iterations=AC_MAX_ITERATIONS,
    enforce_q_limits=True,
):
    """Solves the AC power flow of a single-slack case.

    Newton-Raphson in polar coordinates, started from the voltages stored in the case and, if that
    fails, from a flat start. With enforce_q_limits, PV buses whose generators leave their reactive
    range are switched to PQ at the violated limit and the flow is re-solved, for up to
    Q_LIMIT_ROUNDS rounds.

    Args:
        case: The network (one island with one slack bus).
        tolerance: Convergence threshold on the largest nodal mismatch, per unit.
        max_iterations: Newton iterations per solve.
        enforce_q_limits: Whether to apply generator reactive limits.

    Returns:
        An AcSolution. Failure to converge from either start is reported with converged=False;
        this function does not raise for non-convergence.
    """
    model = _Model(case)
    m = case.n_branch
    if model.slack is None:
        logger.info("no slack bus in %s; reporting as unsolved", case.name)
        nan = np.full(case.n_bus, np.nan)
        return AcSolution(
            nan, nan, np.zeros(m), np.zeros(m),
            np.zeros(len(case.generators)), np.zeros(len(case.generators)),
            False, 0, np.inf, "none",
        )

    for start in ("warm", "flat"):
        v, converged, iterations, norm, _ = _solve_with_limits(
            model, start == "flat", enforce_q_limits, tolerance, max_iterations
        )
        if converged:
            break
        logger.info("AC power flow from %s start did not converge", start)

    base = case.base_mva
    active_br = _active_branches(case)
    f = np.array([case.bus_index[br.from_bus] for br in case.branches], dtype=int)
    t = np.array([case.bus_index[br.to_bus] for br in case.branches], dtype=int)
    if converged:
        s_from = v[f] * np.conj(model.yf @ v) * base
        s_to = v[t] * np.conj(model.yt @ v) * base
        mva_from = np.where(active_br, np.abs(s_from), 0.0)
        mva_to = np.where(active_br, np.abs(s_to), 0.0)
        gen_p, gen_q = _dispatch(model, v)
    else:
        mva_from = np.zeros(m)
        mva_to = np.zeros(m)
        gen_p = np.zeros(len(case.generators))
        gen_q = np.zeros(len(case.generators))

    v_mag = np.where(model.active, np.abs(v), np.nan)
    v_ang = np.where(model.active, np.angle(v), np.nan)
    return AcSolution(
        v_mag=v_mag,
        v_ang=v_ang,
        branch_mva_from=mva_from,
        branch_mva_to=mva_to,
        gen_p=gen_p,
        gen_q=gen_q,
        converged=converged,
        iterations=iterations,
        mismatch=norm,
        start=start,
    )
