# -*- coding: utf-8 -*-

"""Reading and writing of matrix-tabular power system case files.

The format is the de-facto standard one used by the public synthetic grid
libraries: a ``function mpc = name`` header followed by ``mpc.baseMVA``,
``mpc.bus``, ``mpc.gen`` and ``mpc.branch`` assignments. Any other ``mpc.*``
assignment (cost tables, name cell arrays, ...) is kept verbatim so a parsed
case can be written back out unchanged.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
import importlib.resources
import logging
import os
import re

import networkx as nx

from .constants import *


__all__ = [
    "Bus",
    "Branch",
    "Generator",
    "NetworkCase",
    "CaseFormatError",
    "parse_case",
    "serialize_case",
    "resolve_case_path",
    "load_case",
]

logger = logging.getLogger(__name__)

BUS_MIN_COLUMNS = 13
GEN_MIN_COLUMNS = 10
BRANCH_MIN_COLUMNS = 11

_ASSIGNMENT = re.compile(r"^\s*mpc\.(\w+)\s*=\s*(.*)$")
_FUNCTION = re.compile(r"^\s*function\s+\w+\s*=\s*(\w+)")
_TABLES = ("bus", "gen", "branch")


class CaseFormatError(ValueError):
    """Raised when a case file cannot be turned into a valid NetworkCase."""

    def __init__(self, line_number, description):
        self.line_number = line_number
        self.description = description
        super().__init__("line %d: %s" % (line_number, description))


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str
    p_load: float
    q_load: float
    gs: float
    bs: float
    area: float
    v_mag: float
    v_ang: float
    base_kv: float
    zone: float
    v_max: float
    v_min: float
    in_service: bool = True
    extra: tuple = ()


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    resistance: float
    reactance: float
    charging: float
    rate_a: float
    rate_b: float = 0.0
    rate_c: float = 0.0
    tap: float = 0.0
    shift: float = 0.0
    status: bool = True
    ang_min: float = -360.0
    ang_max: float = 360.0
    extra: tuple = ()

    @property
    def ends(self):
        return self.from_bus, self.to_bus


@dataclass(frozen=True)
class Generator:
    bus: int
    p_gen: float
    q_gen: float
    q_max: float
    q_min: float
    v_set: float
    m_base: float
    status: bool
    p_max: float
    p_min: float
    extra: tuple = ()


@dataclass(frozen=True)
class NetworkCase:
    """An immutable grid model. Out-of-service elements are kept and flagged."""

    base_mva: float
    buses: tuple
    branches: tuple
    generators: tuple
    name: str = "case"
    version: str = "2"
    extra_sections: tuple = field(default=())

    @cached_property
    def bus_index(self):
        """Dense index of every bus id, in table order."""
        return {bus.id: i for i, bus in enumerate(self.buses)}

    @property
    def n_bus(self):
        return len(self.buses)

    @property
    def n_branch(self):
        return len(self.branches)

    def in_service_branches(self):
        return [
            i
            for i, br in enumerate(self.branches)
            if br.status
            and self.buses[self.bus_index[br.from_bus]].in_service
            and self.buses[self.bus_index[br.to_bus]].in_service
        ]

    def slack_buses(self):
        return [bus.id for bus in self.buses if bus.in_service and bus.kind == BUS_SLACK]

    def with_branch_status(self, indices, in_service):
        """Returns a copy with the given branches switched in or out of service."""
        indices = set(indices)
        branches = tuple(
            replace(br, status=bool(in_service)) if i in indices else br
            for i, br in enumerate(self.branches)
        )
        return replace(self, branches=branches)

    def parallel_circuits(self, index):
        """Indices of every branch between the same two buses as `index`, in table order."""
        ends = frozenset(self.branches[index].ends)
        return [i for i, br in enumerate(self.branches) if frozenset(br.ends) == ends]

    def find_branch(self, from_id, to_id, circuit=None, exclude=()):
        """Resolves a [from, to] bus pair (either orientation) to a branch index.

        Args:
            from_id: Bus id at one end.
            to_id: Bus id at the other end.
            circuit: 1-based circuit number among the parallel branches of the pair, in table order.
                Without it, the first in-service circuit not in `exclude` is returned.
            exclude: Branch indices already taken.
        """
        matches = [
            i
            for i, br in enumerate(self.branches)
            if (br.from_bus, br.to_bus) in ((from_id, to_id), (to_id, from_id))
        ]
        if not matches:
            raise ValueError("No branch between buses %d and %d" % (from_id, to_id))
        if circuit is not None:
            if not 1 <= circuit <= len(matches):
                raise ValueError(
                    "Buses %d and %d have %d circuit(s), no circuit %d"
                    % (from_id, to_id, len(matches), circuit)
                )
            return matches[circuit - 1]
        free = [i for i in matches if i not in exclude]
        if not free:
            raise ValueError(
                "Branch [%d,%d] listed more often than its %d circuit(s)" % (from_id, to_id, len(matches))
            )
        for i in free:
            if self.branches[i].status:
                return i
        return free[0]

    def branch_label(self, index):
        """[from, to] bus ids, plus the 1-based circuit number when the pair has parallel branches."""
        br = self.branches[index]
        circuits = self.parallel_circuits(index)
        if len(circuits) == 1:
            return [br.from_bus, br.to_bus]
        return [br.from_bus, br.to_bus, circuits.index(index) + 1]


def _strip_comment(line):
    in_quote = False
    for i, ch in enumerate(line):
        if ch == "'":
            in_quote = not in_quote
        elif ch == "%" and not in_quote:
            return line[:i]
    return line


def _to_float(token, line_number):
    try:
        return float(token)
    except ValueError:
        raise CaseFormatError(line_number, "not a number: %r" % token)


def _split_rows(text, line_number):
    """Splits matrix body text into rows on ';'."""
    rows = []
    for chunk in text.split(";"):
        tokens = chunk.replace(",", " ").split()
        if tokens:
            rows.append((line_number, [_to_float(t, line_number) for t in tokens]))
    return rows


def _read_sections(lines):
    """Groups the case file into scalar assignments, numeric tables and raw sections."""
    name = "case"
    scalars = {}
    tables = {}
    table_lines = {}
    raw_sections = []
    current = None
    raw = None
    raw_closer = None

    for line_number, line in enumerate(lines, start=1):
        if raw is not None:
            raw.append(line)
            if raw_closer in _strip_comment(line):
                raw_sections.append("\n".join(raw))
                raw = None
            continue

        content = _strip_comment(line)

        if current is not None:
            closing = content.find("]")
            body = content if closing < 0 else content[:closing]
            tables[current].extend(_split_rows(body, line_number))
            if closing >= 0:
                current = None
            continue

        if not content.strip():
            continue

        m = _FUNCTION.match(content)
        if m:
            name = m.group(1)
            continue

        m = _ASSIGNMENT.match(content)
        if m is None:
            raise CaseFormatError(line_number, "unexpected content: %s" % line.strip())

        key, rest = m.group(1), m.group(2).strip()
        if key in _TABLES:
            if not rest.startswith("["):
                raise CaseFormatError(line_number, "mpc.%s must be a matrix" % key)
            if key in tables:
                raise CaseFormatError(line_number, "duplicate mpc.%s table" % key)
            tables[key] = []
            table_lines[key] = line_number
            body = rest[1:]
            closing = body.find("]")
            if closing >= 0:
                tables[key].extend(_split_rows(body[:closing], line_number))
            else:
                tables[key].extend(_split_rows(body, line_number))
                current = key
        elif key in ("baseMVA", "version"):
            scalars[key] = (line_number, rest.rstrip(";").strip())
        else:
            opener = "[" if "[" in rest else ("{" if "{" in rest else None)
            closer = {"[": "]", "{": "}"}.get(opener)
            if closer is None or closer in rest:
                raw_sections.append(line)
            else:
                raw = [line]
                raw_closer = closer

    if current is not None:
        raise CaseFormatError(len(lines), "unterminated mpc.%s table" % current)
    if raw is not None:
        raise CaseFormatError(len(lines), "unterminated assignment")

    return name, scalars, tables, table_lines, raw_sections


def _parse_bus(line_number, row):
    if len(row) < BUS_MIN_COLUMNS:
        raise CaseFormatError(
            line_number, "bus row needs %d columns, got %d" % (BUS_MIN_COLUMNS, len(row))
        )
    code = int(row[1])
    if code == BUS_TYPE_ISOLATED:
        kind, in_service = BUS_PQ, False
    elif code in BUS_TYPE_CODES:
        kind, in_service = BUS_TYPE_CODES[code], True
    else:
        raise CaseFormatError(line_number, "unknown bus type code %d" % code)

    v_max, v_min = row[11], row[12]
    if v_max == 0.0 and v_min == 0.0:
        v_max, v_min = DEFAULT_V_MAX, DEFAULT_V_MIN
    if not v_min < v_max:
        raise CaseFormatError(
            line_number, "bus %d has Vmin %g not below Vmax %g" % (row[0], v_min, v_max)
        )

    return Bus(
        id=int(row[0]),
        kind=kind,
        p_load=row[2],
        q_load=row[3],
        gs=row[4],
        bs=row[5],
        area=row[6],
        v_mag=row[7],
        v_ang=row[8],
        base_kv=row[9],
        zone=row[10],
        v_max=v_max,
        v_min=v_min,
        in_service=in_service,
        extra=tuple(row[BUS_MIN_COLUMNS:]),
    )


def _parse_gen(line_number, row):
    if len(row) < GEN_MIN_COLUMNS:
        raise CaseFormatError(
            line_number, "gen row needs %d columns, got %d" % (GEN_MIN_COLUMNS, len(row))
        )
    return Generator(
        bus=int(row[0]),
        p_gen=row[1],
        q_gen=row[2],
        q_max=row[3],
        q_min=row[4],
        v_set=row[5],
        m_base=row[6],
        status=row[7] > 0,
        p_max=row[8],
        p_min=row[9],
        extra=tuple(row[GEN_MIN_COLUMNS:]),
    )


def _parse_branch(line_number, row):
    if len(row) < BRANCH_MIN_COLUMNS:
        raise CaseFormatError(
            line_number,
            "branch row needs %d columns, got %d" % (BRANCH_MIN_COLUMNS, len(row)),
        )
    return Branch(
        from_bus=int(row[0]),
        to_bus=int(row[1]),
        resistance=row[2],
        reactance=row[3],
        charging=row[4],
        rate_a=row[5],
        rate_b=row[6],
        rate_c=row[7],
        tap=row[8],
        shift=row[9],
        status=row[10] > 0,
        ang_min=row[11] if len(row) > 11 else -360.0,
        ang_max=row[12] if len(row) > 12 else 360.0,
        extra=tuple(row[13:]),
    )


def _check_islands(buses, branches, bus_lines):
    graph = nx.MultiGraph()
    in_service = {bus.id for bus in buses if bus.in_service}
    graph.add_nodes_from(in_service)
    for br in branches:
        if br.status and br.from_bus in in_service and br.to_bus in in_service:
            graph.add_edge(br.from_bus, br.to_bus)

    kinds = {bus.id: bus.kind for bus in buses}
    for component in nx.connected_components(graph):
        slacks = sorted(b for b in component if kinds[b] == BUS_SLACK)
        first = min(component, key=lambda b: bus_lines[b])
        if not slacks:
            raise CaseFormatError(
                bus_lines[first],
                "island containing bus %d has no slack bus" % first,
            )
        if len(slacks) > 1:
            raise CaseFormatError(
                bus_lines[slacks[1]],
                "island containing bus %d has %d slack buses" % (first, len(slacks)),
            )


def parse_case(text):
    """Parses a case file into a NetworkCase.

    Args:
        text: The case file contents, either as a string or an iterable of lines.

    Returns:
        A NetworkCase satisfying all model invariants.

    Raises:
        CaseFormatError: On malformed tables, a missing slack bus, dangling branch endpoints or zero
            branch reactance. The error carries the offending line number.
    """
    lines = text.splitlines() if isinstance(text, str) else [l.rstrip("\n") for l in text]
    name, scalars, tables, table_lines, raw_sections = _read_sections(lines)

    if "baseMVA" not in scalars:
        raise CaseFormatError(1, "missing mpc.baseMVA")
    base_line, base_text = scalars["baseMVA"]
    base_mva = _to_float(base_text, base_line)
    if base_mva <= 0:
        raise CaseFormatError(base_line, "baseMVA must be positive")
    version = scalars.get("version", (0, "'2'"))[1].strip("'\"")

    for key in _TABLES:
        if key not in tables:
            raise CaseFormatError(len(lines), "missing mpc.%s table" % key)
    if not tables["bus"]:
        raise CaseFormatError(table_lines["bus"], "empty bus table")

    buses = []
    bus_lines = {}
    for line_number, row in tables["bus"]:
        bus = _parse_bus(line_number, row)
        if bus.id in bus_lines:
            raise CaseFormatError(line_number, "duplicate bus id %d" % bus.id)
        bus_lines[bus.id] = line_number
        buses.append(bus)

    generators = []
    for line_number, row in tables["gen"]:
        gen = _parse_gen(line_number, row)
        if gen.bus not in bus_lines:
            raise CaseFormatError(line_number, "generator at unknown bus %d" % gen.bus)
        generators.append(gen)

    branches = []
    for line_number, row in tables["branch"]:
        br = _parse_branch(line_number, row)
        for end in br.ends:
            if end not in bus_lines:
                raise CaseFormatError(
                    line_number, "branch references unknown bus %d" % end
                )
        if br.status and br.reactance == 0.0:
            raise CaseFormatError(
                line_number,
                "branch %d-%d has zero reactance" % (br.from_bus, br.to_bus),
            )
        branches.append(br)

    _check_islands(buses, branches, bus_lines)

    case = NetworkCase(
        base_mva=base_mva,
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(generators),
        name=name,
        version=version,
        extra_sections=tuple(raw_sections),
    )
    logger.debug(
        "parsed %s: %d buses, %d branches, %d generators",
        name,
        case.n_bus,
        case.n_branch,
        len(generators),
    )
    return case


def _num(value):
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _row(values):
    return "\t" + "\t".join(_num(v) for v in values) + ";"


def _bus_code(bus):
    if not bus.in_service:
        return BUS_TYPE_ISOLATED
    return {kind: code for code, kind in BUS_TYPE_CODES.items()}[bus.kind]


def serialize_case(case):
    """Writes a NetworkCase back out in the matrix-tabular case format, such that
    parse_case(serialize_case(case)) == case."""
    out = [
        "function mpc = %s" % case.name,
        "mpc.version = '%s';" % case.version,
        "",
        "%% system MVA base",
        "mpc.baseMVA = %s;" % _num(case.base_mva),
        "",
        "%% bus data",
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin",
        "mpc.bus = [",
    ]
    for bus in case.buses:
        out.append(
            _row(
                (
                    bus.id,
                    _bus_code(bus),
                    bus.p_load,
                    bus.q_load,
                    bus.gs,
                    bus.bs,
                    bus.area,
                    bus.v_mag,
                    bus.v_ang,
                    bus.base_kv,
                    bus.zone,
                    bus.v_max,
                    bus.v_min,
                )
                + bus.extra
            )
        )
    out += [
        "];",
        "",
        "%% generator data",
        "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin",
        "mpc.gen = [",
    ]
    for gen in case.generators:
        out.append(
            _row(
                (
                    gen.bus,
                    gen.p_gen,
                    gen.q_gen,
                    gen.q_max,
                    gen.q_min,
                    gen.v_set,
                    gen.m_base,
                    int(gen.status),
                    gen.p_max,
                    gen.p_min,
                )
                + gen.extra
            )
        )
    out += [
        "];",
        "",
        "%% branch data",
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax",
        "mpc.branch = [",
    ]
    for br in case.branches:
        out.append(
            _row(
                (
                    br.from_bus,
                    br.to_bus,
                    br.resistance,
                    br.reactance,
                    br.charging,
                    br.rate_a,
                    br.rate_b,
                    br.rate_c,
                    br.tap,
                    br.shift,
                    int(br.status),
                    br.ang_min,
                    br.ang_max,
                )
                + br.extra
            )
        )
    out.append("];")
    if case.extra_sections:
        out.append("")
        out.extend(case.extra_sections)
    return "\n".join(out) + "\n"


def resolve_case_path(name):
    """Returns the file behind a case name: the path itself if it exists, else the bundled case."""
    if os.path.exists(name):
        return name
    resource = name if name.endswith(".m") else name + ".m"
    path = importlib.resources.files("nxscreen").joinpath("cases", resource)
    if not path.is_file():
        raise ValueError("No such case file or bundled case: %s" % name)
    return path


def load_case(name, encoding=None):
    """Loads a case either from a file system path or from the cases bundled with nxscreen.

    Args:
        name: A path to a case file, or the name of a bundled case (see constants.BUNDLED_CASES).
        encoding: The encoding to use when reading the file (default: OS-dependent).

    Returns:
        The parsed NetworkCase.
    """
    path = resolve_case_path(name)
    with open(path, "rt", encoding=encoding) as input_file:
        return parse_case(input_file.read())
