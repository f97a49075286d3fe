# -*- coding: utf-8 -*-

"""Report, manifest and intermediate-data writers (CSV and JSON)."""

import csv
from dataclasses import asdict, dataclass, field
import json
import logging
import math

from .constants import *
from . import __version__


__all__ = [
    "MANIFEST_FILENAME",
    "RunManifest",
    "record_to_row",
    "records_to_rows",
    "write_report",
    "write_lodf_csv",
    "write_metrics_csv",
    "write_timing",
]

logger = logging.getLogger(__name__)

MANIFEST_FILENAME = "manifest.json"


@dataclass
class RunManifest:
    """What produced a set of output files.

    Attributes:
        command: The CLI subcommand.
        config: Echo of the effective settings.
        case: Case name or path as given.
        case_sha256: Hash of the case file contents.
        stages: Wall-clock seconds per stage.
        outputs: File names written next to the manifest.
        version: nxscreen version.
    """

    command: str
    config: dict
    case: str
    case_sha256: str
    stages: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self):
        return asdict(self)

    def write(self, path):
        with open(path, "wt", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info("wrote manifest %s", path)


def _round(value, digits):
    value = round(float(value), digits)
    # avoid "-0.0" in reports
    return value + 0.0


def record_to_row(record, case, deterministic=False, novel=None):
    """Flattens a ContingencyRecord into a dict keyed by REPORT_COLUMNS (plus `novel` if given)."""
    report = record.report
    row = {
        "x": record.x,
        "branches": [case.branch_label(b) for b in record.branches],
        "overflow": report.overflow_count,
        "undervoltage": report.undervoltage_count,
        "overvoltage": report.overvoltage_count,
        "reserve_limit": report.reserve_limit,
        "unsolved": report.unsolved,
        "islanded_load_mw": _round(report.islanded_load_mw, 6),
        "gbc_score": None if record.gbc_score is None else _round(record.gbc_score, 9),
        "runtime_ms": 0 if deterministic else _round(record.runtime * 1000.0, 3),
    }
    if novel is not None:
        row["novel"] = bool(novel)
    return row


def records_to_rows(records, case, deterministic=False, novel=None):
    if novel is None:
        return [record_to_row(r, case, deterministic) for r in records]
    return [record_to_row(r, case, deterministic, n) for r, n in zip(records, novel)]


def _csv_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, list):
        return json.dumps(value, separators=(",", ":"))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(rows, fmt, path, manifest_name=MANIFEST_FILENAME):
    """Writes report rows as CSV or JSON.

    The JSON form is an object holding the manifest file name and the rows; the CSV form has one
    line per row with `branches` as a JSON list of [from, to] pairs ([from, to, circuit] for
    parallel circuits). The CSV form has no room for a manifest reference; callers write the
    manifest into the same directory.
    """
    if fmt not in OUTPUT_FORMATS:
        raise ValueError("Unknown output format %r" % fmt)
    columns = list(REPORT_COLUMNS)
    if rows and "novel" in rows[0]:
        columns.append("novel")

    if fmt == FORMAT_JSON:
        with open(path, "wt", encoding="utf-8", newline="\n") as f:
            json.dump({"manifest": manifest_name, "rows": rows}, f, indent=2)
            f.write("\n")
    else:
        with open(path, "wt", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_csv_value(row[c]) for c in columns])
    logger.info("wrote %d report rows to %s", len(rows), path)


def _float_text(value):
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.9g" % value


def write_lodf_csv(path, case, sens):
    """Writes the LODF matrix: one row per monitored branch, one column per outaged branch."""
    labels = ["-".join(str(v) for v in case.branch_label(k)) for k in range(case.n_branch)]
    with open(path, "wt", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["branch", "from", "to"] + labels)
        for l in range(case.n_branch):
            br = case.branches[l]
            writer.writerow(
                [l, br.from_bus, br.to_bus] + [_float_text(v) for v in sens.lodf[l]]
            )


def write_metrics_csv(path, case, dc, metrics):
    """Writes PF, NLODF and M per in-service branch, in rank order (rank 1 = largest |M|)."""
    with open(path, "wt", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        position = 0
        for i in metrics.rank:
            if not metrics.in_service[i]:
                continue
            position += 1
            br = case.branches[i]
            writer.writerow(
                [
                    int(i),
                    br.from_bus,
                    br.to_bus,
                    _float_text(dc.flows[i]),
                    _float_text(metrics.nlodf[i]),
                    _float_text(metrics.m_value[i]),
                    position,
                ]
            )


def write_timing(path, rows):
    with open(path, "wt", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TIMING_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
