# -*- coding: utf-8 -*-

import csv
import json
import os
import tempfile
import unittest

from nxscreen.case_io import load_case
from nxscreen.constants import *
from nxscreen.dc_sensitivities import compute_lodf, solve_dc
from nxscreen.metrics import compute_metrics
from nxscreen.reports import *
from nxscreen.validation import ContingencyRecord, ViolationReport


def _record():
    report = ViolationReport(
        overflow_count=2,
        undervoltage_count=18,
        reserve_limit=True,
        islanded_load_mw=12.5,
    )
    return ContingencyRecord(x=2, branches=(0, 6), report=report, runtime=0.0123, gbc_score=4.25)


class TestReportRows(unittest.TestCase):
    def test_row(self):
        case = load_case("case9")
        row = record_to_row(_record(), case)
        self.assertEqual(set(REPORT_COLUMNS), set(row))
        self.assertEqual([[1, 4], [8, 2]], row["branches"])
        self.assertEqual(2, row["overflow"])
        self.assertEqual(18, row["undervoltage"])
        self.assertTrue(row["reserve_limit"])
        self.assertFalse(row["unsolved"])
        self.assertAlmostEqual(12.3, row["runtime_ms"])

    def test_deterministic_runtime(self):
        row = record_to_row(_record(), load_case("case9"), deterministic=True)
        self.assertEqual(0, row["runtime_ms"])

    def test_novel_column(self):
        rows = records_to_rows([_record()], load_case("case9"), novel=[True])
        self.assertTrue(rows[0]["novel"])

    def test_parallel_circuit_labels(self):
        record = ContingencyRecord(x=2, branches=(0, 1), report=ViolationReport())
        row = record_to_row(record, load_case("parallel5"))
        self.assertEqual([[10, 20, 1], [10, 20, 2]], row["branches"])


class TestReportFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv(self):
        path = os.path.join(self.tmp.name, "report.csv")
        write_report(records_to_rows([_record()], load_case("case9"), True), FORMAT_CSV, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(list(REPORT_COLUMNS), rows[0])
        self.assertEqual(
            ["2", "[[1,4],[8,2]]", "2", "18", "0", "true", "false", "12.5", "4.25", "0"], rows[1]
        )

    def test_json_references_manifest(self):
        path = os.path.join(self.tmp.name, "report.json")
        write_report(records_to_rows([_record()], load_case("case9")), FORMAT_JSON, path)
        with open(path) as f:
            data = json.load(f)
        self.assertEqual(MANIFEST_FILENAME, data["manifest"])
        self.assertEqual([[1, 4], [8, 2]], data["rows"][0]["branches"])
        self.assertIs(True, data["rows"][0]["reserve_limit"])

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            write_report([], "xlsx", os.path.join(self.tmp.name, "r"))

    def test_manifest(self):
        path = os.path.join(self.tmp.name, MANIFEST_FILENAME)
        RunManifest(
            command="analyze",
            config={"x": [3]},
            case="case9",
            case_sha256="00",
            stages={"metrics": 0.5},
            outputs=["report.csv"],
        ).write(path)
        with open(path) as f:
            data = json.load(f)
        self.assertEqual("analyze", data["command"])
        self.assertEqual({"metrics": 0.5}, data["stages"])
        self.assertIn("version", data)

    def test_lodf_csv(self):
        case = load_case("triangle3")
        path = os.path.join(self.tmp.name, "lodf.csv")
        write_lodf_csv(path, case, compute_lodf(case, solve_dc(case)))
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(["branch", "from", "to", "1-2", "2-3", "1-3"], rows[0])
        self.assertEqual(4, len(rows))
        self.assertEqual(["0", "1", "2"], rows[1][:3])
        self.assertEqual(1.0, float(rows[1][5]))
        self.assertEqual(-1.0, float(rows[3][5]))

    def test_lodf_csv_parallel_circuits(self):
        case = load_case("parallel5")
        path = os.path.join(self.tmp.name, "lodf.csv")
        write_lodf_csv(path, case, compute_lodf(case, solve_dc(case)))
        with open(path, newline="") as f:
            header = next(csv.reader(f))
        self.assertEqual(["10-20-1", "10-20-2", "20-30"], header[3:6])

    def test_metrics_csv(self):
        case = load_case("triangle3")
        dc = solve_dc(case)
        metrics = compute_metrics(case, dc, compute_lodf(case, dc))
        path = os.path.join(self.tmp.name, "metrics.csv")
        write_metrics_csv(path, case, dc, metrics)
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(["2", "0", "1"], [r["branch"] for r in rows])
        self.assertEqual(["1", "2", "3"], [r["rank"] for r in rows])
        self.assertEqual("inf", rows[0]["nlodf"])
        self.assertEqual(60.0, float(rows[0]["m"]))


if __name__ == "__main__":
    unittest.main()
