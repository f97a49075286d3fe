# -*- coding: utf-8 -*-

from contextlib import redirect_stderr, redirect_stdout
import csv
import io
import json
import os
import tempfile
import unittest

from nxscreen.cmdline import main
from nxscreen.constants import *
from nxscreen.reports import MANIFEST_FILENAME
from nxscreen.utils import format_branch_label
from nxscreen import __version__


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _path(self, *parts):
        return os.path.join(self.tmp.name, *parts)

    def test_version(self):
        code, out, _ = _run(["version"])
        self.assertEqual(EXIT_OK, code)
        self.assertEqual("nxscreen v%s\n" % __version__, out)

    def test_no_command(self):
        code, _, _ = _run([])
        self.assertEqual(EXIT_INPUT_ERROR, code)

    def test_search_level_below_distance(self):
        code, _, err = _run(["analyze", "--case", "case9", "-x", "2", "-d", "3", "-s", "2", "-o", self._path()])
        self.assertEqual(EXIT_INPUT_ERROR, code)
        self.assertIn("search-level must be >= distance", err)

    def test_missing_case(self):
        code, _, err = _run(["lodf", "--case", self._path("nowhere.m"), "-o", self._path()])
        self.assertEqual(EXIT_INPUT_ERROR, code)
        self.assertTrue(err.startswith("Error:"))

    def test_lodf(self):
        code, _, _ = _run(["lodf", "--case", "triangle3", "-o", self._path("out")])
        self.assertEqual(EXIT_OK, code)
        with open(self._path("out", "lodf.csv"), newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(4, len(rows))
        self.assertEqual(6, len(rows[0]))
        with open(self._path("out", MANIFEST_FILENAME)) as f:
            manifest = json.load(f)
        self.assertEqual("lodf", manifest["command"])
        self.assertEqual(["lodf.csv"], manifest["outputs"])
        self.assertEqual(64, len(manifest["case_sha256"]))

    def test_metrics(self):
        code, _, _ = _run(["metrics", "--case", "case9", "-o", self._path()])
        self.assertEqual(EXIT_OK, code)
        with open(self._path("metrics.csv"), newline="") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(9, len(rows))
        self.assertEqual([str(i) for i in range(1, 10)], [r["rank"] for r in rows])

    def test_analyze_is_reproducible(self):
        reports = []
        for threads in ("1", "2"):
            out_dir = self._path("threads" + threads)
            code, _, _ = _run(
                [
                    "analyze",
                    "--case", "case9",
                    "-x", "2",
                    "-d", "2",
                    "-s", "3",
                    "-a", "50",
                    "--method", "dc",
                    "--deterministic",
                    "--exit-zero",
                    "-j", threads,
                    "-o", out_dir,
                ]
            )
            self.assertEqual(EXIT_OK, code)
            with open(os.path.join(out_dir, "report.csv"), "rb") as f:
                reports.append(f.read())
        self.assertEqual(reports[0], reports[1])
        self.assertTrue(reports[0].startswith(b"x,branches,"))

    def test_csv_report_sits_next_to_its_manifest(self):
        out_dir = self._path("csv")
        code, _, _ = _run(
            [
                "analyze",
                "--case", "case9",
                "-x", "1",
                "-d", "0",
                "-s", "0",
                "--method", "dc",
                "--exit-zero",
                "-o", out_dir,
            ]
        )
        self.assertEqual(EXIT_OK, code)
        self.assertEqual(sorted(["report.csv", MANIFEST_FILENAME]), sorted(os.listdir(out_dir)))
        with open(os.path.join(out_dir, MANIFEST_FILENAME)) as f:
            self.assertEqual(["report.csv"], json.load(f)["outputs"])

    def test_analyze_json_sweep(self):
        code, _, _ = _run(
            [
                "analyze",
                "--case", "case9",
                "--sweep-x", "1..2",
                "-d", "1",
                "-s", "1",
                "-a", "30",
                "--method", "dc",
                "--compare-baseline",
                "--output", "json",
                "--exit-zero",
                "-o", self._path(),
            ]
        )
        self.assertEqual(EXIT_OK, code)
        with open(self._path("report.json")) as f:
            report = json.load(f)
        self.assertEqual(MANIFEST_FILENAME, report["manifest"])
        self.assertEqual({1, 2}, {row["x"] for row in report["rows"]})
        for row in report["rows"]:
            self.assertIn("novel", row)
        with open(self._path(MANIFEST_FILENAME)) as f:
            manifest = json.load(f)
        self.assertEqual([1, 2], manifest["config"]["x"])
        self.assertIn("metrics", manifest["stages"])

    def test_solve(self):
        code, out, _ = _run(["solve", "--case", "case9", "--method", "dc"])
        self.assertEqual(EXIT_OK, code)
        self.assertTrue(out.startswith("base case: 0 overflow"))

        code, out, _ = _run(["solve", "--case", "case9", "--outage", "[1,4]"])
        self.assertEqual(EXIT_VIOLATIONS, code)
        self.assertIn("reserve limit", out)

        code, _, _ = _run(["solve", "--case", "case9", "--outage", "[4,1]", "--exit-zero", "-o", self._path()])
        self.assertEqual(EXIT_OK, code)
        self.assertTrue(os.path.exists(self._path("solve.csv")))

    def test_solve_unknown_branch(self):
        code, _, err = _run(["solve", "--case", "case9", "--outage", "[1,2]"])
        self.assertEqual(EXIT_INPUT_ERROR, code)
        self.assertIn("No branch between buses 1 and 2", err)

    def test_parallel_circuits_replay_through_solve(self):
        code, _, _ = _run(
            [
                "analyze",
                "--case", "parallel5",
                "-x", "2",
                "-d", "1",
                "-s", "2",
                "-a", "100",
                "--method", "dc",
                "--output", "json",
                "--deterministic",
                "--exit-zero",
                "-o", self._path(),
            ]
        )
        self.assertEqual(EXIT_OK, code)
        with open(self._path("report.json")) as f:
            rows = json.load(f)["rows"]
        self.assertTrue(rows)
        self.assertTrue(any(len(label) == 3 for row in rows for label in row["branches"]))

        for i, row in enumerate(rows):
            outage = ",".join(format_branch_label(label) for label in row["branches"])
            out_dir = self._path("solve%d" % i)
            code, _, err = _run(
                [
                    "solve",
                    "--case", "parallel5",
                    "--outage", outage,
                    "--method", "dc",
                    "--output", "json",
                    "--deterministic",
                    "--exit-zero",
                    "-o", out_dir,
                ]
            )
            self.assertEqual(EXIT_OK, code, err)
            with open(os.path.join(out_dir, "solve.json")) as f:
                replayed = json.load(f)["rows"][0]
            self.assertEqual(row["branches"], replayed["branches"], outage)
            for column in (
                "overflow",
                "undervoltage",
                "overvoltage",
                "reserve_limit",
                "unsolved",
                "islanded_load_mw",
            ):
                self.assertEqual(row[column], replayed[column], (outage, column))

    def test_subgraph_to_stdout(self):
        code, out, _ = _run(["subgraph", "--case", "case9", "--seed", "[1,4]", "-d", "1", "-s", "2"])
        self.assertEqual(EXIT_OK, code)
        self.assertTrue(out.startswith("graph seed_0 {"))
        self.assertTrue(out.endswith("}\n"))

    def test_brute_force(self):
        code, out, _ = _run(["brute-force", "--case", "radial2", "-o", self._path()])
        self.assertEqual(EXIT_VIOLATIONS, code)
        self.assertIn("Enumerated 1 sets", out)
        with open(self._path("brute_force.csv"), newline="") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual("[[1,2]]", rows[0]["branches"])
        self.assertEqual(100.0, float(rows[0]["islanded_load_mw"]))

    def test_brute_force_single_outages_are_all_validated(self):
        code, out, _ = _run(["brute-force", "--case", "triangle3", "-x", "1", "--exit-zero", "-o", self._path()])
        self.assertEqual(EXIT_OK, code)
        self.assertIn("Enumerated 3 sets (0 skipped", out)
        with open(self._path(MANIFEST_FILENAME)) as f:
            self.assertFalse(json.load(f)["config"]["dc_prescreen"])

    def test_timing(self):
        code, _, _ = _run(
            [
                "timing",
                "--case", "triangle3",
                "--distances", "0..1",
                "--search-levels", "0..1",
                "--x-values", "1",
                "-a", "100",
                "-o", self._path(),
            ]
        )
        self.assertEqual(EXIT_OK, code)
        with open(self._path("timing.csv"), newline="") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(list(TIMING_COLUMNS), list(rows[0].keys()))
        self.assertEqual(3, len(rows))


if __name__ == "__main__":
    unittest.main()
