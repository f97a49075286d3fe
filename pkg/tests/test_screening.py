# -*- coding: utf-8 -*-

import unittest

import numpy as np

from nxscreen.case_io import load_case
from nxscreen.constants import *
from nxscreen.metrics import rank_branches
from nxscreen.screening import *


class TestScreeningConfig(unittest.TestCase):
    def test_search_level_below_distance(self):
        with self.assertRaises(ValueError) as ctx:
            ScreeningConfig(x=2, d=3, sl=2)
        self.assertIn("search-level must be >= distance", str(ctx.exception))

    def test_invalid_values(self):
        for kwargs in (
            {"x": 0, "d": 0, "sl": 0},
            {"x": 1, "d": -1, "sl": 0},
            {"x": 1, "d": 0, "sl": 0, "a_percent": 0.0},
            {"x": 1, "d": 0, "sl": 0, "max_candidates": 0},
            {"x": 1, "d": 0, "sl": 0, "seed_limit": 0},
            {"x": 1, "d": 0, "sl": 0, "pair_rule": "nope"},
            {"x": 1, "d": 0, "sl": 0, "threads": 0},
        ):
            with self.assertRaises(ValueError, msg=str(kwargs)):
                ScreeningConfig(**kwargs)


class TestScreening(unittest.TestCase):
    def test_single_outages_are_the_seeds(self):
        case = load_case("case9")
        prepared = prepare(case)
        seeds = rank_branches(prepared.metrics, 30.0)
        candidates = run_screening(case, ScreeningConfig(x=1, d=1, sl=1, a_percent=30.0))
        self.assertEqual(sorted(seeds), [c.seed for c in candidates])
        for candidate in candidates:
            self.assertEqual(frozenset({candidate.seed}), candidate.branches)

    def test_candidates_contain_their_seed(self):
        case = load_case("case9")
        result = screen(case, ScreeningConfig(x=3, d=2, sl=2, a_percent=50.0))
        self.assertTrue(result.candidates)
        for candidate in result.candidates:
            self.assertEqual(3, len(candidate.branches))
            self.assertIn(candidate.seed, candidate.branches)
            self.assertEqual(candidate.seed, candidate.group[0])
            self.assertEqual(3, len(candidate.gbc_trace))
        seeds = [c.seed for c in result.candidates]
        self.assertEqual(sorted(seeds), seeds)

    def test_no_duplicate_sets(self):
        case = load_case("parallel5")
        candidates = run_screening(case, ScreeningConfig(x=2, d=3, sl=3, a_percent=100.0))
        sets = [c.branches for c in candidates]
        self.assertEqual(len(set(sets)), len(sets))

    def test_small_subgraphs_are_skipped(self):
        case = load_case("radial2")
        result = screen(case, ScreeningConfig(x=2, d=0, sl=0, a_percent=100.0))
        self.assertEqual([], result.candidates)
        self.assertEqual([0], result.skipped)

    def test_thread_count_does_not_change_output(self):
        case = load_case("case9")
        prepared = prepare(case)
        one = screen(case, ScreeningConfig(x=2, d=2, sl=3, a_percent=100.0), prepared)
        four = screen(case, ScreeningConfig(x=2, d=2, sl=3, a_percent=100.0, threads=4), prepared)
        self.assertEqual(
            [(c.branches, c.group, c.gbc_trace) for c in one.candidates],
            [(c.branches, c.group, c.gbc_trace) for c in four.candidates],
        )

    def test_limits(self):
        case = load_case("case9")
        limited = screen(case, ScreeningConfig(x=1, d=0, sl=0, a_percent=100.0, seed_limit=2))
        self.assertEqual(2, len(limited.seeds))
        capped = run_screening(case, ScreeningConfig(x=1, d=0, sl=0, a_percent=100.0, max_candidates=3))
        self.assertEqual(3, len(capped))

    def test_larger_sets_extend_smaller_ones(self):
        case = load_case("case9")
        prepared = prepare(case)
        for x in range(1, 5):
            small = screen(case, ScreeningConfig(x=x, d=2, sl=3, a_percent=100.0), prepared)
            large = screen(case, ScreeningConfig(x=x + 1, d=2, sl=3, a_percent=100.0), prepared)
            by_seed = {c.seed: c for c in large.candidates}
            common = [c for c in small.candidates if c.seed in by_seed]
            self.assertTrue(common, x)
            for candidate in common:
                grown = by_seed[candidate.seed]
                self.assertEqual(candidate.group, grown.group[:x], (x, candidate.seed))
                self.assertLess(candidate.branches, grown.branches)

    def test_timings_reported(self):
        result = screen(load_case("triangle3"), ScreeningConfig(x=2, d=1, sl=1, a_percent=100.0))
        self.assertEqual({"metrics", "subgraphs", "gbc"}, set(result.timings))


class TestBaselineComparison(unittest.TestCase):
    def test_zero_distance_finds_nothing_new(self):
        case = load_case("case9")
        cfg = ScreeningConfig(x=2, d=0, sl=2, a_percent=50.0)
        pairs = compare_with_baseline(case, cfg)
        self.assertTrue(pairs)
        self.assertFalse(any(novel for _, novel in pairs))

    def test_flags_follow_baseline(self):
        case = load_case("case9")
        cfg = ScreeningConfig(x=2, d=2, sl=2, a_percent=50.0)
        baseline = {c.branches for c in run_screening(case, ScreeningConfig(x=2, d=0, sl=2, a_percent=50.0))}
        for candidate, novel in compare_with_baseline(case, cfg):
            self.assertEqual(candidate.branches not in baseline, novel)


class TestTimingSweep(unittest.TestCase):
    def test_rows(self):
        rows = timing_sweep(load_case("case9"), [0, 1], [0, 1], [1, 2], a_percent=20.0)
        self.assertEqual(6, len(rows))
        self.assertEqual([(0, 0), (0, 0), (0, 1), (0, 1), (1, 1), (1, 1)], [(r["d"], r["sl"]) for r in rows])
        for row in rows:
            self.assertEqual(set(TIMING_COLUMNS), set(row))
            self.assertGreaterEqual(row["total_s"], 0.0)

    def test_gbc_time_grows_linearly_in_x(self):
        case = load_case("case9")
        x_values = [1, 2, 3, 4, 5]
        best = None
        for _ in range(5):
            rows = timing_sweep(case, [2], [3], x_values, a_percent=100.0)
            times = np.array([row["gbc_s"] for row in rows])
            best = times if best is None else np.minimum(best, times)
        slope, intercept = np.polyfit(x_values, best, 1)
        fitted = slope * np.array(x_values) + intercept
        r_squared = 1.0 - np.sum((best - fitted) ** 2) / np.sum((best - best.mean()) ** 2)
        self.assertGreater(slope, 0.0)
        self.assertGreaterEqual(r_squared, 0.9, best)


if __name__ == "__main__":
    unittest.main()
