# -*- coding: utf-8 -*-

from fractions import Fraction
import random
import unittest

import networkx as nx

from nxscreen.case_io import load_case
from nxscreen.constants import *
from nxscreen.oracle import *
from nxscreen.validation import ValidationOptions, validate_contingency


class TestBruteForce(unittest.TestCase):
    def test_radial(self):
        result = brute_force_contingencies(load_case("radial2"), 1)
        self.assertEqual(1, result.enumerated_count)
        self.assertEqual(1, len(result.records))
        self.assertEqual(100.0, result.records[0].report.islanded_load_mw)

    def test_enumeration_count(self):
        case = load_case("case9")
        options = ValidationOptions(method=METHOD_DC)
        self.assertEqual(9, brute_force_contingencies(case, 1, options=options).enumerated_count)
        result = brute_force_contingencies(case, 2, options=options)
        self.assertEqual(36, result.enumerated_count)
        self.assertEqual(36, result.screened_out + len(result.records))

    def test_full_enumeration_without_prescreen(self):
        case = load_case("case9")
        result = brute_force_contingencies(case, 1, dc_prescreen=False)
        self.assertEqual(9, len(result.records))
        self.assertEqual(0, result.screened_out)

    def test_lost_unit_is_found(self):
        case = load_case("case9")
        result = brute_force_contingencies(case, 1)
        violating = {r.branches: r.report for r in result.violating}
        self.assertIn((0,), violating)
        self.assertTrue(violating[(0,)].reserve_limit)

    def test_severity_order(self):
        result = brute_force_contingencies(load_case("case9"), 2, options=ValidationOptions(method=METHOD_DC))
        keys = [severity_key(r) for r in result.records]
        self.assertEqual(sorted(keys), keys)

    def test_prescreen_skips_only_secure_sets(self):
        case = load_case("case9")
        options = ValidationOptions(method=METHOD_DC)
        kept = {r.branches for r in brute_force_contingencies(case, 2, options=options).records}
        every = brute_force_contingencies(case, 2, dc_prescreen=False, options=options)
        skipped = [r for r in every.records if r.branches not in kept]
        self.assertEqual(36 - len(kept), len(skipped))
        for record in random.Random(5).sample(skipped, min(100, len(skipped))):
            self.assertEqual(0, record.report.overflow_count, record.branches)
            self.assertEqual(0.0, record.report.islanded_load_mw, record.branches)

    def test_single_outages_skip_the_dc_prescreen_by_default(self):
        case = load_case("triangle3")
        default = brute_force_contingencies(case, 1)
        full = brute_force_contingencies(case, 1, dc_prescreen=False)
        self.assertEqual(0, default.screened_out)
        self.assertEqual(3, len(default.records))
        self.assertEqual(
            {r.branches for r in full.violating}, {r.branches for r in default.violating}
        )

    def test_pairs_use_the_dc_prescreen_by_default(self):
        case = load_case("case9")
        options = ValidationOptions(method=METHOD_DC)
        default = brute_force_contingencies(case, 2, options=options)
        screened = brute_force_contingencies(case, 2, dc_prescreen=True, options=options)
        self.assertEqual(screened.screened_out, default.screened_out)
        self.assertEqual([r.branches for r in screened.records], [r.branches for r in default.records])

    def test_bad_order(self):
        with self.assertRaises(ValueError):
            brute_force_contingencies(load_case("triangle3"), 3)


class TestExactScores(unittest.TestCase):
    def test_shortest_edge_paths(self):
        graph = nx.MultiGraph()
        graph.add_edge(1, 2, key=0, weight=1.0)
        graph.add_edge(1, 2, key=1, weight=1.0)
        graph.add_edge(2, 3, key=2, weight=1.0)
        graph.add_edge(1, 3, key=3, weight=2.0)
        paths = shortest_edge_paths(graph, 1)
        self.assertEqual({(0,), (1,)}, set(paths[2]))
        # the direct edge ties with both two-hop routes
        self.assertEqual({(0, 2), (1, 2), (3,)}, set(paths[3]))

    def test_rational_weights(self):
        graph = nx.MultiGraph()
        graph.add_edge("a", "b", key=0, weight=0.1)
        graph.add_edge("b", "c", key=1, weight=0.2)
        graph.add_edge("a", "c", key=2, weight=0.3)
        # 0.1 + 0.2 ties 0.3 exactly once rationalized
        self.assertEqual(Fraction(1), gbc_score_exact(graph, [2], PAIR_RULE_NONE))

    def test_unknown_edge(self):
        graph = nx.MultiGraph()
        graph.add_edge(1, 2, key=0, weight=1.0)
        with self.assertRaises(ValueError):
            gbc_score_exact(graph, [4])

    def test_too_large_error_type(self):
        graph = nx.MultiGraph()
        for i in range(EXHAUSTIVE_MAX_EDGES + 1):
            graph.add_edge(i, i + 1, key=i, weight=1.0)
        with self.assertRaises(InstanceTooLargeError):
            gbc_exhaustive(graph, 1)


if __name__ == "__main__":
    unittest.main()
