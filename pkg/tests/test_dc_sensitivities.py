# -*- coding: utf-8 -*-

import unittest

import numpy as np

from nxscreen.case_io import load_case
from nxscreen.dc_sensitivities import *


class TestDcPowerFlow(unittest.TestCase):
    def test_single_path(self):
        case = load_case("radial2")
        dc = solve_dc(case)
        self.assertAlmostEqual(100.0, dc.flows[0], places=9)

    def test_triangle_split(self):
        dc = solve_dc(load_case("triangle3"))
        # (1,2), (2,3), (1,3)
        np.testing.assert_allclose([30.0, 30.0, 60.0], dc.flows, atol=1e-9)
        self.assertEqual(0.0, dc.theta[0])

    def test_balance_residual(self):
        for name in ("triangle3", "case9", "parallel5"):
            case = load_case(name)
            self.assertLess(dc_balance_residual(case, solve_dc(case)), 1e-8, name)

    def test_islanded_network(self):
        case = load_case("radial2")
        with self.assertRaises(SingularSystemError):
            solve_dc(case, outaged=[0])
        self.assertIsNone(dc_outage_flows(case, [0]))
        self.assertFalse(is_connected(case, [0]))
        self.assertTrue(is_connected(case))


class TestBridges(unittest.TestCase):
    def test_radial(self):
        case = load_case("radial2")
        sens = compute_lodf(case, solve_dc(case))
        self.assertTrue(sens.bridge[0])
        self.assertTrue(np.all(np.isnan(sens.lodf[:, 0])))

    def test_parallel_circuits_are_not_bridges(self):
        case = load_case("parallel5")
        flags = graph_bridges(case)
        self.assertEqual([False, False, False, False, False, True], list(flags))
        sens = compute_lodf(case, solve_dc(case))
        self.assertEqual(list(flags), list(sens.bridge))

    def test_case9(self):
        case = load_case("case9")
        self.assertEqual([0, 3, 6], list(np.flatnonzero(graph_bridges(case))))


class TestLodf(unittest.TestCase):
    def test_triangle_reroute(self):
        case = load_case("triangle3")
        sens = compute_lodf(case, solve_dc(case))
        np.testing.assert_allclose([1.0, 1.0, -1.0], sens.lodf[:, 2], atol=1e-12)
        self.assertFalse(np.any(sens.bridge))

    def test_matches_outage_resolve(self):
        for name in ("triangle3", "case9", "parallel5"):
            case = load_case(name)
            dc = solve_dc(case)
            sens = compute_lodf(case, dc)
            for k in case.in_service_branches():
                if sens.bridge[k]:
                    continue
                predicted = dc.flows + sens.lodf[:, k] * dc.flows[k]
                actual = dc_outage_flows(case, [k]).flows
                error = np.max(np.abs(predicted - actual)) / case.base_mva
                self.assertLess(error, 1e-6, "%s outage %d" % (name, k))

    def test_out_of_service_branch(self):
        case = load_case("case9").with_branch_status([4], False)
        dc = solve_dc(case)
        sens = compute_lodf(case, dc)
        self.assertEqual(0.0, dc.flows[4])
        self.assertFalse(sens.in_service[4])
        self.assertTrue(np.all(np.isnan(sens.lodf[:, 4])))


if __name__ == "__main__":
    unittest.main()
