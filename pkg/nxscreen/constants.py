# -*- coding: utf-8 -*-

__all__ = [
    "BUS_PQ",
    "BUS_PV",
    "BUS_SLACK",
    "BUS_KINDS",
    "BUS_TYPE_CODES",
    "BUS_TYPE_ISOLATED",
    "DEFAULT_V_MIN",
    "DEFAULT_V_MAX",
    "BRIDGE_TOLERANCE",
    "LODF_SANITY_BOUND",
    "PATH_TIE_TOLERANCE",
    "SCORE_TIE_TOLERANCE",
    "WEIGHT_EPSILON_FACTOR",
    "AC_TOLERANCE",
    "AC_MAX_ITERATIONS",
    "Q_LIMIT_ROUNDS",
    "DIVERGENCE_LIMIT",
    "DEFAULT_A_PERCENT",
    "DEFAULT_MAX_CANDIDATES",
    "PAIR_RULE_ENDPOINTS",
    "PAIR_RULE_PAIR",
    "PAIR_RULE_NONE",
    "PAIR_RULES",
    "METHOD_AC",
    "METHOD_DC",
    "METHODS",
    "FORMAT_CSV",
    "FORMAT_JSON",
    "OUTPUT_FORMATS",
    "REPORT_COLUMNS",
    "METRICS_COLUMNS",
    "TIMING_COLUMNS",
    "EXHAUSTIVE_MAX_EDGES",
    "EXHAUSTIVE_MAX_GROUP",
    "BUNDLED_CASES",
    "EXIT_OK",
    "EXIT_VIOLATIONS",
    "EXIT_INPUT_ERROR",
]

BUS_PQ = "PQ"
BUS_PV = "PV"
BUS_SLACK = "slack"
BUS_KINDS = (BUS_PQ, BUS_PV, BUS_SLACK)
# case file type codes
BUS_TYPE_CODES = {1: BUS_PQ, 2: BUS_PV, 3: BUS_SLACK}
BUS_TYPE_ISOLATED = 4

# limits applied when a bus row has Vmin = Vmax = 0
DEFAULT_V_MIN = 0.95
DEFAULT_V_MAX = 1.05

# |1 - PTDF_kk| below this marks branch k as a bridge
BRIDGE_TOLERANCE = 1e-6
LODF_SANITY_BOUND = 1e3

# relative tolerance for equal-length weighted paths
PATH_TIE_TOLERANCE = 1e-9
SCORE_TIE_TOLERANCE = 1e-9
# edge weight w = 1 / (|M| + eps), eps = factor * max|M|
WEIGHT_EPSILON_FACTOR = 1e-6

AC_TOLERANCE = 1e-8
AC_MAX_ITERATIONS = 20
Q_LIMIT_ROUNDS = 10
DIVERGENCE_LIMIT = 1e10

DEFAULT_A_PERCENT = 5.0
DEFAULT_MAX_CANDIDATES = 1000

PAIR_RULE_ENDPOINTS = "endpoints"
PAIR_RULE_PAIR = "pair"
PAIR_RULE_NONE = "none"
PAIR_RULES = (PAIR_RULE_ENDPOINTS, PAIR_RULE_PAIR, PAIR_RULE_NONE)

METHOD_AC = "ac"
METHOD_DC = "dc"
METHODS = (METHOD_AC, METHOD_DC)

FORMAT_CSV = "csv"
FORMAT_JSON = "json"
OUTPUT_FORMATS = (FORMAT_CSV, FORMAT_JSON)

REPORT_COLUMNS = (
    "x",
    "branches",
    "overflow",
    "undervoltage",
    "overvoltage",
    "reserve_limit",
    "unsolved",
    "islanded_load_mw",
    "gbc_score",
    "runtime_ms",
)
METRICS_COLUMNS = ("branch", "from", "to", "pf", "nlodf", "m", "rank")
TIMING_COLUMNS = (
    "d",
    "sl",
    "x",
    "seeds",
    "candidates",
    "metrics_s",
    "subgraphs_s",
    "gbc_s",
    "total_s",
)

EXHAUSTIVE_MAX_EDGES = 12
EXHAUSTIVE_MAX_GROUP = 3

BUNDLED_CASES = ("triangle3", "radial2", "case9", "parallel5")

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT_ERROR = 2
