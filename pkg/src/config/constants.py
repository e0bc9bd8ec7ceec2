import os

# Directories
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DATA_DIR = os.path.join(PROJECT_ROOT, "data")
RESOURCES_DIR = os.path.join(PROJECT_ROOT, "resources")
DEFAULT_OUTPUT_DIR = os.path.join(DATA_DIR, "runs")

# Log files (directory overridable through BWK_LOG_DIR, see settings)
LOG_DIR = os.path.join(DATA_DIR, "logs")
ERROR_LOG_NAME = "error_logs.json"
SYSTEM_LOG_NAME = "system_logs.json"
LOG_HISTORY = 500

# Settings file
SETTINGS_FILE = os.path.join(PROJECT_ROOT, "bwk.toml")

# Estimator constants (QMC sample-count multipliers, >= 1)
DEFAULT_C1 = 1.0
DEFAULT_C2 = 1.0

# LP
DEFAULT_EPS_LP = 0.02
SIMPLEX_TOL = 1e-9
CLASSIFY_TOL = 1e-9
BRUTE_FORCE_LIMIT = 12
BISECTION_ITERS = 64

# Instance generation
GENERATOR_ATTEMPTS = 50

# Bench outputs
RUNS_FILE = "runs.csv"
SUMMARY_FILE = "summary.csv"
RUNS_COLUMNS = [
    "algo",
    "T",
    "B",
    "m",
    "d",
    "replication",
    "seed",
    "status",
    "pseudo_regret",
    "realized_regret",
    "tau",
    "phase1_rounds",
    "identification_correct",
    "arm_pulls",
    "qmc_query_total",
    "lp_solve_count",
    "modeled_quantum_cost",
    "modeled_classical_cost",
    "suboptimal_term",
    "leftover_term",
    "exhausted_rows",
]

ALGORITHMS = ["alg1-quantum", "alg1-classical", "alg2-quantum", "alg2-classical"]
ESTIMATOR_BACKENDS = ["idealized", "ae-analytic", "classical"]
LP_MODES = ["exact", "approx"]
APPROX_BACKENDS = ["idealized", "game"]
