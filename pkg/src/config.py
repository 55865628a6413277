"""
Configuration for the data-grid broker simulator.

This module centralizes the defaults every run starts from. Scenario files
override them per experiment and command-line flags override scenario values,
so sensitivity runs only need to touch one place.
"""

import os

# =============================================================================
# Reproducibility
# =============================================================================
RANDOM_SEED = 42  # Seeds bandwidth noise, work jitter and random scenarios


# =============================================================================
# Paths
# =============================================================================
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
SCENARIO_DIR = os.path.join(PROJECT_ROOT, 'scenarios')
PLAN_DIR = os.path.join(PROJECT_ROOT, 'plans')
OUTPUT_DIR = os.path.join(PROJECT_ROOT, 'results')

DEFAULT_SCENARIO = 'belle-default'
DEFAULT_PLAN = os.path.join(PLAN_DIR, 'belle_analysis.plan')


# =============================================================================
# Units
# =============================================================================
BYTES_PER_MB = 1_000_000  # Bandwidths are MB/s, sizes are bytes


# =============================================================================
# Scheduling Policies
# =============================================================================
POLICY_DATA_LOCAL = 'data-local'
POLICY_COMPUTE_ONLY = 'compute-only'
POLICY_ADAPTIVE = 'adaptive'
POLICIES = (POLICY_DATA_LOCAL, POLICY_COMPUTE_ONLY, POLICY_ADAPTIVE)

# Seconds between periodic scheduling events. Job completions and failures
# trigger an extra event immediately.
EVENT_INTERVAL_SECONDS = 30.0

# A job that cannot be placed for this many consecutive events, with no
# recovery pending that could change that, is declared failed.
INFEASIBLE_EVENT_LIMIT = 3

# Dispatch attempts per job before an execution/transfer failure is final
MAX_JOB_ATTEMPTS = 3

# Largest domain a single range parameter may expand to
MAX_RANGE_VALUES = 1_000_000


# =============================================================================
# Job Consumption Rate Estimation
# =============================================================================
EWMA_ALPHA = 0.3  # Weight of the newest observed job duration
DEFAULT_PRIOR_SECONDS = 60.0  # Seconds per job before anything is observed


# =============================================================================
# Job Timeline
# =============================================================================
DEFAULT_WORK_SECONDS = 60.0  # True per-job work at speed factor 1.0

# Configuration/module files copied by `nodestart`. Tens of kilobytes each,
# so the default cost is nothing.
SMALL_FILE_OVERHEAD_SECONDS = 0.0

# Histograms returned by the main task (968 KB each in the Belle analysis)
DEFAULT_OUTPUT_BYTES = 968_000
RETURN_OUTPUTS = True

# Fraction of min(transfer, execution) hidden by analysing streamed data
STREAMING_OVERLAP = 0.0

HORIZON_SECONDS = 7 * 24 * 3600.0


# =============================================================================
# Sweep Analysis
# =============================================================================
CONFIDENCE_LEVEL = 0.95  # For paired confidence intervals across sweep seeds
SWEEP_SCENARIOS = 50


# =============================================================================
# Logging
# =============================================================================
LOG_FORMAT = '%(asctime)s %(levelname)-7s %(name)s: %(message)s'
