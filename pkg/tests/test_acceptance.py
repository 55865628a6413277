"""
End-to-end checks on the Belle testbed: the analysis plan against the
default scenario, healthy and with Adelaide's compute service down.
"""

import pytest
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.broker_cli.farming import compare_policies
from src.sim_engine import engine
from src.sim_engine.report import UNPLACED
from builders import belle_plan, belle_scenario

SITES = ['adelaide', 'anu', 'melbourne-cs', 'melbourne-physics', 'sydney']
ADELAIDE_JOBS = {f"job{i}" for i in range(41, 61)}


@pytest.fixture(scope='module')
def with_failure():
    """One run per policy with Adelaide's compute service down from t=0."""
    table = compare_policies(belle_scenario(with_failure=True), belle_plan())
    reports = {policy: engine.run(belle_scenario(with_failure=True), belle_plan(), policy)
               for policy in config.POLICIES}
    return table, reports


def test_adelaide_holds_files_41_to_60():
    model = belle_scenario().build_model()
    on_adelaide = {entry.lfn for entry in model.catalog.entries_on_host('adelaide')}

    assert on_adelaide == {f"lfn:/users/winton/fsimddks/fsimdata{i:03d}.mdst" for i in range(41, 61)}


def test_data_local_healthy_run():
    """Every server completes its own 20 jobs and nothing is transferred."""
    report = engine.run(belle_scenario(), belle_plan(), config.POLICY_DATA_LOCAL, check_invariants=True)

    assert report.done == 100 and report.failed == 0
    assert report.bytes_transferred == 0
    for site in SITES:
        assert report.per_server[site] == {'done': 20, 'failed': 0}, f"{site} should run exactly 20 jobs"


def test_data_local_with_adelaide_down(with_failure):
    """The 20 jobs whose data sits only on Adelaide fail; the other 80 complete."""
    _, reports = with_failure
    report = reports[config.POLICY_DATA_LOCAL]

    assert report.done == 80
    assert report.failed == 20
    assert {j.job for j in report.jobs if j.status == 'failed'} == ADELAIDE_JOBS
    assert report.per_server[UNPLACED] == {'done': 0, 'failed': 20}
    assert report.per_server['adelaide'] == {'done': 0, 'failed': 0}
    assert report.bytes_transferred == 0


def test_adaptive_moves_adelaide_jobs_to_best_connected_sites(with_failure):
    """Adelaide's jobs run elsewhere, mostly on the two Melbourne sites."""
    _, reports = with_failure
    report = reports[config.POLICY_ADAPTIVE]
    segment = belle_scenario().bandwidth_trace[0]['matrix']['adelaide']
    best_two = set(sorted(segment, key=lambda site: -segment[site])[:2])
    assert best_two == {'melbourne-cs', 'melbourne-physics'}

    assert report.done == 100 and report.failed == 0
    placed = [report.job(job_id).server for job_id in sorted(ADELAIDE_JOBS)]
    assert 'adelaide' not in placed
    near = sum(1 for server in placed if server in best_two)
    assert near >= 10, f"Only {near} of 20 Adelaide jobs ran on {sorted(best_two)}: {placed}"


def test_strategy_ordering(with_failure):
    """Adaptive finishes first; data-local moves nothing and compute-only moves the most."""
    table, reports = with_failure
    adaptive = reports[config.POLICY_ADAPTIVE]
    compute_only = reports[config.POLICY_COMPUTE_ONLY]
    data_local = reports[config.POLICY_DATA_LOCAL]

    assert adaptive.total_time <= compute_only.total_time
    assert data_local.bytes_transferred == 0
    assert data_local.bytes_transferred <= adaptive.bytes_transferred <= compute_only.bytes_transferred
    assert all(check.passed for check in table.check_orderings()), [str(c) for c in table.check_orderings()]


def test_strategy_ordering_on_healthy_testbed():
    """With every site up, adaptive still beats compute-only and sits between the two on bytes."""
    table = compare_policies(belle_scenario(), belle_plan())
    adaptive = table.row(config.POLICY_ADAPTIVE)
    compute_only = table.row(config.POLICY_COMPUTE_ONLY)
    data_local = table.row(config.POLICY_DATA_LOCAL)

    assert adaptive.total_time < compute_only.total_time, (
        f"adaptive {adaptive.total_time}s should finish before compute-only {compute_only.total_time}s")
    assert data_local.bytes_transferred == 0
    assert data_local.bytes_transferred <= adaptive.bytes_transferred <= compute_only.bytes_transferred
    assert adaptive.done == compute_only.done == data_local.done == 100
    assert all(check.passed for check in table.check_orderings()), [str(c) for c in table.check_orderings()]


def test_compare_matches_individual_runs(with_failure):
    table, reports = with_failure
    for policy in config.POLICIES:
        assert table.row(policy).total_time == reports[policy].total_time
        assert table.row(policy).bytes_transferred == reports[policy].bytes_transferred


def test_compute_only_runs_nothing_on_adelaide(with_failure):
    _, reports = with_failure
    report = reports[config.POLICY_COMPUTE_ONLY]

    assert report.done == 100
    assert report.per_server['adelaide'] == {'done': 0, 'failed': 0}


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
