"""
Experiment farming: runs plans on scenarios under one or all policies and
writes reports, comparison tables and sweep results.

Output directory layout for a run under policy P:

    <out>/P.log           bookkeeper log, one JSON record per line
    <out>/P.report.json   ExperimentReport
    <out>/P.jobs.csv      one row per job

A comparison adds comparison.csv, total_time.csv, per_server.csv,
bandwidth.csv and comparison.md.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from src import config
from src.broker_cli.scenario import Scenario, scenario_from_dict
from src.data_generation.generator import ScenarioGenerator
from src.decomposer.jobs import JobSet
from src.errors import PlanError
from src.metrics.compute import ComparisonTable, build_comparison
from src.plan_lang.nodes import PlanFile
from src.plan_lang.parser import parse_plan
from src.reporting.summary import ReportBuilder
from src.sim_engine import engine
from src.sim_engine.report import ExperimentReport
from src.stats.inference import SweepAnalyzer, SweepSummary
from src.utils.io import write_csv, write_json

logger = logging.getLogger(__name__)

SWEEP_POLICIES = (config.POLICY_ADAPTIVE, config.POLICY_COMPUTE_ONLY)


def output_paths(out_dir: str, policy: str) -> Dict[str, str]:
    return {
        'log': os.path.join(out_dir, f"{policy}.log"),
        'report': os.path.join(out_dir, f"{policy}.report.json"),
        'jobs': os.path.join(out_dir, f"{policy}.jobs.csv"),
    }


def run_experiment(scenario: Scenario, plan: Optional[PlanFile], policy: str, seed: int = config.RANDOM_SEED,
                   out_dir: Optional[str] = None, event_interval: Optional[float] = None,
                   jobs: Optional[JobSet] = None, check_invariants: bool = False) -> ExperimentReport:
    """
    Run one policy and write its log, report and job table.

    Parameters
    ----------
    scenario : Scenario
        Loaded scenario
    plan : PlanFile, optional
        Plan to decompose; ignored when `jobs` is given
    policy : str
        One of config.POLICIES
    seed : int
        Run seed
    out_dir : str, optional
        Output directory; nothing is written when None
    event_interval : float, optional
        Overrides the scenario's scheduling interval
    jobs : JobSet, optional
        Pre-decomposed jobs (an empty JobSet gives an empty report)

    Returns
    -------
    ExperimentReport
    """
    paths = output_paths(out_dir, policy) if out_dir else None
    log_path = paths['log'] if paths else None
    if jobs is not None:
        report = engine.run_jobs(scenario, jobs, policy, seed, log_path=log_path,
                                 event_interval=event_interval, check_invariants=check_invariants)
    else:
        report = engine.run(scenario, plan, policy, seed, log_path=log_path,
                            event_interval=event_interval, check_invariants=check_invariants)

    if paths:
        write_json(paths['report'], report.to_dict())
        write_csv(paths['jobs'], report.jobs_frame())
        logger.info("wrote %s, %s and %s", paths['log'], paths['report'], paths['jobs'])
    return report


def _run_isolated(args: Tuple) -> ExperimentReport:
    scenario, plan, policy, seed, out_dir, event_interval = args
    return run_experiment(scenario, plan, policy, seed, out_dir=out_dir, event_interval=event_interval)


def write_comparison(table: ComparisonTable, out_dir: str) -> List[str]:
    """Write the comparison table, the three data series and the markdown summary."""
    paths = [
        write_csv(os.path.join(out_dir, 'comparison.csv'), table.to_frame()),
        write_csv(os.path.join(out_dir, 'total_time.csv'), table.total_time_frame()),
        write_csv(os.path.join(out_dir, 'per_server.csv'), table.per_server_frame()),
        write_csv(os.path.join(out_dir, 'bandwidth.csv'), table.bandwidth_frame()),
    ]
    summary_path = os.path.join(out_dir, 'comparison.md')
    ReportBuilder.build_comparison_summary(table, output_path=summary_path)
    paths.append(summary_path)
    return paths


def compare_policies(scenario: Scenario, plan: PlanFile, seed: int = config.RANDOM_SEED,
                     out_dir: Optional[str] = None, event_interval: Optional[float] = None,
                     workers: int = 1, policies: Sequence[str] = config.POLICIES) -> ComparisonTable:
    """
    Run every policy with the same seed and assemble the comparison.

    With `workers` > 1 the runs execute in separate processes. Each run
    builds its own model from the scenario, so runs share no state; the
    table is assembled here in policy order once all runs have finished.
    """
    jobs = [(scenario, plan, policy, seed, out_dir, event_interval) for policy in policies]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            reports = list(pool.map(_run_isolated, jobs))
    else:
        reports = [_run_isolated(args) for args in jobs]

    table = build_comparison(reports)
    if out_dir:
        write_comparison(table, out_dir)
    return table


def run_sweep(count: int = config.SWEEP_SCENARIOS, first_seed: int = 0,
              out_dir: Optional[str] = None,
              check_invariants: bool = False) -> Tuple[pd.DataFrame, SweepSummary]:
    """
    Run adaptive and compute-only on `count` random scenarios.

    Returns one row per seed plus the paired analysis; `sweep.csv` and
    `sweep.md` are written when `out_dir` is given.
    """
    if count < 1:
        raise ValueError("sweep needs at least one scenario")
    rows = []
    for seed in range(first_seed, first_seed + count):
        doc, plan_text = ScenarioGenerator(seed=seed).generate()
        scenario = scenario_from_dict(doc, name=f"random-{seed}")
        plan = parse_plan(plan_text)
        if isinstance(plan, list):
            raise PlanError(plan)

        row = {'seed': seed, 'servers': len(scenario.servers), 'data_hosts': len(scenario.data_hosts)}
        for policy in SWEEP_POLICIES:
            report = engine.run(scenario, plan, policy, seed, check_invariants=check_invariants)
            row['jobs'] = report.job_count
            prefix = policy.replace('-', '_')
            row[f"{prefix}_total_time"] = report.total_time
            row[f"{prefix}_bytes"] = report.bytes_transferred
            row[f"{prefix}_done"] = report.done
            row[f"{prefix}_failed"] = report.failed
        logger.debug("sweep seed %d: %s", seed, row)
        rows.append(row)

    sweep = pd.DataFrame(rows)
    summary = SweepAnalyzer().analyze(sweep)
    if out_dir:
        write_csv(os.path.join(out_dir, 'sweep.csv'), sweep)
        ReportBuilder.build_sweep_summary(summary, sweep, output_path=os.path.join(out_dir, 'sweep.md'))
    return sweep, summary
