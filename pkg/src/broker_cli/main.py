"""
Command-line entry point.

    python -m src.broker_cli.main --policy adaptive
    python -m src.broker_cli.main --compare --failures scenarios/adelaide-compute-down.json
    python -m src.broker_cli.main --sweep 50

Exit codes: 0 success (failed jobs are a result, not an error), 1 runtime
error, 2 invalid input.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from src import config  # noqa: E402
from src.broker_cli.farming import compare_policies, run_experiment, run_sweep  # noqa: E402
from src.broker_cli.scenario import load_failure_script, load_scenario  # noqa: E402
from src.decomposer.decompose import decompose, resolve_dynamic_parameters, write_manifest  # noqa: E402
from src.errors import (  # noqa: E402
    BrokerError, CatalogError, DecompositionError, PlanError, ScenarioError, UnknownResourceError,
)
from src.metrics.compute import build_comparison  # noqa: E402
from src.plan_lang.parser import load_plan  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_INVALID_INPUT = 2

INPUT_ERRORS = (PlanError, ScenarioError, DecompositionError, CatalogError, UnknownResourceError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Simulate a data-grid broker scheduling a parametric plan on a testbed scenario.'
    )
    parser.add_argument('--plan', default=config.DEFAULT_PLAN, help='plan file')
    parser.add_argument('--scenario', default=config.DEFAULT_SCENARIO,
                        help='built-in scenario name or path to a scenario JSON file')
    parser.add_argument('--policy', choices=config.POLICIES, default=config.POLICY_ADAPTIVE)
    parser.add_argument('--seed', type=int, default=config.RANDOM_SEED,
                        help='seed for bandwidth noise and work jitter')
    parser.add_argument('--out', default=config.OUTPUT_DIR, help='output directory')
    parser.add_argument('--compare', action='store_true', help='run all three policies and compare them')
    parser.add_argument('--event-interval', type=float, default=None,
                        help='seconds between periodic scheduling events (overrides the scenario)')
    parser.add_argument('--failures', default=None, help='failure script replacing the scenario\'s own')
    parser.add_argument('--manifest', default=None, help='write the decomposed jobs (JSON lines) here')
    parser.add_argument('--sweep', type=int, default=None, metavar='N',
                        help='run adaptive and compute-only on N random scenarios')
    parser.add_argument('--figures', action='store_true', help='render PNG figures of the results')
    parser.add_argument('--workers', type=int, default=1, help='processes for --compare')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=config.LOG_FORMAT)


def _sweep(args) -> int:
    print("\n" + "=" * 70)
    print(f"PROPERTY SWEEP ({args.sweep} random scenarios)")
    print("=" * 70)
    sweep, summary = run_sweep(args.sweep, out_dir=args.out)
    print(summary)
    return EXIT_OK


def _run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.failures:
        scenario = scenario.with_failures(load_failure_script(args.failures, scenario))
    plan = load_plan(args.plan)

    if args.manifest:
        jobs = decompose(resolve_dynamic_parameters(plan, scenario.build_model(args.seed).catalog))
        write_manifest(jobs, args.manifest)
        print(f"✓ Manifest with {len(jobs)} jobs saved to {args.manifest}")

    print("\n" + "=" * 70)
    print(f"SCENARIO {scenario.name.upper()} (seed {args.seed})")
    print("=" * 70)

    if args.compare:
        table = compare_policies(scenario, plan, args.seed, out_dir=args.out,
                                 event_interval=args.event_interval, workers=args.workers)
        print(table)
        print("\nOrdering checks:")
        for check in table.check_orderings():
            print(check)
    else:
        report = run_experiment(scenario, plan, args.policy, args.seed, out_dir=args.out,
                                event_interval=args.event_interval)
        print(report)
        table = build_comparison([report])

    if args.figures:
        from src.utils.visualizations import render_figures
        failed_hosts = [e.resource for e in scenario.failures if e.action == 'fail']
        render_figures(table, args.out, from_host=failed_hosts[0] if failed_hosts else None)

    print(f"\n✓ Results written to {args.out}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    if args.workers < 1:
        parser.error('--workers must be at least 1')
    if args.event_interval is not None and args.event_interval <= 0:
        parser.error('--event-interval must be positive')
    if args.sweep is not None and args.sweep < 1:
        parser.error('--sweep must be at least 1')

    try:
        return _sweep(args) if args.sweep is not None else _run(args)
    except INPUT_ERRORS as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (BrokerError, OSError) as exc:
        logger.error("run aborted: %s", exc)
        print(f"✗ {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == '__main__':
    sys.exit(main())
