"""
Scenario files: the testbed description a run starts from.

A scenario is a JSON document with compute servers, data hosts, the replica
catalog, a bandwidth trace, an optional failure script, the estimator and
work model, and run settings. Omitted settings fall back to src/config.py.
See docs/scenario_schema.md for the full schema.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src import config
from src.catalog.replica import build_catalog
from src.errors import ScenarioError
from src.grid_model.model import GridModel
from src.grid_model.network import trace_from_records
from src.grid_model.resources import ComputeServer, DataHost
from src.sim_engine.events import FailureScript
from src.validation.checks import ValidationReport, validate_scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario. Immutable; every run builds fresh model objects
    from it with build_model.
    """
    name: str
    servers: Tuple[Dict, ...]
    data_hosts: Tuple[Dict, ...]
    catalog: Tuple[Dict, ...]
    bandwidth_trace: Tuple[Dict, ...]
    symmetric: bool = True
    noise_sigma: float = 0.0
    failures: FailureScript = field(default_factory=FailureScript)
    alpha: float = config.EWMA_ALPHA
    prior_seconds: float = config.DEFAULT_PRIOR_SECONDS
    priors: Dict[str, float] = field(default_factory=dict)
    work_default: float = config.DEFAULT_WORK_SECONDS
    work_per_job: Dict[str, float] = field(default_factory=dict)
    work_jitter_sigma: float = 0.0
    event_interval: float = config.EVENT_INTERVAL_SECONDS
    output_bytes: int = config.DEFAULT_OUTPUT_BYTES
    return_outputs: bool = config.RETURN_OUTPUTS
    broker_host: Optional[str] = None
    horizon: float = config.HORIZON_SECONDS
    small_file_overhead: float = config.SMALL_FILE_OVERHEAD_SECONDS
    streaming_overlap: float = config.STREAMING_OVERLAP
    max_job_attempts: int = config.MAX_JOB_ATTEMPTS
    infeasible_event_limit: int = config.INFEASIBLE_EVENT_LIMIT

    @property
    def server_ids(self) -> List[str]:
        return sorted(s['id'] for s in self.servers)

    @property
    def host_ids(self) -> List[str]:
        return sorted(h['id'] for h in self.data_hosts)

    def build_model(self, seed: int = config.RANDOM_SEED) -> GridModel:
        """Fresh GridModel for one run; `seed` drives the bandwidth noise."""
        servers = [ComputeServer(
            id=s['id'],
            cpu_count=s.get('cpus', 1),
            speed_factor=float(s.get('speed', 1.0)),
            max_job_limit=s.get('max_jobs', s.get('cpus', 1)),
            middleware_tag=s.get('middleware', ''),
        ) for s in self.servers]

        co_located = {s['data_host']: s['id'] for s in self.servers if s.get('data_host')}
        hosts = [DataHost(id=h['id'], co_located_compute=h.get('co_located_compute', co_located.get(h['id'])))
                 for h in self.data_hosts]

        catalog = build_catalog(self.catalog, known_hosts=[h['id'] for h in self.data_hosts])
        trace = trace_from_records(self.bandwidth_trace or ({'from_time': 0.0},), symmetric=self.symmetric,
                                   noise_sigma=self.noise_sigma, seed=seed)
        return GridModel(servers, hosts, catalog, trace, alpha=self.alpha,
                         prior_seconds=self.prior_seconds, priors=self.priors)

    def work_seconds(self, job, seed: int = config.RANDOM_SEED) -> float:
        """True work of `job` at reference speed; jitter is fixed per (seed, job)."""
        seconds = float(self.work_per_job.get(job.id, self.work_default))
        if self.work_jitter_sigma > 0:
            rng = np.random.default_rng([int(seed), int(job.ordinal)])
            seconds *= float(rng.lognormal(mean=0.0, sigma=self.work_jitter_sigma))
        return seconds

    def with_failures(self, failures: FailureScript) -> 'Scenario':
        return replace(self, failures=failures)

    def summary(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'servers': len(self.servers),
            'data_hosts': len(self.data_hosts),
            'catalog_entries': len(self.catalog),
            'failures': len(self.failures),
        }


def scenario_from_dict(doc: Dict[str, Any], name: str = 'scenario') -> Scenario:
    """
    Validate a parsed scenario document and build a Scenario.

    Raises
    ------
    ScenarioError
        With one `path: message` diagnostic per schema violation
    """
    report: ValidationReport = validate_scenario(doc)
    if not report.passed:
        raise ScenarioError(f"invalid scenario '{name}'", report.diagnostics())
    for warning in report.warnings:
        logger.warning("scenario %s: %s: %s", name, warning.path, warning.message)

    estimator = doc.get('estimator', {})
    work = doc.get('work', {})
    return Scenario(
        name=doc.get('name', name),
        servers=tuple(doc['servers']),
        data_hosts=tuple(doc['data_hosts']),
        catalog=tuple(doc['catalog']),
        bandwidth_trace=tuple(doc.get('bandwidth_trace', [])),
        symmetric=bool(doc.get('symmetric', True)),
        noise_sigma=float(doc.get('noise', {}).get('sigma', 0.0)),
        failures=FailureScript.from_records(doc.get('failures', [])),
        alpha=float(estimator.get('alpha', config.EWMA_ALPHA)),
        prior_seconds=float(estimator.get('prior_seconds', config.DEFAULT_PRIOR_SECONDS)),
        priors={k: float(v) for k, v in estimator.get('priors', {}).items()},
        work_default=float(work.get('seconds', config.DEFAULT_WORK_SECONDS)),
        work_per_job={k: float(v) for k, v in work.get('per_job', {}).items()},
        work_jitter_sigma=float(work.get('jitter_sigma', 0.0)),
        event_interval=float(doc.get('event_interval', config.EVENT_INTERVAL_SECONDS)),
        output_bytes=int(doc.get('output_bytes', config.DEFAULT_OUTPUT_BYTES)),
        return_outputs=bool(doc.get('return_outputs', config.RETURN_OUTPUTS)),
        broker_host=doc.get('broker_host'),
        horizon=float(doc.get('horizon', config.HORIZON_SECONDS)),
        small_file_overhead=float(doc.get('small_file_overhead_seconds', config.SMALL_FILE_OVERHEAD_SECONDS)),
        streaming_overlap=float(doc.get('streaming_overlap', config.STREAMING_OVERLAP)),
        max_job_attempts=int(doc.get('max_job_attempts', config.MAX_JOB_ATTEMPTS)),
        infeasible_event_limit=int(doc.get('infeasible_event_limit', config.INFEASIBLE_EVENT_LIMIT)),
    )


def resolve_scenario_path(name_or_path: str) -> str:
    """Built-in names map to scenarios/<name>.json; anything else is a path."""
    if os.path.exists(name_or_path):
        return name_or_path
    candidate = os.path.join(config.SCENARIO_DIR, f"{name_or_path}.json")
    if os.path.exists(candidate):
        return candidate
    raise ScenarioError(f"scenario not found: '{name_or_path}' (looked for {candidate})")


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON (line {exc.lineno}: {exc.msg})") from exc
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc


def load_scenario(name_or_path: str) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    default_name = os.path.splitext(os.path.basename(path))[0]
    scenario = scenario_from_dict(_read_json(path), name=default_name)
    logger.info("loaded scenario %s: %s", path, scenario.summary())
    return scenario


def load_failure_script(path: str, scenario: Scenario) -> FailureScript:
    """
    Read a standalone failure script (`{"failures": [...]}` or a bare list)
    and check it against `scenario`.
    """
    doc = _read_json(path)
    records = doc.get('failures', []) if isinstance(doc, dict) else doc
    check = {
        'servers': list(scenario.servers),
        'data_hosts': list(scenario.data_hosts),
        'catalog': list(scenario.catalog),
        'horizon': scenario.horizon,
        'failures': records,
    }
    report = validate_scenario(check)
    problems = [d for d in report.diagnostics() if d.startswith('failures')]
    if problems:
        raise ScenarioError(f"invalid failure script '{path}'", problems)
    return FailureScript.from_records(records)
