"""
Schema and referential checks for scenario files.

Runs every check before reporting, so a broken scenario shows all of its
problems at once. Each failure names the offending field path, e.g.
`servers[2].cpus` or `catalog[17].replicas[0].host`.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Set

from src import config

KNOWN_KEYS = {
    'name', 'description', 'servers', 'data_hosts', 'catalog', 'bandwidth_trace', 'symmetric',
    'noise', 'failures', 'estimator', 'work', 'event_interval', 'output_bytes', 'return_outputs',
    'broker_host', 'horizon', 'small_file_overhead_seconds', 'streaming_overlap',
    'max_job_attempts', 'infeasible_event_limit',
}
COMPONENTS = ('compute', 'data')
ACTIONS = ('fail', 'recover')


@dataclass
class ValidationResult:
    """Container for a single validation check result."""
    check_name: str
    passed: bool
    message: str
    severity: str = 'error'  # 'error' or 'warning'
    path: str = ''

    def __str__(self):
        status = "✓ PASS" if self.passed else "✗ FAIL"
        where = f" [{self.path}]" if self.path else ''
        return f"[{status}] {self.check_name}{where}: {self.message}"


@dataclass
class ValidationReport:
    """Aggregated results from all validation checks."""
    results: List[ValidationResult]

    @property
    def passed(self):
        """Returns True only if all error-level checks passed."""
        return all(r.passed for r in self.results if r.severity == 'error')

    @property
    def warnings(self):
        """Returns warnings (non-blocking issues)."""
        return [r for r in self.results if r.severity == 'warning' and not r.passed]

    @property
    def errors(self) -> List[ValidationResult]:
        return [r for r in self.results if r.severity == 'error' and not r.passed]

    def diagnostics(self) -> List[str]:
        """`path: message` for every failed error-level check."""
        return [f"{r.path}: {r.message}" if r.path else r.message for r in self.errors]

    def print_report(self):
        """Print formatted validation report."""
        print("\n" + "="*70)
        print("SCENARIO VALIDATION REPORT")
        print("="*70)

        for result in self.results:
            print(result)

        print("="*70)
        if self.passed:
            print("✓ All critical checks passed")
            if self.warnings:
                print(f"⚠ {len(self.warnings)} warning(s) detected")
        else:
            print("✗ Validation FAILED - fix errors before proceeding")
        print("="*70 + "\n")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ScenarioValidator:
    """
    Validates a raw scenario document (parsed JSON).

    - Schema: required sections present, no unknown keys
    - Servers: unique ids, cpus/max_jobs ≥ 1, speed > 0
    - Data hosts: unique ids, co-location refers to declared servers
    - Catalog: LFNs, positive sizes, replicas on declared hosts, consistent sizes
    - Bandwidth trace: known sites, finite non-negative values
    - Failure script: declared resources, known components/actions, within horizon
    - Estimator, work model and run settings: value ranges
    """

    def __init__(self, doc: Dict[str, Any]):
        self.doc = doc if isinstance(doc, dict) else {}
        self.raw = doc
        self.results: List[ValidationResult] = []
        self.server_ids: Set[str] = set()
        self.host_ids: Set[str] = set()

    def validate(self) -> ValidationReport:
        """Run all validation checks and return aggregated report."""
        self._check_schema()
        self._check_servers()
        self._check_data_hosts()
        self._check_catalog()
        self._check_bandwidth()
        self._check_failures()
        self._check_estimator()
        self._check_work()
        self._check_settings()
        return ValidationReport(self.results)

    def _fail(self, check: str, path: str, message: str, severity: str = 'error'):
        self.results.append(ValidationResult(check, False, message, severity, path))

    def _pass(self, check: str, message: str):
        self.results.append(ValidationResult(check, True, message))

    def _list(self, key: str) -> List:
        value = self.doc.get(key, [])
        return value if isinstance(value, list) else []

    def _check_schema(self):
        check = "Schema Check"
        before = len(self.results)
        if not isinstance(self.raw, dict):
            self._fail(check, '', "scenario must be a JSON object")
            return
        for key in ('servers', 'data_hosts', 'catalog'):
            if key not in self.doc:
                self._fail(check, key, "required section is missing")
            elif not isinstance(self.doc[key], list):
                self._fail(check, key, "must be a list")
        if isinstance(self.doc.get('servers'), list) and not self.doc['servers']:
            self._fail(check, 'servers', "at least one compute server is required")
        for key in sorted(set(self.doc) - KNOWN_KEYS):
            self._fail(check, key, "unknown key ignored", severity='warning')
        if len(self.results) == before:
            self._pass(check, "all required sections present")

    def _check_servers(self):
        check = "Compute Servers"
        before = len(self.results)
        for i, server in enumerate(self._list('servers')):
            path = f"servers[{i}]"
            if not isinstance(server, dict):
                self._fail(check, path, "must be an object")
                continue
            sid = server.get('id')
            if not isinstance(sid, str) or not sid:
                self._fail(check, f"{path}.id", "must be a non-empty string")
            elif sid in self.server_ids:
                self._fail(check, f"{path}.id", f"duplicate server id '{sid}'")
            else:
                self.server_ids.add(sid)
            cpus = server.get('cpus', 1)
            if not _is_int(cpus) or cpus < 1:
                self._fail(check, f"{path}.cpus", f"must be an integer ≥ 1, got {cpus!r}")
            speed = server.get('speed', 1.0)
            if not _is_number(speed) or speed <= 0:
                self._fail(check, f"{path}.speed", f"must be a number > 0, got {speed!r}")
            max_jobs = server.get('max_jobs', cpus)
            if not _is_int(max_jobs) or max_jobs < 1:
                self._fail(check, f"{path}.max_jobs", f"must be an integer ≥ 1, got {max_jobs!r}")
        if len(self.results) == before:
            self._pass(check, f"{len(self.server_ids)} server(s) well formed")

    def _check_data_hosts(self):
        check = "Data Hosts"
        before = len(self.results)
        hosts = self._list('data_hosts')
        co_located: Dict[str, str] = {}
        for i, host in enumerate(hosts):
            path = f"data_hosts[{i}]"
            if not isinstance(host, dict):
                self._fail(check, path, "must be an object")
                continue
            hid = host.get('id')
            if not isinstance(hid, str) or not hid:
                self._fail(check, f"{path}.id", "must be a non-empty string")
                continue
            if hid in self.host_ids:
                self._fail(check, f"{path}.id", f"duplicate data host id '{hid}'")
            self.host_ids.add(hid)
            compute = host.get('co_located_compute')
            if compute is not None:
                if compute not in self.server_ids:
                    self._fail(check, f"{path}.co_located_compute", f"unknown compute server '{compute}'")
                elif compute in co_located:
                    self._fail(check, f"{path}.co_located_compute",
                               f"server '{compute}' already co-located with '{co_located[compute]}'")
                else:
                    co_located[compute] = hid
            if hid in self.server_ids and compute not in (None, hid):
                self._fail(check, f"{path}.co_located_compute",
                           f"host '{hid}' shares its id with a server but is co-located with '{compute}'")

        for i, server in enumerate(self._list('servers')):
            if not isinstance(server, dict) or server.get('data_host') is None:
                continue
            hid = server['data_host']
            if hid not in self.host_ids:
                self._fail(check, f"servers[{i}].data_host", f"unknown data host '{hid}'")
            elif co_located.get(server.get('id')) not in (None, hid):
                self._fail(check, f"servers[{i}].data_host",
                           f"conflicts with data host '{co_located[server.get('id')]}' co-location")
        if len(self.results) == before:
            self._pass(check, f"{len(self.host_ids)} data host(s), {len(co_located)} co-located")

    def _check_catalog(self):
        check = "Replica Catalog"
        before = len(self.results)
        sizes: Dict[str, Any] = {}
        entries = self._list('catalog')
        for i, entry in enumerate(entries):
            path = f"catalog[{i}]"
            if not isinstance(entry, dict):
                self._fail(check, path, "must be an object")
                continue
            lfn = entry.get('lfn')
            if not isinstance(lfn, str) or not lfn.startswith('lfn:/'):
                self._fail(check, f"{path}.lfn", f"must be an absolute 'lfn:/...' name, got {lfn!r}")
            size = entry.get('size_bytes')
            if not _is_int(size) or size <= 0:
                self._fail(check, f"{path}.size_bytes", f"must be a positive integer, got {size!r}")
            elif isinstance(lfn, str):
                if lfn in sizes and sizes[lfn] != size:
                    self._fail(check, f"{path}.size_bytes",
                               f"'{lfn}' registered earlier with size {sizes[lfn]}")
                sizes.setdefault(lfn, size)
            replicas = entry.get('replicas')
            if not isinstance(replicas, list) or not replicas:
                self._fail(check, f"{path}.replicas", "must be a non-empty list")
                continue
            for j, replica in enumerate(replicas):
                host = replica.get('host') if isinstance(replica, dict) else None
                if host not in self.host_ids:
                    self._fail(check, f"{path}.replicas[{j}].host", f"unknown data host {host!r}")
        if len(self.results) == before:
            self._pass(check, f"{len(entries)} catalog entr{'y' if len(entries) == 1 else 'ies'}")

    def _check_link_table(self, check: str, path: str, table, sites: Set[str], positive_ok: bool = True):
        if table is None:
            return
        if not isinstance(table, dict):
            self._fail(check, path, "must be an object of objects")
            return
        for src, row in table.items():
            if src not in sites:
                self._fail(check, f"{path}.{src}", f"unknown site '{src}'")
            if not isinstance(row, dict):
                self._fail(check, f"{path}.{src}", "must be an object")
                continue
            for dst, value in row.items():
                if dst not in sites:
                    self._fail(check, f"{path}.{src}.{dst}", f"unknown site '{dst}'")
                if not _is_number(value) or value < 0:
                    self._fail(check, f"{path}.{src}.{dst}", f"must be a finite number ≥ 0, got {value!r}")

    def _check_bandwidth(self):
        check = "Bandwidth Trace"
        before = len(self.results)
        sites = self.server_ids | self.host_ids
        trace = self.doc.get('bandwidth_trace', [])
        if not isinstance(trace, list):
            self._fail(check, 'bandwidth_trace', "must be a list of segments")
            return
        seen_times = set()
        for i, segment in enumerate(trace):
            path = f"bandwidth_trace[{i}]"
            if not isinstance(segment, dict):
                self._fail(check, path, "must be an object")
                continue
            start = segment.get('from_time', 0.0)
            if not _is_number(start) or start < 0:
                self._fail(check, f"{path}.from_time", f"must be a finite number ≥ 0, got {start!r}")
            elif start in seen_times:
                self._fail(check, f"{path}.from_time", f"duplicate segment start {start}")
            else:
                seen_times.add(start)
            for key in ('default', 'default_latency'):
                value = segment.get(key, 1.0)
                if not _is_number(value) or value < 0:
                    self._fail(check, f"{path}.{key}", f"must be a finite number ≥ 0, got {value!r}")
            self._check_link_table(check, f"{path}.matrix", segment.get('matrix'), sites)
            self._check_link_table(check, f"{path}.latency", segment.get('latency'), sites)
        if trace and 0 not in seen_times and 0.0 not in seen_times:
            self._fail(check, 'bandwidth_trace', "first segment must start at from_time 0")
        noise = self.doc.get('noise', {})
        sigma = noise.get('sigma', 0.0) if isinstance(noise, dict) else None
        if not _is_number(sigma) or sigma < 0:
            self._fail(check, 'noise.sigma', f"must be a finite number ≥ 0, got {sigma!r}")
        if len(self.results) == before:
            self._pass(check, f"{max(1, len(trace))} segment(s) over {len(sites)} site(s)")

    def _check_failures(self):
        check = "Failure Script"
        before = len(self.results)
        horizon = self.doc.get('horizon', config.HORIZON_SECONDS)
        failures = self.doc.get('failures', [])
        if not isinstance(failures, list):
            self._fail(check, 'failures', "must be a list")
            return
        for i, entry in enumerate(failures):
            path = f"failures[{i}]"
            if not isinstance(entry, dict):
                self._fail(check, path, "must be an object")
                continue
            time = entry.get('time')
            if not _is_number(time) or time < 0:
                self._fail(check, f"{path}.time", f"must be a finite number ≥ 0, got {time!r}")
            elif _is_number(horizon) and time > horizon:
                self._fail(check, f"{path}.time", f"{time} lies beyond the horizon {horizon}")
            component = entry.get('component')
            if component not in COMPONENTS:
                self._fail(check, f"{path}.component", f"must be one of {COMPONENTS}, got {component!r}")
            if entry.get('action') not in ACTIONS:
                self._fail(check, f"{path}.action", f"must be one of {ACTIONS}, got {entry.get('action')!r}")
            resource = entry.get('resource')
            declared = self.server_ids if component == 'compute' else self.host_ids
            if component in COMPONENTS and resource not in declared:
                kind = 'compute server' if component == 'compute' else 'data host'
                self._fail(check, f"{path}.resource", f"unknown {kind} {resource!r}")
        if len(self.results) == before:
            self._pass(check, f"{len(failures)} scripted failure event(s)")

    def _check_estimator(self):
        check = "Rate Estimator"
        before = len(self.results)
        est = self.doc.get('estimator', {})
        if not isinstance(est, dict):
            self._fail(check, 'estimator', "must be an object")
            return
        alpha = est.get('alpha', config.EWMA_ALPHA)
        if not _is_number(alpha) or not 0 < alpha <= 1:
            self._fail(check, 'estimator.alpha', f"must be in (0, 1], got {alpha!r}")
        prior = est.get('prior_seconds', config.DEFAULT_PRIOR_SECONDS)
        if not _is_number(prior) or prior <= 0:
            self._fail(check, 'estimator.prior_seconds', f"must be a number > 0, got {prior!r}")
        priors = est.get('priors', {})
        for sid, value in (priors.items() if isinstance(priors, dict) else []):
            if sid not in self.server_ids:
                self._fail(check, f"estimator.priors.{sid}", f"unknown compute server '{sid}'")
            if not _is_number(value) or value <= 0:
                self._fail(check, f"estimator.priors.{sid}", f"must be a number > 0, got {value!r}")
        if len(self.results) == before:
            self._pass(check, f"alpha={alpha}, prior={prior}s")

    def _check_work(self):
        check = "Work Model"
        before = len(self.results)
        work = self.doc.get('work', {})
        if not isinstance(work, dict):
            self._fail(check, 'work', "must be an object")
            return
        seconds = work.get('seconds', config.DEFAULT_WORK_SECONDS)
        if not _is_number(seconds) or seconds <= 0:
            self._fail(check, 'work.seconds', f"must be a number > 0, got {seconds!r}")
        per_job = work.get('per_job', {})
        for job_id, value in (per_job.items() if isinstance(per_job, dict) else []):
            if not _is_number(value) or value <= 0:
                self._fail(check, f"work.per_job.{job_id}", f"must be a number > 0, got {value!r}")
        sigma = work.get('jitter_sigma', 0.0)
        if not _is_number(sigma) or sigma < 0:
            self._fail(check, 'work.jitter_sigma', f"must be a finite number ≥ 0, got {sigma!r}")
        if len(self.results) == before:
            self._pass(check, f"{seconds}s per job at reference speed")

    def _check_settings(self):
        check = "Run Settings"
        before = len(self.results)
        positive = {
            'event_interval': config.EVENT_INTERVAL_SECONDS,
            'horizon': config.HORIZON_SECONDS,
        }
        for key, default in positive.items():
            value = self.doc.get(key, default)
            if not _is_number(value) or value <= 0:
                self._fail(check, key, f"must be a number > 0, got {value!r}")
        overhead = self.doc.get('small_file_overhead_seconds', config.SMALL_FILE_OVERHEAD_SECONDS)
        if not _is_number(overhead) or overhead < 0:
            self._fail(check, 'small_file_overhead_seconds', f"must be a number ≥ 0, got {overhead!r}")
        overlap = self.doc.get('streaming_overlap', config.STREAMING_OVERLAP)
        if not _is_number(overlap) or not 0 <= overlap <= 1:
            self._fail(check, 'streaming_overlap', f"must be in [0, 1], got {overlap!r}")
        output = self.doc.get('output_bytes', config.DEFAULT_OUTPUT_BYTES)
        if not _is_int(output) or output < 0:
            self._fail(check, 'output_bytes', f"must be an integer ≥ 0, got {output!r}")
        for key in ('max_job_attempts', 'infeasible_event_limit'):
            value = self.doc.get(key, 1)
            if not _is_int(value) or value < 1:
                self._fail(check, key, f"must be an integer ≥ 1, got {value!r}")
        broker: Optional[str] = self.doc.get('broker_host')
        if broker is not None and broker not in self.server_ids | self.host_ids:
            self._fail(check, 'broker_host', f"unknown site '{broker}'")
        if len(self.results) == before:
            self._pass(check, "run settings in range")


def validate_scenario(doc: Dict[str, Any]) -> ValidationReport:
    return ScenarioValidator(doc).validate()
