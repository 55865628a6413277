"""
Experiment reports folded from bookkeeper records.

The live report of a run and the report replayed from its log are built by
the same accumulator from the same records, so they always agree.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import pandas as pd

from src.decomposer.jobs import DONE, EXECUTING, FAILED, QUEUED, TERMINAL

UNPLACED = '(unplaced)'

KIND_HEADER = 'header'
KIND_STATUS = 'status'
KIND_TRANSFER = 'transfer'
KIND_EXECUTION = 'execution'
KIND_RESOURCE = 'resource'
KIND_MEASUREMENT = 'measurement'
KIND_DECISION = 'decision'

DIRECTION_INPUT = 'input'
DIRECTION_OUTPUT = 'output'


@dataclass
class JobRecord:
    job: str
    history: List[Tuple[float, str]] = field(default_factory=list)
    server: Optional[str] = None
    data_host: Optional[str] = None
    transfer_bytes: int = 0
    transfer_seconds: float = 0.0
    output_bytes: int = 0
    execution_seconds: float = 0.0
    total_seconds: float = 0.0
    attempts: int = 0
    reason: str = ''

    @property
    def status(self) -> Optional[str]:
        return self.history[-1][1] if self.history else None

    @property
    def finish_time(self) -> Optional[float]:
        if self.status in TERMINAL:
            return self.history[-1][0]
        return None

    def to_dict(self) -> Dict:
        d = asdict(self)
        d['history'] = [[t, s] for t, s in self.history]
        d['status'] = self.status
        return d


@dataclass
class ExperimentReport:
    policy: str
    seed: int
    scenario: str
    total_time: float
    done: int
    failed: int
    bytes_transferred: int
    output_bytes: int
    per_server: Dict[str, Dict[str, int]]
    jobs: List[JobRecord]
    bandwidth_samples: List[Dict]
    resource_events: List[Dict]

    @property
    def job_count(self) -> int:
        return len(self.jobs)

    def job(self, job_id: str) -> JobRecord:
        for record in self.jobs:
            if record.job == job_id:
                return record
        raise KeyError(job_id)

    def to_dict(self) -> Dict:
        return {
            'policy': self.policy,
            'seed': self.seed,
            'scenario': self.scenario,
            'total_time': self.total_time,
            'done': self.done,
            'failed': self.failed,
            'bytes_transferred': self.bytes_transferred,
            'output_bytes': self.output_bytes,
            'per_server': self.per_server,
            'jobs': [j.to_dict() for j in self.jobs],
            'bandwidth_samples': self.bandwidth_samples,
            'resource_events': self.resource_events,
        }

    def jobs_frame(self) -> pd.DataFrame:
        rows = []
        for j in self.jobs:
            rows.append({
                'job': j.job,
                'status': j.status,
                'server': j.server,
                'data_host': j.data_host,
                'transfer_bytes': j.transfer_bytes,
                'transfer_seconds': j.transfer_seconds,
                'output_bytes': j.output_bytes,
                'execution_seconds': j.execution_seconds,
                'total_seconds': j.total_seconds,
                'attempts': j.attempts,
                'finish_time': j.finish_time,
                'reason': j.reason,
            })
        columns = ['job', 'status', 'server', 'data_host', 'transfer_bytes', 'transfer_seconds',
                   'output_bytes', 'execution_seconds', 'total_seconds', 'attempts', 'finish_time', 'reason']
        return pd.DataFrame(rows, columns=columns)

    def __str__(self):
        return (f"{self.policy}: {self.done} done, {self.failed} failed, "
                f"total time {self.total_time:.1f}s, {self.bytes_transferred:,} bytes transferred")


class ReportAccumulator:
    """Folds bookkeeper records, in log order, into an ExperimentReport."""

    def __init__(self):
        self.policy = ''
        self.seed = 0
        self.scenario = ''
        self.servers: List[str] = []
        self.jobs: Dict[str, JobRecord] = {}
        self._dispatched_at: Dict[str, float] = {}
        self.bandwidth_samples: List[Dict] = []
        self.resource_events: List[Dict] = []

    def add(self, record: Dict):
        kind = record['kind']
        handler = getattr(self, f"_on_{kind}", None)
        if handler is None:
            raise ValueError(f"unknown record kind '{kind}'")
        handler(record)

    def add_all(self, records: Iterable[Dict]) -> 'ReportAccumulator':
        for record in records:
            self.add(record)
        return self

    def _on_header(self, record):
        self.policy = record['policy']
        self.seed = record['seed']
        self.scenario = record['scenario']
        self.servers = list(record['servers'])
        for job_id in record['jobs']:
            self.jobs[job_id] = JobRecord(job=job_id)

    def _on_status(self, record):
        job = self.jobs[record['job']]
        status = record['status']
        job.history.append((record['time'], status))
        if status == QUEUED:
            job.server = record['server']
            job.data_host = record['data_host']
        elif status == EXECUTING:
            job.attempts += 1
            job.transfer_bytes = 0
            job.transfer_seconds = 0.0
            job.output_bytes = 0
            job.execution_seconds = 0.0
            job.total_seconds = 0.0
            self._dispatched_at[job.job] = record['time']
        elif status in TERMINAL:
            job.server = record['server']
            job.data_host = record['data_host']
            job.reason = record.get('reason', '')
            started = self._dispatched_at.get(job.job)
            job.total_seconds = record['time'] - started if started is not None and job.server else 0.0

    def _on_transfer(self, record):
        job = self.jobs[record['job']]
        if record['direction'] == DIRECTION_INPUT:
            job.transfer_bytes += record['bytes']
            job.transfer_seconds += record['seconds']
        else:
            job.output_bytes += record['bytes']

    def _on_execution(self, record):
        self.jobs[record['job']].execution_seconds = record['seconds']

    def _on_resource(self, record):
        self.resource_events.append({k: record[k] for k in ('time', 'resource', 'component', 'action')})

    def _on_measurement(self, record):
        for link in record['links']:
            self.bandwidth_samples.append(dict(link, time=record['time']))

    def _on_decision(self, record):
        pass

    def report(self) -> ExperimentReport:
        per_server = {sid: {DONE: 0, FAILED: 0} for sid in self.servers}
        done = failed = 0
        total_time = 0.0
        for job in self.jobs.values():
            status = job.status
            if status not in TERMINAL:
                continue
            key = job.server if job.server is not None else UNPLACED
            per_server.setdefault(key, {DONE: 0, FAILED: 0})[status] += 1
            if status == DONE:
                done += 1
            else:
                failed += 1
            total_time = max(total_time, job.finish_time)

        return ExperimentReport(
            policy=self.policy,
            seed=self.seed,
            scenario=self.scenario,
            total_time=total_time,
            done=done,
            failed=failed,
            bytes_transferred=sum(j.transfer_bytes for j in self.jobs.values()),
            output_bytes=sum(j.output_bytes for j in self.jobs.values()),
            per_server=per_server,
            jobs=list(self.jobs.values()),
            bandwidth_samples=list(self.bandwidth_samples),
            resource_events=list(self.resource_events),
        )


def fold_records(records: Iterable[Dict]) -> ExperimentReport:
    return ReportAccumulator().add_all(records).report()
