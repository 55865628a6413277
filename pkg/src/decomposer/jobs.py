"""
Jobs and the job status machine.

    unassigned -> queued -> executing -> done | failed
    queued -> unassigned          (reclaimed before dispatch)
    failed -> unassigned          (retried after an execution or transfer failure)
    unassigned -> failed          (placement proven impossible)
    queued -> failed              (simulation horizon reached)
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from src.errors import InvalidTransition
from src.plan_lang.nodes import Command, Value

UNASSIGNED = 'unassigned'
QUEUED = 'queued'
EXECUTING = 'executing'
DONE = 'done'
FAILED = 'failed'

STATUSES = (UNASSIGNED, QUEUED, EXECUTING, DONE, FAILED)
TERMINAL = (DONE, FAILED)

ALLOWED_TRANSITIONS = {
    UNASSIGNED: (QUEUED, FAILED),
    QUEUED: (EXECUTING, UNASSIGNED, FAILED),
    EXECUTING: (DONE, FAILED),
    DONE: (),
    FAILED: (UNASSIGNED,),
}


@dataclass
class Job:
    """One instantiation of the task with a unique combination of parameter values."""
    id: str
    ordinal: int
    bindings: Dict[str, Value]
    main: Tuple[Command, ...] = ()
    nodestart: Tuple[Command, ...] = ()
    required_lfn: Optional[str] = None
    input_bytes: int = 0
    status: str = UNASSIGNED
    assigned_server: Optional[str] = None
    chosen_data_host: Optional[str] = None
    attempt_count: int = 0
    history: List[Tuple[float, str]] = field(default_factory=list)

    @property
    def is_terminal(self) -> bool:
        return self.status in TERMINAL

    def transition(self, new_status: str, time: float):
        """Move to `new_status`, raising InvalidTransition outside the status machine."""
        if new_status not in ALLOWED_TRANSITIONS.get(self.status, ()):
            raise InvalidTransition(f"{self.id}: cannot move from {self.status} to {new_status}")
        self.status = new_status
        self.history.append((time, new_status))
        if new_status == UNASSIGNED:
            self.assigned_server = None
            self.chosen_data_host = None

    def to_manifest(self) -> Dict:
        return {
            'id': self.id,
            'bindings': dict(self.bindings),
            'required_lfn': self.required_lfn,
            'input_bytes': self.input_bytes,
            'nodestart': [' '.join((c.keyword,) + c.strings()) for c in self.nodestart],
            'main': [' '.join((c.keyword,) + c.strings()) for c in self.main],
        }


@dataclass
class JobSet:
    jobs: List[Job] = field(default_factory=list)

    def __len__(self):
        return len(self.jobs)

    def __iter__(self) -> Iterator[Job]:
        return iter(self.jobs)

    def __getitem__(self, job_id: str) -> Job:
        for job in self.jobs:
            if job.id == job_id:
                return job
        raise KeyError(job_id)

    def by_id(self) -> Dict[str, Job]:
        return {job.id: job for job in self.jobs}

    def status_counts(self) -> Dict[str, int]:
        counts = {status: 0 for status in STATUSES}
        for job in self.jobs:
            counts[job.status] += 1
        return counts
