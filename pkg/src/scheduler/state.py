"""
Scheduler-side view of a run: the Unassigned-Jobs-List, per-server queues
and the bookkeeping that drives reclamation and infeasibility accounting.

Every job status change goes through SchedulerState so listeners (the
bookkeeper) see each transition exactly once.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from src import config
from src.decomposer.jobs import (
    DONE, EXECUTING, FAILED, QUEUED, STATUSES, UNASSIGNED, Job, JobSet,
)
from src.grid_model.model import GridModel
from src.plan_lang.nodes import Copy, MCopy

logger = logging.getLogger(__name__)

StatusListener = Callable[[Job, float, str], None]


class UnassignedJobsList:
    """Ordered queue of job ids awaiting placement; each id appears at most once."""

    def __init__(self, job_ids: Iterable[str] = ()):
        self._ids: List[str] = []
        for job_id in job_ids:
            self.append(job_id)

    def __len__(self):
        return len(self._ids)

    def __iter__(self):
        return iter(list(self._ids))

    def __contains__(self, job_id: str) -> bool:
        return job_id in self._ids

    def append(self, job_id: str):
        if job_id not in self._ids:
            self._ids.append(job_id)

    def prepend(self, job_ids: Iterable[str]):
        """Put `job_ids` at the head, in the order given."""
        new = [j for j in job_ids if j not in self._ids]
        self._ids[:0] = new

    def remove(self, job_id: str):
        self._ids.remove(job_id)

    def as_list(self) -> List[str]:
        return list(self._ids)


@dataclass
class ServerView:
    status: str
    free_slots: int


@dataclass
class SchedulerState:
    """
    Mutable run state shared by the scheduling loop and the simulator.

    Parameters
    ----------
    model : GridModel
        Testbed model
    jobs : JobSet
        All jobs of the run
    small_file_overhead : float
        Seconds per stage-in copy in a job's nodestart task
    streaming_overlap : float
        Overlap factor in [0, 1]
    """
    model: GridModel
    jobs: JobSet
    small_file_overhead: float = config.SMALL_FILE_OVERHEAD_SECONDS
    streaming_overlap: float = config.STREAMING_OVERLAP
    infeasible_event_limit: int = config.INFEASIBLE_EVENT_LIMIT
    max_job_attempts: int = config.MAX_JOB_ATTEMPTS
    unassigned: UnassignedJobsList = field(default_factory=UnassignedJobsList)
    queues: Dict[str, List[str]] = field(default_factory=dict)
    executing: Dict[str, List[str]] = field(default_factory=dict)
    infeasible_counts: Dict[str, int] = field(default_factory=dict)
    pending_observations: List[Tuple[str, float]] = field(default_factory=list)
    recovery_pending: bool = False
    last_view: Dict[str, ServerView] = field(default_factory=dict)
    last_ranks: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    listeners: List[StatusListener] = field(default_factory=list)

    def __post_init__(self):
        self._by_id: Dict[str, Job] = self.jobs.by_id()
        for server_id in self.model.servers:
            self.queues.setdefault(server_id, [])
            self.executing.setdefault(server_id, [])
        for job in self.jobs:
            if job.status == UNASSIGNED:
                self.unassigned.append(job.id)

    # -------------------------------------------------------------------------
    # Queries
    # -------------------------------------------------------------------------
    def job(self, job_id: str) -> Job:
        return self._by_id[job_id]

    def stage_in_seconds(self, job: Job) -> float:
        copies = sum(1 for c in job.nodestart if isinstance(c, (Copy, MCopy)))
        return copies * self.small_file_overhead

    def status_counts(self) -> Dict[str, int]:
        return self.jobs.status_counts()

    @property
    def unfinished(self) -> bool:
        return any(not job.is_terminal for job in self.jobs)

    def current_view(self) -> Dict[str, ServerView]:
        return {sid: ServerView(s.status, s.free_slots) for sid, s in self.model.servers.items()}

    def remember_view(self):
        """Record what the scheduler saw at the end of an event."""
        self.last_view = self.current_view()
        self.last_ranks = self.model.cache_ranks()

    # -------------------------------------------------------------------------
    # Transitions
    # -------------------------------------------------------------------------
    def _notify(self, job: Job, time: float, reason: str = ''):
        for listener in self.listeners:
            listener(job, time, reason)

    def _release(self, job: Job):
        server_id = job.assigned_server
        if server_id is None:
            return
        server = self.model.server(server_id)
        server.busy_jobs.discard(job.id)
        if job.id in self.queues[server_id]:
            self.queues[server_id].remove(job.id)
        if job.id in self.executing[server_id]:
            self.executing[server_id].remove(job.id)

    def assign(self, job_id: str, server_id: str, host_id: Optional[str], time: float):
        job = self.job(job_id)
        job.transition(QUEUED, time)
        job.assigned_server = server_id
        job.chosen_data_host = host_id
        self.unassigned.remove(job_id)
        self.infeasible_counts.pop(job_id, None)
        self.model.server(server_id).busy_jobs.add(job_id)
        self.queues[server_id].append(job_id)
        self._notify(job, time)

    def start(self, job_id: str, time: float):
        job = self.job(job_id)
        job.transition(EXECUTING, time)
        job.attempt_count += 1
        self.queues[job.assigned_server].remove(job_id)
        self.executing[job.assigned_server].append(job_id)
        self._notify(job, time)

    def complete(self, job_id: str, time: float):
        job = self.job(job_id)
        job.transition(DONE, time)
        self._release(job)
        self._notify(job, time)

    def unassign(self, job_ids: Iterable[str], time: float, reason: str = 'reclaimed'):
        """Return queued jobs to the head of the Unassigned-Jobs-List, ascending ordinal."""
        ordered = sorted((self.job(j) for j in job_ids), key=lambda j: j.ordinal)
        for job in ordered:
            self._release(job)
            job.transition(UNASSIGNED, time)
            self._notify(job, time, reason)
        self.unassigned.prepend(j.id for j in ordered)

    def fail(self, job_id: str, time: float, reason: str) -> bool:
        """
        Fail a queued or executing job; retry it when attempts remain.

        Returns True when the job went back to the Unassigned-Jobs-List.
        """
        job = self.job(job_id)
        self._release(job)
        job.transition(FAILED, time)
        self._notify(job, time, reason)
        if reason != 'horizon' and job.attempt_count < self.max_job_attempts:
            job.transition(UNASSIGNED, time)
            self.unassigned.append(job_id)
            self._notify(job, time, 'retry')
            return True
        logger.warning("%s failed after %d attempt(s): %s", job_id, job.attempt_count, reason)
        return False

    def fail_unplaced(self, job_id: str, time: float, reason: str):
        job = self.job(job_id)
        job.transition(FAILED, time)
        self.unassigned.remove(job_id)
        self.infeasible_counts.pop(job_id, None)
        logger.warning("%s failed without placement: %s", job_id, reason)
        self._notify(job, time, reason)

    def check_conservation(self) -> bool:
        counts = self.status_counts()
        return sum(counts[s] for s in STATUSES) == len(self.jobs) and counts[UNASSIGNED] == len(self.unassigned)
