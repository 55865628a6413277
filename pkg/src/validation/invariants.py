"""
Run-state invariants checked between simulation events.

Enabled per run (`check_invariants=True`); the property tests run every
simulation with the checker on.
"""

from typing import List, Optional

from src.decomposer.jobs import EXECUTING, QUEUED, STATUSES, UNASSIGNED
from src.errors import InvariantViolation
from src.scheduler.policies import Selection, select


def check_state(state) -> List[str]:
    """Return a description of every violated invariant (empty when consistent)."""
    problems = []
    counts = state.status_counts()
    if sum(counts[s] for s in STATUSES) != len(state.jobs):
        problems.append(f"status counts {counts} do not add up to {len(state.jobs)} jobs")

    unassigned = {job.id for job in state.jobs if job.status == UNASSIGNED}
    listed = state.unassigned.as_list()
    if len(listed) != len(set(listed)):
        problems.append("Unassigned-Jobs-List holds a job more than once")
    if set(listed) != unassigned:
        problems.append(f"Unassigned-Jobs-List {sorted(set(listed) ^ unassigned)} out of sync with job statuses")

    for server_id, server in state.model.servers.items():
        queued = state.queues[server_id]
        running = state.executing[server_id]
        if server.occupied > server.max_job_limit:
            problems.append(f"{server_id}: {server.occupied} jobs exceed max job limit {server.max_job_limit}")
        if len(running) > server.cpu_count:
            problems.append(f"{server_id}: {len(running)} executing jobs on {server.cpu_count} cpu(s)")
        if set(queued) | set(running) != server.busy_jobs:
            problems.append(f"{server_id}: busy set differs from queued + executing jobs")
        if not server.is_available and server.busy_jobs:
            problems.append(f"{server_id}: compute failed but holds jobs {sorted(server.busy_jobs)}")
        for job_id in queued:
            job = state.job(job_id)
            if job.status != QUEUED or job.assigned_server != server_id:
                problems.append(f"{job_id}: in {server_id} queue with status {job.status}")
        for job_id in running:
            job = state.job(job_id)
            if job.status != EXECUTING or job.assigned_server != server_id:
                problems.append(f"{job_id}: executing on {server_id} with status {job.status}")
    return problems


def check_work_conservation(state, policy: str, snapshot) -> List[str]:
    """
    Jobs a scheduling event left unassigned although `policy` could still
    place them on a server with a free slot.
    """
    problems = []
    for job_id in state.unassigned.as_list():
        outcome = select(policy, state.job(job_id), state, snapshot)
        if isinstance(outcome, Selection):
            problems.append(f"{job_id}: left unassigned while {outcome.server} has room for it")
    return problems


class InvariantChecker:
    """Raises InvariantViolation at the first event that leaves the state inconsistent."""

    def __init__(self, state):
        self.state = state
        self.last_time: Optional[float] = None
        self.checks = 0
        self.tick_checks = 0

    def check(self, time: float):
        if self.last_time is not None and time < self.last_time:
            raise InvariantViolation(f"time went backwards: {time} after {self.last_time}")
        self.last_time = time
        problems = check_state(self.state)
        self.checks += 1
        if problems:
            raise InvariantViolation(f"t={time}: " + '; '.join(problems))

    def check_tick(self, time: float, policy: str, snapshot):
        """After a scheduling event: no free server next to a placeable job."""
        problems = check_work_conservation(self.state, policy, snapshot)
        self.tick_checks += 1
        if problems:
            raise InvariantViolation(f"t={time} work conservation: " + '; '.join(problems))
