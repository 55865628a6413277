"""
The scheduling event.

Each event folds newly observed job durations into the rate estimators,
takes back undispatched jobs from servers whose availability changed, and
then places jobs from the head of the Unassigned-Jobs-List until the list
is exhausted or every server is at its max job limit.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

from src.grid_model.network import NetworkSnapshot
from src.scheduler.policies import Infeasible, select
from src.scheduler.state import SchedulerState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Assignment:
    job_id: str
    server: str
    data_host: Optional[str]
    decision_time: float
    predicted_completion: float

    def to_dict(self) -> Dict:
        return {
            'job': self.job_id,
            'server': self.server,
            'data_host': self.data_host,
            'time': self.decision_time,
            'predicted_completion': self.predicted_completion,
        }


def refresh_estimates(state: SchedulerState) -> int:
    """Fold queued duration observations into the estimators, oldest first."""
    count = len(state.pending_observations)
    for server_id, duration in state.pending_observations:
        state.model.observe_completion(server_id, duration)
    state.pending_observations.clear()
    return count


def availability_delta(state: SchedulerState) -> Set[str]:
    """
    Servers whose availability varied since the previous event.

    A server varied when its status or free-slot count differs from the view
    recorded at the end of the last event, or when its rank moved in any data
    host's sorted compute cache.
    """
    if not state.last_view:
        return set()
    changed = set()
    for server_id, view in state.current_view().items():
        before = state.last_view.get(server_id)
        if before is None or before != view:
            changed.add(server_id)

    for host_id, ranks in state.model.cache_ranks().items():
        previous = state.last_ranks.get(host_id)
        if previous is None or previous == ranks:
            continue
        for position, server_id in enumerate(ranks):
            if position >= len(previous) or previous[position] != server_id:
                changed.add(server_id)
    return changed


def reclaim_undispatched(state: SchedulerState, delta: Set[str], time: float) -> List[str]:
    """
    Move queued, not yet dispatched jobs on `delta` servers back to the head of
    the Unassigned-Jobs-List. Executing jobs stay where they are.
    """
    reclaimed = []
    for server_id in sorted(delta):
        reclaimed.extend(state.queues.get(server_id, []))
    if reclaimed:
        state.unassign(reclaimed, time)
        logger.debug("t=%.1f reclaimed %d undispatched job(s) from %s", time, len(reclaimed), sorted(delta))
    return sorted(reclaimed, key=lambda j: state.job(j).ordinal)


def run_scheduling_event(state: SchedulerState, policy: str, snapshot: NetworkSnapshot,
                         time: float) -> List[Assignment]:
    """
    One pass of the scheduling loop.

    Parameters
    ----------
    state : SchedulerState
        Run state; modified in place
    policy : str
        One of config.POLICIES
    snapshot : NetworkSnapshot
        Latest measurements
    time : float
        Simulation time of the event

    Returns
    -------
    list of Assignment
        In decision order
    """
    refresh_estimates(state)
    reclaim_undispatched(state, availability_delta(state), time)

    assignments: List[Assignment] = []
    for job_id in state.unassigned:
        if not any(s.free_slots > 0 for s in state.model.servers.values()):
            # Still examine hard-infeasible jobs so they can be declared failed.
            if not state.model.available_servers():
                _count_infeasible(state, job_id, Infeasible(True, 'no available compute server'), time)
                continue
            break

        job = state.job(job_id)
        outcome = select(policy, job, state, snapshot)
        if isinstance(outcome, Infeasible):
            if outcome.hard:
                _count_infeasible(state, job_id, outcome, time)
            else:
                state.infeasible_counts.pop(job_id, None)
            continue

        state.assign(job_id, outcome.server, outcome.data_host, time)
        assignments.append(Assignment(job_id, outcome.server, outcome.data_host,
                                      time, time + outcome.ect))

    state.remember_view()
    if assignments:
        logger.debug("t=%.1f %s placed %d job(s)", time, policy, len(assignments))
    return assignments


def _count_infeasible(state: SchedulerState, job_id: str, outcome: Infeasible, time: float):
    if state.recovery_pending:
        return
    count = state.infeasible_counts.get(job_id, 0) + 1
    state.infeasible_counts[job_id] = count
    if count >= state.infeasible_event_limit:
        state.fail_unplaced(job_id, time, outcome.reason)
