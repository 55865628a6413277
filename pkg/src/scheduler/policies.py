"""
Placement policies.

Each policy picks a (data host, compute server) pair for one job or reports
why it cannot. Ties are always broken lexicographically by id, so every
selection is reproducible.

- data-local: only servers sharing a site with a replica; no transfers
- compute-only: the server that finishes the job's compute soonest,
  ignoring where the data is; the transfer is still paid
- adaptive: the pair with the earliest estimated completion, transfer
  time included
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from src import config
from src.decomposer.jobs import Job
from src.grid_model.network import NetworkSnapshot
from src.grid_model.resources import ComputeServer, DataHost
from src.grid_model.timing import (
    available_bandwidth, estimated_completion_time, queue_wait, service_seconds,
)


@dataclass(frozen=True)
class Selection:
    data_host: Optional[str]
    server: str
    ect: float


@dataclass(frozen=True)
class Infeasible:
    """No pair this event. `hard` means no amount of waiting for capacity helps."""
    hard: bool
    reason: str


@dataclass(frozen=True)
class CandidatePair:
    data_host: Optional[str]
    server: str
    ect: float


@dataclass(frozen=True)
class CandidatePairList:
    """The Data-ComputeResource-List of one job."""
    job_id: str
    pairs: Tuple[CandidatePair, ...]

    def best(self) -> Optional[CandidatePair]:
        if not self.pairs:
            return None
        return min(self.pairs, key=lambda p: (p.ect, p.server, p.data_host or ''))


Outcome = Union[Selection, Infeasible]


def _ect(state, job: Job, server: ComputeServer, host: Optional[DataHost], snapshot) -> float:
    return estimated_completion_time(
        server, state.model.estimator(server.id), job, snapshot, host,
        overhead=state.stage_in_seconds(job), overlap=state.streaming_overlap,
    )


def _replica_hosts(state, job: Job) -> List[DataHost]:
    return [h for h in state.model.replica_hosts(job.required_lfn) if h.is_available]


def _open_servers(state) -> List[ComputeServer]:
    return [s for s in state.model.servers.values() if s.free_slots > 0]


def _no_data_selection(state, job: Job, snapshot) -> Outcome:
    if not state.model.available_servers():
        return Infeasible(hard=True, reason='no available compute server')
    best = None
    for server in _open_servers(state):
        key = (_ect(state, job, server, None, snapshot), server.id)
        if best is None or key < best:
            best = key
    if best is None:
        return Infeasible(hard=False, reason='all servers at max job limit')
    return Selection(data_host=None, server=best[1], ect=best[0])


def candidate_pairs(job: Job, state, snapshot: NetworkSnapshot) -> CandidatePairList:
    """Every feasible (host, server) pair for `job` with its estimated completion time."""
    pairs = []
    for host in _replica_hosts(state, job):
        for server in _open_servers(state):
            ect = _ect(state, job, server, host, snapshot)
            if math.isfinite(ect):
                pairs.append(CandidatePair(host.id, server.id, ect))
    return CandidatePairList(job_id=job.id, pairs=tuple(pairs))


def _hard_infeasible(state, job: Job) -> Optional[Infeasible]:
    if not state.model.available_servers():
        return Infeasible(hard=True, reason='no available compute server')
    if not _replica_hosts(state, job):
        return Infeasible(hard=True, reason='no replica host with a working data service')
    return None


def select_pair_adaptive(job: Job, state, snapshot: NetworkSnapshot) -> Outcome:
    """Pair with the earliest estimated completion; ties by (server id, host id)."""
    if job.required_lfn is None:
        return _no_data_selection(state, job, snapshot)
    hard = _hard_infeasible(state, job)
    if hard:
        return hard
    best = candidate_pairs(job, state, snapshot).best()
    if best is None:
        return Infeasible(hard=False, reason='no server with capacity and a working link')
    return Selection(data_host=best.data_host, server=best.server, ect=best.ect)


def select_server_compute_only(job: Job, state, snapshot: NetworkSnapshot) -> Outcome:
    """
    Server with the least queue wait plus service time; transfers are ignored
    in the choice. The data comes from the replica with the most bandwidth to
    that server.
    """
    if job.required_lfn is None:
        return _no_data_selection(state, job, snapshot)
    hard = _hard_infeasible(state, job)
    if hard:
        return hard

    hosts = _replica_hosts(state, job)
    best = None
    for server in _open_servers(state):
        reachable = [h for h in hosts if available_bandwidth(snapshot, h, server) > 0]
        if not reachable:
            continue
        service = service_seconds(server, state.model.estimator(server.id))
        key = (queue_wait(server.occupied, server.cpu_count, service) + service, server.id)
        if best is None or key < best[0]:
            best = (key, server, reachable)
    if best is None:
        return Infeasible(hard=False, reason='no server with capacity and a working link')

    _, server, reachable = best
    host = min(reachable, key=lambda h: (-available_bandwidth(snapshot, h, server), h.id))
    return Selection(data_host=host.id, server=server.id,
                     ect=_ect(state, job, server, host, snapshot))


def select_pair_data_local(job: Job, state, snapshot: Optional[NetworkSnapshot] = None) -> Outcome:
    """Earliest completion among servers sharing a site with a replica."""
    snapshot = snapshot if snapshot is not None else state.model.snapshot
    if job.required_lfn is None:
        return _no_data_selection(state, job, snapshot)

    local = []
    for host in _replica_hosts(state, job):
        if host.co_located_compute is None:
            continue
        server = state.model.servers.get(host.co_located_compute)
        if server is not None and server.is_available:
            local.append((host, server))
    if not local:
        return Infeasible(hard=True, reason='no available compute server at a data site')

    best = None
    for host, server in local:
        if server.free_slots <= 0:
            continue
        key = (_ect(state, job, server, host, snapshot), server.id, host.id)
        if best is None or key < best:
            best = key
    if best is None:
        return Infeasible(hard=False, reason='co-located servers at max job limit')
    return Selection(data_host=best[2], server=best[1], ect=best[0])


POLICY_SELECTORS = {
    config.POLICY_DATA_LOCAL: select_pair_data_local,
    config.POLICY_COMPUTE_ONLY: select_server_compute_only,
    config.POLICY_ADAPTIVE: select_pair_adaptive,
}


def select(policy: str, job: Job, state, snapshot: NetworkSnapshot) -> Outcome:
    try:
        selector = POLICY_SELECTORS[policy]
    except KeyError:
        raise ValueError(f"unknown policy '{policy}' (expected one of: {', '.join(config.POLICIES)})") from None
    return selector(job, state, snapshot)
