"""
Randomized checks of every placement policy against brute-force enumeration.

Each instance has at most 6 servers, 6 data hosts and 30 jobs. Jobs are
placed one after another, as in a scheduling event, so the oracle also sees
the occupancy left by earlier placements.
"""

import pytest
import numpy as np
import math
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.grid_model.estimator import RateEstimator
from src.scheduler.policies import Infeasible, Selection, select
from builders import MB, make_jobs, make_model, make_state

N_INSTANCES = 200
BANDWIDTHS = [0.0, 0.5, 1.0, 2.0, 4.0]


def random_instance(seed):
    """Model, state and the raw link table of one random instance."""
    rng = np.random.default_rng(seed)
    n_servers = int(rng.integers(1, 7))
    n_hosts = int(rng.integers(1, 7))

    servers = []
    for i in range(n_servers):
        cpus = int(rng.integers(1, 5))
        servers.append((f"s{i}", cpus, float(rng.choice([0.5, 1.0, 2.0])), cpus * int(rng.integers(1, 4))))
    hosts = [(f"h{j}", f"s{j}" if j < n_servers and rng.random() < 0.5 else None) for j in range(n_hosts)]
    files = []
    for k in range(int(rng.integers(1, 8))):
        holders = rng.choice(n_hosts, size=int(rng.integers(1, min(3, n_hosts) + 1)), replace=False)
        files.append((f"lfn:/r/f{k}.dat", int(rng.integers(1, 40)) * MB, [f"h{j}" for j in sorted(holders)]))
    links = {(h, s): float(rng.choice(BANDWIDTHS)) for h, _ in hosts for s, *_ in servers}

    model = make_model(servers, hosts, files, links=links)
    for sid, _, _, max_jobs in servers:
        model.estimators[sid] = RateEstimator.from_prior(sid, prior=float(rng.choice([50.0, 100.0, 150.0])))
        for b in range(int(rng.integers(0, max_jobs + 1))):
            model.server(sid).busy_jobs.add(f"busy-{sid}-{b}")
        if rng.random() < 0.15:
            model.set_compute_status(sid, False)
    for hid, _ in hosts:
        if rng.random() < 0.15:
            model.set_data_status(hid, False)

    lfns = [files[int(rng.integers(0, len(files)))][0] for _ in range(int(rng.integers(1, 31)))]
    state = make_state(model, make_jobs(model, lfns))
    return model, state, links


# =============================================================================
# Independent cost arithmetic
# =============================================================================
def oracle_bandwidth(model, links, host_id, server_id):
    if model.host(host_id).co_located_compute == server_id:
        return math.inf
    return links[(host_id, server_id)]


def oracle_service(model, server_id):
    return model.estimator(server_id).estimate / model.server(server_id).speed_factor


def oracle_wait(model, server_id):
    server = model.server(server_id)
    ahead = max(0, len(server.busy_jobs) - server.cpu_count + 1)
    return math.ceil(ahead / server.cpu_count) * oracle_service(model, server_id)


def oracle_ect(model, links, job, host_id, server_id):
    bw = oracle_bandwidth(model, links, host_id, server_id)
    if math.isinf(bw):
        transfer = 0.0
    elif bw == 0:
        return math.inf
    else:
        transfer = job.input_bytes / MB / bw
    return oracle_wait(model, server_id) + (transfer + oracle_service(model, server_id))


def live_hosts(model, job):
    return [h for h in sorted(model.file(job.required_lfn).hosts) if model.host(h).is_available]


def open_servers(model):
    return [sid for sid in sorted(model.servers)
            if model.server(sid).is_available and len(model.server(sid).busy_jobs) < model.server(sid).max_job_limit]


def adaptive_oracle(model, links, job):
    if not any(s.is_available for s in model.servers.values()) or not live_hosts(model, job):
        return Infeasible(hard=True, reason='')
    best = None
    for h in live_hosts(model, job):
        for s in open_servers(model):
            ect = oracle_ect(model, links, job, h, s)
            if math.isfinite(ect) and (best is None or (ect, s, h) < best):
                best = (ect, s, h)
    if best is None:
        return Infeasible(hard=False, reason='')
    return Selection(data_host=best[2], server=best[1], ect=best[0])


def compute_only_oracle(model, links, job):
    if not any(s.is_available for s in model.servers.values()) or not live_hosts(model, job):
        return Infeasible(hard=True, reason='')
    best = None
    for s in open_servers(model):
        reachable = [h for h in live_hosts(model, job) if oracle_bandwidth(model, links, h, s) > 0]
        if not reachable:
            continue
        key = (oracle_wait(model, s) + oracle_service(model, s), s)
        if best is None or key < best[0]:
            best = (key, s, reachable)
    if best is None:
        return Infeasible(hard=False, reason='')
    _, s, reachable = best
    h = sorted(reachable, key=lambda h: (-oracle_bandwidth(model, links, h, s), h))[0]
    return Selection(data_host=h, server=s, ect=oracle_ect(model, links, job, h, s))


def data_local_oracle(model, links, job):
    local = [(h, model.host(h).co_located_compute) for h in live_hosts(model, job)
             if model.host(h).co_located_compute is not None
             and model.server(model.host(h).co_located_compute).is_available]
    if not local:
        return Infeasible(hard=True, reason='')
    options = [(oracle_ect(model, links, job, h, s), s, h) for h, s in local if s in open_servers(model)]
    if not options:
        return Infeasible(hard=False, reason='')
    ect, s, h = min(options)
    return Selection(data_host=h, server=s, ect=ect)


ORACLES = {
    config.POLICY_ADAPTIVE: adaptive_oracle,
    config.POLICY_COMPUTE_ONLY: compute_only_oracle,
    config.POLICY_DATA_LOCAL: data_local_oracle,
}


def assert_same_outcome(actual, expected, context):
    if isinstance(expected, Infeasible):
        assert isinstance(actual, Infeasible), f"{context}: expected infeasible, got {actual}"
        assert actual.hard == expected.hard, f"{context}: hard flag differs"
    else:
        assert isinstance(actual, Selection), f"{context}: expected {expected}, got {actual}"
        assert (actual.data_host, actual.server) == (expected.data_host, expected.server), \
            f"{context}: expected {expected}, got {actual}"
        assert actual.ect == pytest.approx(expected.ect), context


@pytest.mark.parametrize('policy', config.POLICIES)
def test_policy_matches_brute_force(policy):
    """Every selection equals exhaustive enumeration with lexicographic ties."""
    oracle = ORACLES[policy]
    selections = 0
    for seed in range(N_INSTANCES):
        model, state, links = random_instance(seed)
        snapshot = model.snapshot
        for job_id in state.unassigned:
            job = state.job(job_id)
            expected = oracle(model, links, job)
            actual = select(policy, job, state, snapshot)
            assert_same_outcome(actual, expected, f"seed {seed} {policy} {job_id}")
            if isinstance(actual, Selection):
                state.assign(job_id, actual.server, actual.data_host, 0.0)
                selections += 1

        for server in model.servers.values():
            assert len(server.busy_jobs) <= server.max_job_limit, f"seed {seed}: {server.id} over capacity"
        assert state.check_conservation()
    assert selections > 0, "The instances should allow some placements"


def test_data_local_never_moves_data():
    """Every data-local placement reads from the server's own site."""
    for seed in range(N_INSTANCES):
        model, state, links = random_instance(seed)
        for job_id in state.unassigned:
            actual = select(config.POLICY_DATA_LOCAL, state.job(job_id), state, model.snapshot)
            if isinstance(actual, Selection):
                assert model.host(actual.data_host).co_located_compute == actual.server
                state.assign(job_id, actual.server, actual.data_host, 0.0)


def moved_bytes(model, job, selection):
    """Input bytes a placement sends over the network (0 for a co-located replica)."""
    if selection.data_host is None or model.host(selection.data_host).co_located_compute == selection.server:
        return 0
    return job.input_bytes


def test_adaptive_moves_no_more_bytes_than_compute_only_per_decision():
    """
    From the same state, the earliest-completion pair never transfers more
    input than the fastest-server choice. Even seeds advance the state with
    the adaptive pick and odd seeds with the compute-only pick.
    """
    compared = 0
    for seed in range(N_INSTANCES):
        model, state, _ = random_instance(seed)
        advance = config.POLICY_ADAPTIVE if seed % 2 == 0 else config.POLICY_COMPUTE_ONLY
        for job_id in state.unassigned:
            job = state.job(job_id)
            picks = {policy: select(policy, job, state, model.snapshot)
                     for policy in (config.POLICY_ADAPTIVE, config.POLICY_COMPUTE_ONLY)}
            adaptive, compute_only = picks[config.POLICY_ADAPTIVE], picks[config.POLICY_COMPUTE_ONLY]
            assert isinstance(adaptive, Selection) == isinstance(compute_only, Selection), \
                f"seed {seed} {job_id}: policies disagree on feasibility"
            if not isinstance(adaptive, Selection):
                continue

            assert moved_bytes(model, job, adaptive) <= moved_bytes(model, job, compute_only), \
                f"seed {seed} {job_id}: adaptive {adaptive} moves more than compute-only {compute_only}"
            compared += 1
            chosen = picks[advance]
            state.assign(job_id, chosen.server, chosen.data_host, 0.0)
    assert compared > 0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
