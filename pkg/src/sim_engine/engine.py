"""
Discrete-event simulation of the broker on a testbed scenario.

The engine plays the roles of the dispatcher, the remote agents and the
monitor: it starts queued jobs when a CPU frees up, stages input data over
the measured link, runs the job for its true work time, returns the outputs
to the broker host and reports every state change to the bookkeeper.

Job timeline on a server, from dispatch:

    stage-in (nodestart copies) -> input transfer -> execution -> output return

A job's input and output links are sampled once, when stage-in finishes.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional

from src import config
from src.decomposer.decompose import decompose, resolve_dynamic_parameters
from src.decomposer.jobs import EXECUTING, QUEUED, UNASSIGNED, Job, JobSet
from src.grid_model.model import GridModel
from src.grid_model.network import NetworkSnapshot
from src.grid_model.timing import available_bandwidth, overlapped, transfer_seconds
from src.plan_lang.nodes import PlanFile
from src.scheduler.events import run_scheduling_event
from src.scheduler.state import SchedulerState
from src.sim_engine.bookkeeper import Bookkeeper
from src.sim_engine.events import (
    ACTION_FAIL, COMPONENT_COMPUTE, DISPATCH_COMPLETE, EXECUTION_COMPLETE,
    MEASUREMENT_ROUND, RESOURCE_FAILURE, RESOURCE_RECOVERY, SCHEDULING_TICK,
    TRANSFER_COMPLETE, EventQueue, FailureEntry, SimEvent,
)
from src.sim_engine.report import (
    DIRECTION_INPUT, DIRECTION_OUTPUT, KIND_DECISION, KIND_EXECUTION, KIND_HEADER,
    KIND_MEASUREMENT, KIND_RESOURCE, KIND_STATUS, KIND_TRANSFER, ExperimentReport,
)
from src.validation.invariants import InvariantChecker

if TYPE_CHECKING:
    from src.broker_cli.scenario import Scenario

logger = logging.getLogger(__name__)

REASON_HORIZON = 'horizon'


@dataclass(frozen=True)
class JobTimeline:
    """Durations of one dispatch, fixed when stage-in completes."""
    transfer_seconds: float
    execution_seconds: float
    output_seconds: float
    input_bytes: int
    output_bytes: int
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _link_to_broker(model: GridModel, snapshot: NetworkSnapshot, server_id: str, broker_host: str) -> float:
    if broker_host == server_id:
        return math.inf
    site = model.site_host(server_id)
    if site is not None and site.id == broker_host:
        return math.inf
    return snapshot.bandwidth(server_id, broker_host)


def execute_job_timeline(model: GridModel, job: Job, server_id: str, data_host: Optional[str],
                         snapshot: NetworkSnapshot, work_seconds: float,
                         output_bytes: int = 0, broker_host: Optional[str] = None,
                         overlap: float = config.STREAMING_OVERLAP) -> JobTimeline:
    """
    Transfer and execution durations of `job` on `server_id` at this snapshot.

    Execution time is the job's true work divided by the server speed, never
    the scheduler's estimate. A down data service or a zero-bandwidth link
    yields a timeline with `failure` set.
    """
    server = model.server(server_id)
    execution = work_seconds / server.speed_factor

    transfer, moved = 0.0, 0
    if data_host is not None:
        host = model.host(data_host)
        if not host.is_available:
            return JobTimeline(0.0, execution, 0.0, 0, 0, failure='data service down')
        bandwidth = available_bandwidth(snapshot, host, server)
        if bandwidth <= 0:
            return JobTimeline(0.0, execution, 0.0, 0, 0, failure='input link down')
        transfer = transfer_seconds(job.input_bytes, bandwidth)
        moved = 0 if math.isinf(bandwidth) else job.input_bytes

    output_seconds, returned = 0.0, 0
    if broker_host is not None and output_bytes > 0:
        bandwidth = _link_to_broker(model, snapshot, server_id, broker_host)
        if bandwidth <= 0:
            return JobTimeline(transfer, execution, 0.0, moved, 0, failure='output link down')
        output_seconds = transfer_seconds(output_bytes, bandwidth)
        returned = 0 if math.isinf(bandwidth) else output_bytes

    return JobTimeline(transfer, execution, output_seconds, moved, returned)


class Simulation:
    """
    One experiment run: a scenario, a job set, a policy and a seed.

    Parameters
    ----------
    scenario : Scenario
        Loaded scenario
    jobs : JobSet
        Jobs to run (fresh, all unassigned)
    policy : str
        One of config.POLICIES
    seed : int
        Seeds bandwidth noise and work jitter
    log_path : str, optional
        Bookkeeper log location; None keeps the log in memory
    event_interval : float, optional
        Overrides the scenario's scheduling interval
    check_invariants : bool
        Check run-state invariants after every event
    """

    def __init__(self, scenario: 'Scenario', jobs: JobSet, policy: str, seed: int = config.RANDOM_SEED,
                 log_path: Optional[str] = None, event_interval: Optional[float] = None,
                 check_invariants: bool = False, model: Optional[GridModel] = None):
        if policy not in config.POLICIES:
            raise ValueError(f"unknown policy '{policy}' (expected one of: {', '.join(config.POLICIES)})")
        self.scenario = scenario
        self.policy = policy
        self.seed = seed
        self.model = model if model is not None else scenario.build_model(seed)
        self.interval = event_interval if event_interval is not None else scenario.event_interval
        self.horizon = scenario.horizon
        self.state = SchedulerState(
            model=self.model,
            jobs=jobs,
            small_file_overhead=scenario.small_file_overhead,
            streaming_overlap=scenario.streaming_overlap,
            infeasible_event_limit=scenario.infeasible_event_limit,
            max_job_attempts=scenario.max_job_attempts,
        )
        self.state.listeners.append(self._on_status)
        self.queue = EventQueue()
        self.bookkeeper = Bookkeeper(log_path)
        self.timelines: Dict[str, JobTimeline] = {}
        self.now = 0.0
        self._immediate_ticks = set()
        self._last_links: Optional[list] = None
        self.checker = InvariantChecker(self.state) if check_invariants else None

    # -------------------------------------------------------------------------
    # Bookkeeping
    # -------------------------------------------------------------------------
    def _on_status(self, job: Job, time: float, reason: str):
        self.bookkeeper.append({
            'kind': KIND_STATUS,
            'time': time,
            'job': job.id,
            'status': job.status,
            'server': job.assigned_server,
            'data_host': job.chosen_data_host,
            'reason': reason,
        })

    def _write_header(self):
        self.bookkeeper.append({
            'kind': KIND_HEADER,
            'time': 0.0,
            'policy': self.policy,
            'seed': int(self.seed),
            'scenario': self.scenario.name,
            'servers': list(self.model.servers),
            'jobs': [job.id for job in self.state.jobs],
        })

    # -------------------------------------------------------------------------
    # Event scheduling helpers
    # -------------------------------------------------------------------------
    def _push(self, event: SimEvent):
        self.queue.push(event)

    def _schedule_periodic(self, time: float):
        self._push(SimEvent(time, MEASUREMENT_ROUND, 'periodic'))
        self._push(SimEvent(time, SCHEDULING_TICK, 'periodic', {'periodic': True}))

    def _schedule_immediate_tick(self):
        if self.now not in self._immediate_ticks:
            self._immediate_ticks.add(self.now)
            self._push(SimEvent(self.now, SCHEDULING_TICK, 'immediate', {'periodic': False}))

    def _seed_events(self):
        for entry in self.scenario.failures:
            self._push(entry.to_event())
        for breakpoint in self.model.trace.breakpoints():
            if 0 < breakpoint <= self.horizon:
                self._push(SimEvent(breakpoint, MEASUREMENT_ROUND, 'trace'))
        self._schedule_periodic(0.0)

    # -------------------------------------------------------------------------
    # Main loop
    # -------------------------------------------------------------------------
    def run(self) -> ExperimentReport:
        """Process events until every job is done or failed, then return the report."""
        try:
            self._write_header()
            if self.state.unfinished:
                self._seed_events()
            while self.state.unfinished and len(self.queue):
                if self.queue.peek_time() > self.horizon:
                    break
                event = self.queue.pop()
                self.now = event.time
                self.state.recovery_pending = self.queue.pending(RESOURCE_RECOVERY) > 0
                self._handle(event)
                self._dispatch_ready()
                if self.checker is not None:
                    self.checker.check(self.now)
            if self.state.unfinished:
                self._expire_at_horizon()
            self.bookkeeper.close()
        except BaseException:
            self.bookkeeper.abort()
            raise

        report = self.bookkeeper.report()
        logger.info("%s run finished: %s", self.policy, report)
        return report

    def _handle(self, event: SimEvent):
        handler = {
            RESOURCE_FAILURE: self._on_resource_change,
            RESOURCE_RECOVERY: self._on_resource_change,
            MEASUREMENT_ROUND: self._on_measurement,
            EXECUTION_COMPLETE: self._on_execution_complete,
            TRANSFER_COMPLETE: self._on_transfer_complete,
            DISPATCH_COMPLETE: self._on_dispatch_complete,
            SCHEDULING_TICK: self._on_tick,
        }[event.kind]
        handler(event)

    def _on_measurement(self, event: SimEvent):
        snapshot = self.model.update_measurements(self.now)
        links = [{k: r[k] for k in ('from', 'to', 'bandwidth', 'latency')} for r in snapshot.to_records()]
        # Only changes are logged; a sample holds until the next one
        if links != self._last_links:
            self._last_links = links
            self.bookkeeper.append({'kind': KIND_MEASUREMENT, 'time': self.now, 'links': links})

    def _on_tick(self, event: SimEvent):
        if event.payload.get('periodic'):
            next_time = self.now + self.interval
            if next_time <= self.horizon:
                self._schedule_periodic(next_time)
        else:
            self._immediate_ticks.discard(self.now)

        for assignment in run_scheduling_event(self.state, self.policy, self.model.snapshot, self.now):
            self.bookkeeper.append(dict(assignment.to_dict(), kind=KIND_DECISION))
        if self.checker is not None:
            self.checker.check_tick(self.now, self.policy, self.model.snapshot)

    # -------------------------------------------------------------------------
    # Failures
    # -------------------------------------------------------------------------
    def _on_resource_change(self, event: SimEvent):
        action = 'fail' if event.kind == RESOURCE_FAILURE else 'recover'
        entry = FailureEntry(self.now, event.payload['resource'], event.payload['component'], action)
        self.inject_failure(entry)

    def inject_failure(self, entry: FailureEntry):
        """
        Apply one failure-script entry.

        A compute failure fails the server's executing jobs (retried while
        attempts remain) and returns its queued jobs to the Unassigned-Jobs-List.
        A data failure only disqualifies the host's replicas from later
        placements. Recovery clears the flag.
        """
        available = entry.action != ACTION_FAIL
        self.bookkeeper.append(dict(entry.to_dict(), kind=KIND_RESOURCE))
        if entry.component == COMPONENT_COMPUTE:
            self.model.set_compute_status(entry.resource, available)
            if not available:
                for job_id in list(self.state.executing[entry.resource]):
                    self.timelines.pop(job_id, None)
                    self.state.fail(job_id, self.now, 'compute failure')
                queued = list(self.state.queues[entry.resource])
                if queued:
                    self.state.unassign(queued, self.now, 'compute failure')
        else:
            self.model.set_data_status(entry.resource, available)
        logger.info("t=%.1f %s %s %s", self.now, entry.resource, entry.component, entry.action)
        self._schedule_immediate_tick()

    # -------------------------------------------------------------------------
    # Job timeline
    # -------------------------------------------------------------------------
    def _dispatch_ready(self):
        """Start queued jobs, FIFO per server, while CPUs are free."""
        for server_id, server in self.model.servers.items():
            if not server.is_available:
                continue
            while self.state.queues[server_id] and len(self.state.executing[server_id]) < server.cpu_count:
                job_id = self.state.queues[server_id][0]
                self.state.start(job_id, self.now)
                job = self.state.job(job_id)
                self._push(SimEvent(self.now + self.state.stage_in_seconds(job), DISPATCH_COMPLETE,
                                    job_id, {'attempt': job.attempt_count}))

    def _current(self, event: SimEvent) -> Optional[Job]:
        """The event's job, or None when the event belongs to an abandoned attempt."""
        job = self.state.job(event.id)
        if job.status != EXECUTING or job.attempt_count != event.payload.get('attempt'):
            return None
        return job

    def _on_dispatch_complete(self, event: SimEvent):
        job = self._current(event)
        if job is None:
            return
        timeline = execute_job_timeline(
            self.model, job, job.assigned_server, job.chosen_data_host, self.model.snapshot,
            self.scenario.work_seconds(job, self.seed),
            output_bytes=self.scenario.output_bytes if self.scenario.return_outputs else 0,
            broker_host=self.scenario.broker_host,
            overlap=self.scenario.streaming_overlap,
        )
        if not timeline.ok:
            logger.warning("t=%.1f %s transfer failed: %s", self.now, job.id, timeline.failure)
            self.state.fail(job.id, self.now, timeline.failure)
            self._schedule_immediate_tick()
            return

        self.timelines[job.id] = timeline
        attempt = {'attempt': job.attempt_count}
        self._push(SimEvent(self.now + timeline.transfer_seconds, TRANSFER_COMPLETE, job.id, attempt))
        finish = (self.now + overlapped(timeline.transfer_seconds, timeline.execution_seconds,
                                        self.scenario.streaming_overlap)
                  + timeline.output_seconds)
        self._push(SimEvent(finish, EXECUTION_COMPLETE, job.id, attempt))

    def _on_transfer_complete(self, event: SimEvent):
        job = self._current(event)
        if job is None:
            return
        timeline = self.timelines[job.id]
        if timeline.input_bytes:
            self.bookkeeper.append({
                'kind': KIND_TRANSFER, 'time': self.now, 'job': job.id, 'direction': DIRECTION_INPUT,
                'server': job.assigned_server, 'data_host': job.chosen_data_host,
                'bytes': timeline.input_bytes, 'seconds': timeline.transfer_seconds,
            })

    def _on_execution_complete(self, event: SimEvent):
        job = self._current(event)
        if job is None:
            return
        timeline = self.timelines.pop(job.id)
        server = self.model.server(job.assigned_server)
        self.bookkeeper.append({'kind': KIND_EXECUTION, 'time': self.now, 'job': job.id,
                                'server': server.id, 'seconds': timeline.execution_seconds})
        if timeline.output_bytes:
            self.bookkeeper.append({
                'kind': KIND_TRANSFER, 'time': self.now, 'job': job.id, 'direction': DIRECTION_OUTPUT,
                'server': server.id, 'data_host': self.scenario.broker_host,
                'bytes': timeline.output_bytes, 'seconds': timeline.output_seconds,
            })
        server.record_completion(job.id, timeline.execution_seconds)
        self.state.pending_observations.append((server.id, timeline.execution_seconds * server.speed_factor))
        self.state.complete(job.id, self.now)
        self._schedule_immediate_tick()

    def _expire_at_horizon(self):
        self.now = max(self.now, self.horizon)
        logger.warning("horizon %.0fs reached with unfinished jobs", self.horizon)
        for job in self.state.jobs:
            if job.status in (EXECUTING, QUEUED):
                self.timelines.pop(job.id, None)
                self.state.fail(job.id, self.now, REASON_HORIZON)
            elif job.status == UNASSIGNED:
                self.state.fail_unplaced(job.id, self.now, REASON_HORIZON)


def run(scenario: 'Scenario', plan: PlanFile, policy: str, seed: int = config.RANDOM_SEED,
        log_path: Optional[str] = None, event_interval: Optional[float] = None,
        check_invariants: bool = False) -> ExperimentReport:
    """
    Simulate `plan` on `scenario` under `policy`.

    Parameters
    ----------
    scenario : Scenario
        Validated scenario
    plan : PlanFile
        Validated plan
    policy : str
        One of config.POLICIES
    seed : int
        Fixes every stochastic element of the run
    log_path : str, optional
        Where to write the bookkeeper log

    Returns
    -------
    ExperimentReport
        Identical for identical inputs
    """
    model = scenario.build_model(seed)
    jobs = decompose(resolve_dynamic_parameters(plan, model.catalog))
    return Simulation(scenario, jobs, policy, seed, log_path=log_path, event_interval=event_interval,
                      check_invariants=check_invariants, model=model).run()


def run_jobs(scenario: 'Scenario', jobs: JobSet, policy: str, seed: int = config.RANDOM_SEED,
             **kwargs) -> ExperimentReport:
    """Simulate an already decomposed job set."""
    return Simulation(scenario, jobs, policy, seed, **kwargs).run()
