"""
Simulation events and the event queue.

Events at the same time are processed in a fixed kind order, then by id,
then by insertion sequence, so a run never depends on heap internals.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

RESOURCE_FAILURE = 'ResourceFailure'
RESOURCE_RECOVERY = 'ResourceRecovery'
MEASUREMENT_ROUND = 'MeasurementRound'
EXECUTION_COMPLETE = 'ExecutionComplete'
TRANSFER_COMPLETE = 'TransferComplete'
DISPATCH_COMPLETE = 'DispatchComplete'
SCHEDULING_TICK = 'SchedulingTick'

KIND_ORDER = {
    RESOURCE_FAILURE: 0,
    RESOURCE_RECOVERY: 1,
    MEASUREMENT_ROUND: 2,
    EXECUTION_COMPLETE: 3,
    TRANSFER_COMPLETE: 4,
    DISPATCH_COMPLETE: 5,
    SCHEDULING_TICK: 6,
}

COMPONENT_COMPUTE = 'compute'
COMPONENT_DATA = 'data'
ACTION_FAIL = 'fail'
ACTION_RECOVER = 'recover'


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str
    id: str = ''
    payload: Dict = field(default_factory=dict, compare=False)

    def sort_key(self) -> Tuple[float, int, str]:
        return (self.time, KIND_ORDER[self.kind], self.id)


@dataclass(frozen=True)
class FailureEntry:
    time: float
    resource: str
    component: str  # 'compute' or 'data'
    action: str  # 'fail' or 'recover'

    def to_event(self) -> SimEvent:
        kind = RESOURCE_FAILURE if self.action == ACTION_FAIL else RESOURCE_RECOVERY
        return SimEvent(self.time, kind, f"{self.resource}:{self.component}",
                        {'resource': self.resource, 'component': self.component})

    def to_dict(self) -> Dict:
        return {'time': self.time, 'resource': self.resource,
                'component': self.component, 'action': self.action}


@dataclass(frozen=True)
class FailureScript:
    entries: Tuple[FailureEntry, ...] = ()

    def __iter__(self):
        return iter(sorted(self.entries, key=lambda e: (e.time, e.resource, e.component, e.action)))

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_records(cls, records) -> 'FailureScript':
        return cls(tuple(FailureEntry(float(r['time']), r['resource'], r['component'], r['action'])
                         for r in records or ()))


class EventQueue:
    """Min-heap of SimEvents keyed by (time, kind order, id, sequence)."""

    def __init__(self):
        self._heap: List = []
        self._sequence = itertools.count()
        self._kind_counts: Dict[str, int] = {}
        self.last_time: Optional[float] = None

    def __len__(self):
        return len(self._heap)

    def push(self, event: SimEvent):
        heapq.heappush(self._heap, (event.sort_key(), next(self._sequence), event))
        self._kind_counts[event.kind] = self._kind_counts.get(event.kind, 0) + 1

    def pop(self) -> SimEvent:
        _, _, event = heapq.heappop(self._heap)
        self._kind_counts[event.kind] -= 1
        if self.last_time is not None and event.time < self.last_time:
            raise RuntimeError(f"event at {event.time} precedes {self.last_time}")
        self.last_time = event.time
        return event

    def peek_time(self) -> Optional[float]:
        return self._heap[0][2].time if self._heap else None

    def pending(self, kind: str) -> int:
        return self._kind_counts.get(kind, 0)
