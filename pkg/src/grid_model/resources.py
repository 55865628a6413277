"""
Compute servers, data hosts and data files of the simulated testbed.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple

SERVER_AVAILABLE = 'available'
SERVER_COMPUTE_FAILED = 'compute_failed'
DATA_AVAILABLE = 'available'
DATA_FAILED = 'failed'


@dataclass
class ComputeServer:
    """
    A compute resource and its live load.

    `busy_jobs` holds every job committed to the server, queued or executing;
    its size never exceeds `max_job_limit`.
    """
    id: str
    cpu_count: int = 1
    speed_factor: float = 1.0
    max_job_limit: int = 1
    middleware_tag: str = ''
    status: str = SERVER_AVAILABLE
    busy_jobs: Set[str] = field(default_factory=set)
    history: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def is_available(self) -> bool:
        return self.status == SERVER_AVAILABLE

    @property
    def occupied(self) -> int:
        return len(self.busy_jobs)

    @property
    def free_slots(self) -> int:
        if not self.is_available:
            return 0
        return max(0, self.max_job_limit - len(self.busy_jobs))

    def record_completion(self, job_id: str, duration: float):
        self.history.append((job_id, duration))

    def to_dict(self):
        return {
            'id': self.id,
            'cpus': self.cpu_count,
            'speed': self.speed_factor,
            'max_jobs': self.max_job_limit,
            'middleware': self.middleware_tag,
            'status': self.status,
        }


@dataclass
class DataHost:
    """A storage resource; `sorted_compute_cache` is rebuilt on every measurement round."""
    id: str
    co_located_compute: Optional[str] = None
    data_service_status: str = DATA_AVAILABLE
    sorted_compute_cache: List[str] = field(default_factory=list)

    @property
    def is_available(self) -> bool:
        return self.data_service_status == DATA_AVAILABLE

    def to_dict(self):
        return {
            'id': self.id,
            'co_located_compute': self.co_located_compute,
            'status': self.data_service_status,
        }


@dataclass(frozen=True)
class DataFile:
    lfn: str
    size: int
    hosts: Tuple[str, ...]
