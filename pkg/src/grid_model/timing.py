"""
Completion-time arithmetic shared by the scheduler's estimates and the
simulated job timeline.

Sizes are bytes, bandwidths MB/s (1 MB = config.BYTES_PER_MB bytes), times
seconds. An infinite bandwidth marks a same-site transfer, which is free.
"""

import math
from typing import Optional

from src import config
from src.grid_model.estimator import RateEstimator
from src.grid_model.network import NetworkSnapshot
from src.grid_model.resources import ComputeServer, DataHost


def transfer_seconds(size_bytes: int, bandwidth: float) -> float:
    """Seconds to move `size_bytes` over a link; inf when the link is down."""
    if size_bytes <= 0 or math.isinf(bandwidth):
        return 0.0
    if bandwidth <= 0:
        return math.inf
    return (size_bytes / config.BYTES_PER_MB) / bandwidth


def service_seconds(server: ComputeServer, estimator: RateEstimator) -> float:
    return estimator.estimate / server.speed_factor


def queue_wait(occupied: int, cpu_count: int, service_time: float) -> float:
    """
    Wait before a new job starts on a FIFO server with `cpu_count` slots.

    `occupied` counts jobs already queued or executing there.
    """
    queued_ahead = max(0, occupied - cpu_count + 1)
    return math.ceil(queued_ahead / cpu_count) * service_time


def overlapped(transfer: float, execution: float, overlap: float) -> float:
    """Transfer plus execution with `overlap` of the shorter phase hidden."""
    if math.isinf(transfer):
        return math.inf
    return transfer + execution - overlap * min(transfer, execution)


def available_bandwidth(snapshot: NetworkSnapshot, data_host: DataHost,
                        server: ComputeServer) -> float:
    """Measured MB/s from `data_host` to `server`; infinite when they share a site."""
    if data_host.co_located_compute == server.id:
        return math.inf
    return snapshot.bandwidth(data_host.id, server.id)


def estimated_completion_time(server: ComputeServer, estimator: RateEstimator, job,
                              snapshot: NetworkSnapshot, data_host: Optional[DataHost],
                              occupied: Optional[int] = None,
                              overhead: float = config.SMALL_FILE_OVERHEAD_SECONDS,
                              overlap: float = config.STREAMING_OVERLAP) -> float:
    """
    Predicted seconds until `job` would finish on `server` reading from `data_host`.

    Parameters
    ----------
    server : ComputeServer
        Candidate compute server
    estimator : RateEstimator
        The server's consumption rate estimate
    job : Job
        Needs `input_bytes`
    snapshot : NetworkSnapshot
        Current measurements
    data_host : DataHost or None
        Replica host; None for jobs without input data
    occupied : int, optional
        Jobs already committed to the server (defaults to its busy set)
    overhead : float
        Per-dispatch stage-in seconds
    overlap : float
        Streaming overlap factor in [0, 1]

    Returns
    -------
    float
        queue wait + overhead + transfer + service, minus any streaming overlap;
        inf when the link is down
    """
    service = service_seconds(server, estimator)
    if occupied is None:
        occupied = server.occupied
    wait = queue_wait(occupied, server.cpu_count, service)
    if data_host is None:
        transfer = 0.0
    else:
        transfer = transfer_seconds(job.input_bytes, available_bandwidth(snapshot, data_host, server))
    return wait + overhead + overlapped(transfer, service, overlap)
