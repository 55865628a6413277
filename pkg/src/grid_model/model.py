"""
The testbed model the scheduler consults and the simulator mutates.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from src import config
from src.catalog.replica import Catalog
from src.errors import UnknownResourceError
from src.grid_model.estimator import RateEstimator, observe_completion
from src.grid_model.network import BandwidthTrace, NetworkSnapshot
from src.grid_model.resources import (
    DATA_AVAILABLE, DATA_FAILED, SERVER_AVAILABLE, SERVER_COMPUTE_FAILED,
    ComputeServer, DataFile, DataHost,
)
from src.grid_model.timing import available_bandwidth

logger = logging.getLogger(__name__)


def sort_compute_cache(host: DataHost, servers: Iterable[ComputeServer],
                       snapshot: NetworkSnapshot) -> List[str]:
    """Server ids by descending bandwidth from `host`, ties by id."""
    ranked = [(-available_bandwidth(snapshot, host, s), s.id) for s in servers]
    return [server_id for _, server_id in sorted(ranked)]


class GridModel:
    """
    Compute servers, data hosts, data files, network measurements and rate
    estimators for one experiment run.

    Only the simulation loop mutates a model; each run builds its own.
    """

    def __init__(self, servers: Iterable[ComputeServer], hosts: Iterable[DataHost],
                 catalog: Catalog, trace: BandwidthTrace,
                 alpha: float = config.EWMA_ALPHA,
                 prior_seconds: float = config.DEFAULT_PRIOR_SECONDS,
                 priors: Optional[Mapping[str, float]] = None):
        self.servers: Dict[str, ComputeServer] = {s.id: s for s in sorted(servers, key=lambda s: s.id)}
        self.hosts: Dict[str, DataHost] = {h.id: h for h in sorted(hosts, key=lambda h: h.id)}
        self.catalog = catalog
        self.trace = trace
        self.files: Dict[str, DataFile] = {
            lfn: DataFile(lfn=entry.lfn, size=entry.size, hosts=tuple(entry.hosts))
            for lfn, entry in sorted(catalog.entries.items())
        }
        priors = dict(priors or {})
        self.estimators: Dict[str, RateEstimator] = {
            sid: RateEstimator.from_prior(sid, prior=priors.get(sid, prior_seconds), alpha=alpha)
            for sid in self.servers
        }
        self.nodes: Tuple[str, ...] = tuple(sorted(set(self.servers) | set(self.hosts)))
        self.snapshot: Optional[NetworkSnapshot] = None

    # -------------------------------------------------------------------------
    # Lookups
    # -------------------------------------------------------------------------
    def server(self, server_id: str) -> ComputeServer:
        try:
            return self.servers[server_id]
        except KeyError:
            raise UnknownResourceError(f"unknown compute server '{server_id}'") from None

    def host(self, host_id: str) -> DataHost:
        try:
            return self.hosts[host_id]
        except KeyError:
            raise UnknownResourceError(f"unknown data host '{host_id}'") from None

    def file(self, lfn: str) -> DataFile:
        try:
            return self.files[lfn]
        except KeyError:
            raise UnknownResourceError(f"unknown logical file name '{lfn}'") from None

    def replica_hosts(self, lfn: str) -> List[DataHost]:
        return [self.host(h) for h in sorted(self.file(lfn).hosts)]

    def site_host(self, server_id: str) -> Optional[DataHost]:
        """The data host sharing a site with `server_id`, if any."""
        for host in self.hosts.values():
            if host.co_located_compute == server_id:
                return host
        return None

    def estimator(self, server_id: str) -> RateEstimator:
        self.server(server_id)
        return self.estimators[server_id]

    # -------------------------------------------------------------------------
    # Measurements
    # -------------------------------------------------------------------------
    def update_measurements(self, time: float) -> NetworkSnapshot:
        """Sample the trace at `time` and rebuild every host's sorted compute cache."""
        self.snapshot = self.trace.snapshot(time, self.nodes)
        servers = list(self.servers.values())
        for host in self.hosts.values():
            host.sorted_compute_cache = sort_compute_cache(host, servers, self.snapshot)
        logger.debug("measurement round at t=%.1f", time)
        return self.snapshot

    def available_bandwidth(self, host_id: str, server_id: str) -> float:
        if self.snapshot is None:
            raise RuntimeError("no measurement round has run yet")
        return available_bandwidth(self.snapshot, self.host(host_id), self.server(server_id))

    def cache_ranks(self) -> Dict[str, Tuple[str, ...]]:
        return {h.id: tuple(h.sorted_compute_cache) for h in self.hosts.values()}

    # -------------------------------------------------------------------------
    # State changes
    # -------------------------------------------------------------------------
    def observe_completion(self, server_id: str, duration: float) -> RateEstimator:
        estimator = observe_completion(self.estimator(server_id), duration)
        self.estimators[server_id] = estimator
        return estimator

    def set_compute_status(self, server_id: str, available: bool):
        self.server(server_id).status = SERVER_AVAILABLE if available else SERVER_COMPUTE_FAILED

    def set_data_status(self, host_id: str, available: bool):
        self.host(host_id).data_service_status = DATA_AVAILABLE if available else DATA_FAILED

    def available_servers(self) -> List[ComputeServer]:
        return [s for s in self.servers.values() if s.is_available]
