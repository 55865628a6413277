"""
Time-varying network between testbed sites.

A BandwidthTrace is piecewise constant: each segment holds from its
`from_time` until the next segment starts. Measurement rounds sample the
trace into a NetworkSnapshot, optionally perturbed by seeded multiplicative
lognormal noise. Noise depends only on (seed, round time), so a snapshot at
a given time is the same whichever run or process produces it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import UnknownResourceError

logger = logging.getLogger(__name__)

INFINITE_BANDWIDTH = math.inf  # same-site sentinel


@dataclass(frozen=True)
class TraceSegment:
    """Link properties from `from_time` on. Unlisted pairs use the defaults."""
    from_time: float
    bandwidth: Dict[Tuple[str, str], float] = field(default_factory=dict)
    latency: Dict[Tuple[str, str], float] = field(default_factory=dict)
    default_bandwidth: float = 1.0
    default_latency: float = 0.0

    def link(self, src: str, dst: str, symmetric: bool) -> Tuple[float, float]:
        bw = self.bandwidth.get((src, dst))
        lat = self.latency.get((src, dst))
        if symmetric:
            if bw is None:
                bw = self.bandwidth.get((dst, src))
            if lat is None:
                lat = self.latency.get((dst, src))
        return (self.default_bandwidth if bw is None else bw,
                self.default_latency if lat is None else lat)


@dataclass(frozen=True)
class BandwidthTrace:
    segments: Tuple[TraceSegment, ...]
    symmetric: bool = True
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        ordered = tuple(sorted(self.segments, key=lambda s: s.from_time))
        object.__setattr__(self, 'segments', ordered)

    def segment_at(self, time: float) -> TraceSegment:
        current = self.segments[0]
        for segment in self.segments:
            if segment.from_time <= time:
                current = segment
            else:
                break
        return current

    def breakpoints(self) -> List[float]:
        """Times at which the trace changes, excluding the first segment start."""
        return [s.from_time for s in self.segments[1:]]

    def _noise(self, time: float, n: int) -> Optional[np.ndarray]:
        if self.noise_sigma <= 0:
            return None
        rng = np.random.default_rng([int(self.seed), int(round(time * 1000))])
        factors = rng.lognormal(mean=0.0, sigma=self.noise_sigma, size=(n, n))
        if self.symmetric:
            upper = np.triu(factors)
            factors = upper + np.triu(factors, 1).T
        return factors

    def snapshot(self, time: float, nodes: Sequence[str]) -> 'NetworkSnapshot':
        """Sample the trace at `time` over `nodes` (sorted for a stable layout)."""
        nodes = tuple(sorted(set(nodes)))
        n = len(nodes)
        segment = self.segment_at(time)
        bandwidth = np.zeros((n, n))
        latency = np.zeros((n, n))
        for i, src in enumerate(nodes):
            for j, dst in enumerate(nodes):
                if i == j:
                    continue
                bandwidth[i, j], latency[i, j] = segment.link(src, dst, self.symmetric)

        noise = self._noise(time, n)
        if noise is not None:
            bandwidth = bandwidth * noise
        np.fill_diagonal(bandwidth, INFINITE_BANDWIDTH)
        return NetworkSnapshot(time=time, nodes=nodes, bandwidth_matrix=bandwidth,
                               latency_matrix=latency)


@dataclass(frozen=True, eq=False)
class NetworkSnapshot:
    """Bandwidth (MB/s) and latency (ms) between every pair of sites at one instant."""
    time: float
    nodes: Tuple[str, ...]
    bandwidth_matrix: np.ndarray
    latency_matrix: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, NetworkSnapshot):
            return NotImplemented
        return (self.time == other.time and self.nodes == other.nodes
                and np.array_equal(self.bandwidth_matrix, other.bandwidth_matrix)
                and np.array_equal(self.latency_matrix, other.latency_matrix))

    def _index(self, node: str) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise UnknownResourceError(f"unknown site '{node}'") from None

    def bandwidth(self, src: str, dst: str) -> float:
        return float(self.bandwidth_matrix[self._index(src), self._index(dst)])

    def latency(self, src: str, dst: str) -> float:
        return float(self.latency_matrix[self._index(src), self._index(dst)])

    def to_records(self, source: Optional[str] = None) -> List[Dict]:
        """One record per directed finite link, optionally only those leaving `source`."""
        records = []
        for i, src in enumerate(self.nodes):
            if source is not None and src != source:
                continue
            for j, dst in enumerate(self.nodes):
                if i == j:
                    continue
                records.append({
                    'time': self.time,
                    'from': src,
                    'to': dst,
                    'bandwidth': float(self.bandwidth_matrix[i, j]),
                    'latency': float(self.latency_matrix[i, j]),
                })
        return records


def constant_trace(default_bandwidth: float, links: Optional[Dict[Tuple[str, str], float]] = None,
                   symmetric: bool = True) -> BandwidthTrace:
    """Single-segment trace, handy for fixtures and small scenarios."""
    segment = TraceSegment(from_time=0.0, bandwidth=dict(links or {}),
                           default_bandwidth=default_bandwidth)
    return BandwidthTrace(segments=(segment,), symmetric=symmetric)


def parse_link_table(table: Optional[Dict]) -> Dict[Tuple[str, str], float]:
    """`{"a": {"b": 1.5}}` → `{("a", "b"): 1.5}`."""
    links = {}
    for src, row in (table or {}).items():
        for dst, value in row.items():
            links[(src, dst)] = float(value)
    return links


def trace_from_records(records: Iterable[Dict], symmetric: bool = True,
                       noise_sigma: float = 0.0, seed: int = 0) -> BandwidthTrace:
    segments = []
    for record in records:
        segments.append(TraceSegment(
            from_time=float(record.get('from_time', 0.0)),
            bandwidth=parse_link_table(record.get('matrix')),
            latency=parse_link_table(record.get('latency')),
            default_bandwidth=float(record.get('default', 1.0)),
            default_latency=float(record.get('default_latency', 0.0)),
        ))
    logger.debug("bandwidth trace with %d segment(s), noise sigma %.3f", len(segments), noise_sigma)
    return BandwidthTrace(segments=tuple(segments), symmetric=symmetric,
                          noise_sigma=noise_sigma, seed=seed)
