"""
Comparison tables across scheduling policies.

Builds the per-policy rows (total time, done/failed, bytes moved), the
per-server breakdown and the bandwidth series from ExperimentReports, and
checks the strategy orderings expected on a testbed.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from src import config
from src.decomposer.jobs import DONE, FAILED
from src.sim_engine.report import ExperimentReport


@dataclass
class PolicyRow:
    """Aggregates of one policy's run."""
    policy: str
    total_time: float
    done: int
    failed: int
    bytes_transferred: int
    output_bytes: int
    per_server: Dict[str, Dict[str, int]] = field(default_factory=dict)

    @classmethod
    def from_report(cls, report: ExperimentReport) -> 'PolicyRow':
        return cls(
            policy=report.policy,
            total_time=report.total_time,
            done=report.done,
            failed=report.failed,
            bytes_transferred=report.bytes_transferred,
            output_bytes=report.output_bytes,
            per_server={k: dict(v) for k, v in report.per_server.items()},
        )

    def to_dict(self):
        return {
            'policy': self.policy,
            'total_time': self.total_time,
            'done': self.done,
            'failed': self.failed,
            'bytes_transferred': self.bytes_transferred,
            'output_bytes': self.output_bytes,
        }

    def __str__(self):
        return (f"  {self.policy:<14} {self.total_time:>12.1f} {self.done:>6} {self.failed:>7} "
                f"{self.bytes_transferred:>16,}")


@dataclass
class OrderingCheck:
    """One expected relation between policies and whether the run satisfies it."""
    name: str
    passed: bool
    detail: str

    def __str__(self):
        marker = "✓" if self.passed else "✗"
        return f"  {marker} {self.name}: {self.detail}"


@dataclass
class ComparisonTable:
    """
    Per-policy rows from runs sharing one scenario and seed.

    Rows keep the order of config.POLICIES for the policies present.
    """
    scenario: str
    seed: int
    rows: List[PolicyRow]
    bandwidth_samples: List[Dict] = field(default_factory=list)

    def row(self, policy: str) -> PolicyRow:
        for row in self.rows:
            if row.policy == policy:
                return row
        raise KeyError(policy)

    @property
    def policies(self) -> List[str]:
        return [row.policy for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows],
                            columns=['policy', 'total_time', 'done', 'failed', 'bytes_transferred', 'output_bytes'])

    def total_time_frame(self) -> pd.DataFrame:
        """Makespan per policy."""
        return self.to_frame()[['policy', 'total_time']]

    def per_server_frame(self) -> pd.DataFrame:
        """
        Done and failed job counts per (policy, server), long format.

        Returns
        -------
        pd.DataFrame
            Columns: policy, server, done, failed
        """
        records = []
        for row in self.rows:
            for server in sorted(row.per_server):
                counts = row.per_server[server]
                records.append({'policy': row.policy, 'server': server,
                                'done': counts.get(DONE, 0), 'failed': counts.get(FAILED, 0)})
        return pd.DataFrame(records, columns=['policy', 'server', 'done', 'failed'])

    def bandwidth_frame(self, from_host: Optional[str] = None) -> pd.DataFrame:
        """Measured bandwidth samples, optionally only links leaving `from_host`."""
        frame = pd.DataFrame(self.bandwidth_samples, columns=['time', 'from', 'to', 'bandwidth', 'latency'])
        if from_host is not None:
            frame = frame[frame['from'] == from_host].reset_index(drop=True)
        return frame

    def check_orderings(self) -> List[OrderingCheck]:
        """
        Strategy orderings expected on a testbed: adaptive finishes no later
        than compute-only, and data-local moves no more input bytes than
        adaptive, which moves no more than compute-only.
        """
        present = set(self.policies)
        checks = []
        if {config.POLICY_ADAPTIVE, config.POLICY_COMPUTE_ONLY} <= present:
            adaptive = self.row(config.POLICY_ADAPTIVE)
            compute = self.row(config.POLICY_COMPUTE_ONLY)
            checks.append(OrderingCheck(
                'makespan adaptive <= compute-only',
                adaptive.total_time <= compute.total_time,
                f"{adaptive.total_time:.1f}s vs {compute.total_time:.1f}s",
            ))
            checks.append(OrderingCheck(
                'bytes adaptive <= compute-only',
                adaptive.bytes_transferred <= compute.bytes_transferred,
                f"{adaptive.bytes_transferred:,} vs {compute.bytes_transferred:,}",
            ))
        if {config.POLICY_DATA_LOCAL, config.POLICY_ADAPTIVE} <= present:
            local = self.row(config.POLICY_DATA_LOCAL)
            adaptive = self.row(config.POLICY_ADAPTIVE)
            checks.append(OrderingCheck(
                'bytes data-local <= adaptive',
                local.bytes_transferred <= adaptive.bytes_transferred,
                f"{local.bytes_transferred:,} vs {adaptive.bytes_transferred:,}",
            ))
        return checks

    def __str__(self):
        lines = [
            f"\nPolicy comparison ({self.scenario}, seed {self.seed}):",
            f"  {'policy':<14} {'total time s':>12} {'done':>6} {'failed':>7} {'bytes moved':>16}",
        ]
        lines += [str(row) for row in self.rows]
        return '\n'.join(lines)


def _policy_order(policy: str) -> int:
    return config.POLICIES.index(policy) if policy in config.POLICIES else len(config.POLICIES)


def build_comparison(reports: Sequence[ExperimentReport]) -> ComparisonTable:
    """
    Assemble a ComparisonTable from reports of the same scenario and seed.

    The bandwidth series is taken from the first report; every policy sees
    the same trace for a given seed.
    """
    if not reports:
        raise ValueError("no reports to compare")
    ordered = sorted(reports, key=lambda r: _policy_order(r.policy))
    first = ordered[0]
    return ComparisonTable(
        scenario=first.scenario,
        seed=first.seed,
        rows=[PolicyRow.from_report(r) for r in ordered],
        bandwidth_samples=list(first.bandwidth_samples),
    )
