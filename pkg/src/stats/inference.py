"""
Paired inference over property sweeps.

Each sweep seed yields one adaptive run and one compute-only run on the same
random scenario. The paired differences (adaptive minus compute-only) of
makespan and bytes transferred are summarized with a t-based confidence
interval and a paired t-test.
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd
from scipy import stats

from src import config


@dataclass
class PairedInference:
    """Paired comparison of one metric across sweep seeds."""
    metric_name: str
    n: int
    adaptive_mean: float
    compute_only_mean: float
    mean_difference: float
    ci_lower: float
    ci_upper: float
    p_value: float
    statistically_significant: bool
    confidence_level: float = config.CONFIDENCE_LEVEL

    def __str__(self):
        sig_marker = "✓" if self.statistically_significant else "✗"
        level = int(round(self.confidence_level * 100))
        return (
            f"\n{self.metric_name.upper()} (adaptive - compute-only, n={self.n}):\n"
            f"  Adaptive mean:     {self.adaptive_mean:,.2f}\n"
            f"  Compute-only mean: {self.compute_only_mean:,.2f}\n"
            f"  Mean difference:   {self.mean_difference:+,.2f}\n"
            f"  {level}% CI:           [{self.ci_lower:+,.2f}, {self.ci_upper:+,.2f}]\n"
            f"  P-value:           {self.p_value:.4f}\n"
            f"  Significant:       {sig_marker} {self.statistically_significant} "
            f"(α={1 - self.confidence_level:.2f})"
        )

    def to_dict(self):
        return {
            'metric': self.metric_name,
            'n': self.n,
            'adaptive_mean': self.adaptive_mean,
            'compute_only_mean': self.compute_only_mean,
            'mean_difference': self.mean_difference,
            'ci_lower': self.ci_lower,
            'ci_upper': self.ci_upper,
            'p_value': self.p_value,
            'statistically_significant': self.statistically_significant,
        }


@dataclass
class SweepSummary:
    """Inference for both metrics plus the seeds that break the bytes ordering."""
    makespan: PairedInference
    bytes_transferred: PairedInference
    counterexamples: List[int] = field(default_factory=list)

    def __str__(self):
        lines = [str(self.makespan), str(self.bytes_transferred)]
        if self.counterexamples:
            lines.append(f"\n✗ adaptive moved more bytes than compute-only for seeds: {self.counterexamples}")
        else:
            lines.append("\n✓ adaptive never moved more bytes than compute-only")
        return '\n'.join(lines)


class SweepAnalyzer:
    """
    Paired analysis of sweep results.

    Expects one row per seed with columns `seed`, `adaptive_total_time`,
    `compute_only_total_time`, `adaptive_bytes` and `compute_only_bytes`.
    """

    def __init__(self, confidence_level=None):
        """
        Parameters
        ----------
        confidence_level : float, optional
            Confidence level (default from config)
        """
        self.confidence_level = confidence_level or config.CONFIDENCE_LEVEL
        self.alpha = 1 - self.confidence_level

    def analyze(self, sweep: pd.DataFrame) -> SweepSummary:
        makespan = self.paired(
            'makespan seconds', sweep['adaptive_total_time'].to_numpy(float),
            sweep['compute_only_total_time'].to_numpy(float),
        )
        moved = self.paired(
            'bytes transferred', sweep['adaptive_bytes'].to_numpy(float),
            sweep['compute_only_bytes'].to_numpy(float),
        )
        worse = sweep[sweep['adaptive_bytes'] > sweep['compute_only_bytes']]
        return SweepSummary(makespan, moved, [int(s) for s in worse['seed']])

    def paired(self, metric_name: str, adaptive: np.ndarray, compute_only: np.ndarray) -> PairedInference:
        """
        Mean paired difference with a t confidence interval and paired t-test.

        With fewer than two pairs, or identical differences, the interval
        collapses to the mean difference; the p-value is 1.0 when that
        difference is zero and 0.0 otherwise.
        """
        if len(adaptive) != len(compute_only):
            raise ValueError("paired samples differ in length")
        diff = adaptive - compute_only
        n = len(diff)
        if n == 0:
            raise ValueError("no sweep results to analyze")
        mean = float(diff.mean())

        spread = float(diff.std(ddof=1)) if n > 1 else 0.0
        if n < 2 or spread == 0.0:
            ci_lower = ci_upper = mean
            p_value = 1.0 if mean == 0.0 else 0.0
        else:
            se = spread / np.sqrt(n)
            t_crit = stats.t.ppf(1 - self.alpha / 2, df=n - 1)
            ci_lower, ci_upper = mean - t_crit * se, mean + t_crit * se
            p_value = float(stats.ttest_rel(adaptive, compute_only).pvalue)

        return PairedInference(
            metric_name=metric_name,
            n=n,
            adaptive_mean=float(adaptive.mean()),
            compute_only_mean=float(compute_only.mean()),
            mean_difference=mean,
            ci_lower=float(ci_lower),
            ci_upper=float(ci_upper),
            p_value=p_value,
            statistically_significant=p_value < self.alpha,
            confidence_level=self.confidence_level,
        )
