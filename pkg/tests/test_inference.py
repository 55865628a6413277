"""
Tests for paired inference over sweep results.
"""

import pytest
import numpy as np
import pandas as pd
from scipy import stats
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.stats.inference import SweepAnalyzer


def make_sweep(adaptive_time, compute_only_time, adaptive_bytes, compute_only_bytes):
    return pd.DataFrame({
        'seed': list(range(len(adaptive_time))),
        'adaptive_total_time': adaptive_time,
        'compute_only_total_time': compute_only_time,
        'adaptive_bytes': adaptive_bytes,
        'compute_only_bytes': compute_only_bytes,
    })


def test_confidence_interval_bounds():
    """The interval is ordered and contains the mean difference."""
    analyzer = SweepAnalyzer(confidence_level=0.95)
    result = analyzer.paired('makespan', np.array([10.0, 12.0, 14.0]), np.array([12.0, 15.0, 16.0]))

    assert result.n == 3
    assert result.mean_difference == pytest.approx(-7.0 / 3.0)
    assert result.ci_lower < result.mean_difference < result.ci_upper
    half_width = stats.t.ppf(0.975, df=2) * np.sqrt(1.0 / 3.0) / np.sqrt(3.0)
    assert result.ci_upper - result.ci_lower == pytest.approx(2 * half_width)


def test_p_value_matches_paired_t_test():
    rng = np.random.default_rng(42)
    compute_only = rng.normal(500.0, 50.0, size=30)
    adaptive = compute_only - rng.normal(40.0, 10.0, size=30)

    result = SweepAnalyzer().paired('makespan', adaptive, compute_only)

    assert result.p_value == pytest.approx(stats.ttest_rel(adaptive, compute_only).pvalue)
    assert result.statistically_significant, "A consistent 40 s gain over 30 seeds should be significant"
    assert result.ci_upper < 0


def test_no_difference_is_not_significant():
    values = np.array([100.0, 200.0, 300.0])
    result = SweepAnalyzer().paired('bytes', values, values.copy())

    assert result.mean_difference == 0.0
    assert result.ci_lower == result.ci_upper == 0.0
    assert result.p_value == 1.0
    assert not result.statistically_significant


def test_constant_difference_collapses_interval():
    result = SweepAnalyzer().paired('bytes', np.array([0.0, 0.0]), np.array([5.0, 5.0]))

    assert result.ci_lower == result.ci_upper == -5.0
    assert result.p_value == 0.0


def test_single_pair():
    result = SweepAnalyzer().paired('makespan', np.array([90.0]), np.array([100.0]))
    assert result.n == 1
    assert result.ci_lower == result.ci_upper == -10.0


@pytest.mark.parametrize('adaptive, compute_only', [
    (np.array([1.0, 2.0]), np.array([1.0])),
    (np.array([]), np.array([])),
])
def test_invalid_samples_raise(adaptive, compute_only):
    with pytest.raises(ValueError):
        SweepAnalyzer().paired('makespan', adaptive, compute_only)


def test_analyze_reports_counterexamples():
    """Seeds where adaptive moved more bytes than compute-only are listed."""
    sweep = make_sweep([100.0, 110.0, 95.0, 80.0], [120.0, 115.0, 100.0, 90.0],
                       [0, 3_000_000, 0, 0], [6_000_000, 1_000_000, 0, 3_000_000])
    summary = SweepAnalyzer().analyze(sweep)

    assert summary.makespan.n == 4
    assert summary.makespan.mean_difference == pytest.approx(-10.0)
    assert summary.bytes_transferred.adaptive_mean == pytest.approx(750_000.0)
    assert summary.counterexamples == [1]
    assert 'seeds: [1]' in str(summary)


def test_summary_formatting():
    sweep = make_sweep([100.0, 90.0], [110.0, 95.0], [0, 0], [1, 2])
    summary = SweepAnalyzer().analyze(sweep)
    text = str(summary)

    assert 'MAKESPAN SECONDS' in text
    assert 'never moved more bytes' in text
    assert summary.makespan.to_dict()['metric'] == 'makespan seconds'


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
