"""
Markdown summaries of policy comparisons and property sweeps.
"""

import os
from typing import Optional

import pandas as pd

from src.metrics.compute import ComparisonTable
from src.sim_engine.report import UNPLACED
from src.stats.inference import SweepSummary
from src.utils.io import write_atomic


def _server_table(table: ComparisonTable) -> str:
    frame = table.per_server_frame()
    servers = sorted(set(frame['server']) - {UNPLACED})
    if (frame['server'] == UNPLACED).any():
        servers.append(UNPLACED)
    header = '| Server | ' + ' | '.join(table.policies) + ' |'
    rule = '|--------|' + '|'.join('-' * (len(p) + 2) for p in table.policies) + '|'
    lines = [header, rule]
    for server in servers:
        cells = []
        for policy in table.policies:
            match = frame[(frame['policy'] == policy) & (frame['server'] == server)]
            if match.empty:
                cells.append('-')
            else:
                row = match.iloc[0]
                cells.append(f"{int(row['done'])} / {int(row['failed'])}")
        lines.append(f"| {server} | " + ' | '.join(cells) + ' |')
    return '\n'.join(lines)


class ReportBuilder:
    """
    Builds markdown reports from comparison tables and sweep summaries.

    Reports contain no timestamps, so reruns with the same seed produce
    identical files.
    """

    @staticmethod
    def build_comparison_summary(table: ComparisonTable, output_path: Optional[str] = None) -> str:
        """
        Generate the policy comparison summary.

        Parameters
        ----------
        table : ComparisonTable
            Rows for the compared policies
        output_path : str, optional
            Where to write the markdown; nothing is written when None

        Returns
        -------
        content : str
            Markdown content
        """
        checks = table.check_orderings()
        if not checks:
            verdict = "Too few policies were run to check the strategy orderings."
        elif all(c.passed for c in checks):
            verdict = "**All expected strategy orderings hold** ✓"
        else:
            failed = ', '.join(c.name for c in checks if not c.passed)
            verdict = f"**Ordering violated** ✗ ({failed})"

        rows = '\n'.join(
            f"| {r.policy} | {r.total_time:,.1f} | {r.done} | {r.failed} | {r.bytes_transferred:,} | {r.output_bytes:,} |"
            for r in table.rows
        )
        check_lines = '\n'.join(
            f"- {'✓' if c.passed else '✗'} {c.name}: {c.detail}" for c in checks
        ) or "- (none)"

        content = f"""# Policy Comparison: {table.scenario}

**Seed:** {table.seed}
**Policies:** {', '.join(table.policies)}

---

## Verdict

{verdict}

{check_lines}

---

## Totals

| Policy | Total time (s) | Done | Failed | Input bytes moved | Output bytes returned |
|--------|----------------|------|--------|-------------------|-----------------------|
{rows}

---

## Jobs per Server (done / failed)

{_server_table(table)}

---

## Notes

1. Total time is the simulated time at which the last job reached a final state.
2. Input bytes count data staged from a remote replica host; co-located reads move nothing.
3. Jobs that failed before ever being placed are listed under `{UNPLACED}`.
"""
        if output_path is not None:
            write_atomic(output_path, content)
            print(f"✓ Comparison summary saved to {output_path}")
        return content

    @staticmethod
    def build_sweep_summary(summary: SweepSummary, sweep: pd.DataFrame,
                            output_path: Optional[str] = None) -> str:
        """Generate the property-sweep summary (paired adaptive vs compute-only)."""
        level = int(round(summary.makespan.confidence_level * 100))
        metric_rows = '\n'.join(
            f"| {m.metric_name} | {m.adaptive_mean:,.1f} | {m.compute_only_mean:,.1f} | "
            f"{m.mean_difference:+,.1f} | [{m.ci_lower:+,.1f}, {m.ci_upper:+,.1f}] | {m.p_value:.4f} |"
            for m in (summary.makespan, summary.bytes_transferred)
        )
        if summary.counterexamples:
            bytes_verdict = (f"✗ Adaptive moved more bytes than compute-only for seeds "
                             f"{', '.join(str(s) for s in summary.counterexamples)}; investigate these scenarios.")
        else:
            bytes_verdict = "✓ Adaptive never moved more bytes than compute-only."

        content = f"""# Property Sweep: adaptive vs compute-only

**Scenarios:** {len(sweep)} (seeds {int(sweep['seed'].min())}-{int(sweep['seed'].max())})

## Paired Differences (adaptive - compute-only)

| Metric | Adaptive mean | Compute-only mean | Mean difference | {level}% CI | P-value |
|--------|---------------|-------------------|-----------------|--------|---------|
{metric_rows}

## Bytes Ordering

{bytes_verdict}
"""
        if output_path is not None:
            write_atomic(output_path, content)
            print(f"✓ Sweep summary saved to {os.path.basename(output_path)}")
        return content
