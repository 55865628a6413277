"""
Figures for a policy comparison: total time per policy, jobs per server,
and measured bandwidth from one host over time.
"""

from typing import List, Optional

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.metrics.compute import ComparisonTable  # noqa: E402
from src.utils.io import save_figure  # noqa: E402

POLICY_COLORS = {
    'data-local': '#757575',
    'compute-only': '#C62828',
    'adaptive': '#2E7D32',
}


def create_total_time_plot(table: ComparisonTable):
    """Total time per policy, annotated with done/failed counts."""
    fig, ax = plt.subplots(figsize=(8, 5))
    x_pos = np.arange(len(table.rows))
    times = [row.total_time for row in table.rows]
    colors = [POLICY_COLORS.get(row.policy, '#4472C4') for row in table.rows]

    bars = ax.bar(x_pos, times, color=colors, alpha=0.8, edgecolor='black', linewidth=1.5)
    for bar, row in zip(bars, table.rows):
        ax.text(bar.get_x() + bar.get_width() / 2., bar.get_height(),
                f"{row.total_time:,.0f}s\n{row.done} done / {row.failed} failed",
                ha='center', va='bottom', fontsize=10, weight='bold')

    ax.set_xticks(x_pos)
    ax.set_xticklabels(table.policies, fontsize=11)
    ax.set_ylabel('Total time (s)', fontsize=12)
    ax.set_title(f'Total Time per Scheduling Policy ({table.scenario})', fontsize=14, weight='bold', pad=20)
    ax.grid(axis='y', alpha=0.3, linestyle=':')
    plt.tight_layout()
    return fig


def create_per_server_plot(table: ComparisonTable):
    """Completed jobs per server, grouped by policy."""
    frame = table.per_server_frame()
    servers = sorted(frame['server'].unique())
    fig, ax = plt.subplots(figsize=(10, 6))
    width = 0.8 / max(len(table.policies), 1)
    x_pos = np.arange(len(servers))

    for i, policy in enumerate(table.policies):
        done = (frame[frame['policy'] == policy].set_index('server')['done']
                .reindex(servers, fill_value=0).to_numpy())
        ax.bar(x_pos + i * width, done, width, label=policy,
               color=POLICY_COLORS.get(policy, '#4472C4'), alpha=0.8, edgecolor='black')

    ax.set_xticks(x_pos + width * (len(table.policies) - 1) / 2)
    ax.set_xticklabels(servers, rotation=20, ha='right', fontsize=10)
    ax.set_ylabel('Jobs completed', fontsize=12)
    ax.set_title('Jobs Completed per Server', fontsize=14, weight='bold', pad=20)
    ax.grid(axis='y', alpha=0.3, linestyle=':')
    ax.legend(loc='upper right', fontsize=10)
    plt.tight_layout()
    return fig


def create_bandwidth_plot(table: ComparisonTable, from_host: str):
    """Measured bandwidth from `from_host` to every other site."""
    frame = table.bandwidth_frame(from_host)
    # Samples are logged on change only; hold the last value to the end of the runs
    end = max([row.total_time for row in table.rows] + [frame['time'].max() if len(frame) else 0.0])
    fig, ax = plt.subplots(figsize=(10, 6))
    for destination, series in frame.groupby('to'):
        times = np.append(series['time'].to_numpy(), end)
        values = np.append(series['bandwidth'].to_numpy(), series['bandwidth'].iloc[-1])
        ax.step(times, values, where='post', label=destination, linewidth=2)

    ax.set_xlabel('Time (s)', fontsize=12)
    ax.set_ylabel('Bandwidth (MB/s)', fontsize=12)
    ax.set_title(f'Measured Bandwidth from {from_host}', fontsize=14, weight='bold', pad=20)
    ax.grid(alpha=0.3, linestyle=':')
    if not frame.empty:
        ax.legend(loc='upper right', fontsize=10)
    plt.tight_layout()
    return fig


def render_figures(table: ComparisonTable, output_dir: str, from_host: Optional[str] = None) -> List[str]:
    """
    Render the three comparison figures to PNG files in `output_dir`.

    `from_host` selects the bandwidth series; the first measured source
    host is used when omitted.
    """
    if from_host is None:
        sources = table.bandwidth_frame()['from']
        from_host = sources.min() if len(sources) else ''

    paths = []
    for filename, fig in (
        ('total_time.png', create_total_time_plot(table)),
        ('per_server.png', create_per_server_plot(table)),
        ('bandwidth.png', create_bandwidth_plot(table, from_host)),
    ):
        paths.append(save_figure(fig, filename, output_dir))
        plt.close(fig)
    return paths
