"""
Tests for file output helpers and result figures.
"""

import pytest
import math
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.metrics.compute import build_comparison
from src.sim_engine import engine
from src.utils.io import canonical_json, read_json, write_atomic, write_json
from src.utils.visualizations import render_figures
from builders import belle_plan, belle_scenario


def test_canonical_json_is_compact_and_sorted():
    assert canonical_json({'b': 1, 'a': [1.5, None]}) == '{"a":[1.5,null],"b":1}'
    with pytest.raises(ValueError):
        canonical_json({'t': math.inf})


def test_atomic_write_replaces_whole_file(tmp_path):
    path = str(tmp_path / 'nested' / 'out.txt')
    write_atomic(path, 'first')
    write_atomic(path, 'second')

    with open(path, encoding='utf-8') as f:
        assert f.read() == 'second'
    assert os.listdir(str(tmp_path / 'nested')) == ['out.txt'], "No temporary files should remain"


def test_json_round_trip(tmp_path):
    path = str(tmp_path / 'report.json')
    write_json(path, {'done': 3, 'per_server': {'a': {'done': 3, 'failed': 0}}})
    assert read_json(path)['per_server']['a']['done'] == 3

    with pytest.raises(FileNotFoundError):
        read_json(str(tmp_path / 'missing.json'))


def test_figures_are_rendered(tmp_path):
    scenario = belle_scenario(with_failure=True)
    reports = [engine.run(scenario, belle_plan(), policy) for policy in config.POLICIES]
    paths = render_figures(build_comparison(reports), str(tmp_path), from_host='adelaide')

    assert [os.path.basename(p) for p in paths] == ['total_time.png', 'per_server.png', 'bandwidth.png']
    for path in paths:
        assert os.path.getsize(path) > 0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
