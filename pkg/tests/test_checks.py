"""
Tests for scenario validation checks.
"""

import pytest
import json
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import config
from src.validation.checks import ScenarioValidator, ValidationReport, ValidationResult, validate_scenario
from builders import MB, scenario_doc


def create_valid_scenario():
    """Helper to create a small, valid two-site scenario document."""
    return scenario_doc(
        [('a', 2, 1.0, 4), ('b', 1, 2.0, 2)],
        [('a', 'a'), ('store', None)],
        [('lfn:/d/x.dat', 30 * MB, ['a']), ('lfn:/d/y.dat', 30 * MB, ['a', 'store'])],
        bandwidth_trace=[{'from_time': 0.0, 'default': 1.0, 'matrix': {'store': {'b': 4.0}}}],
        failures=[{'time': 60.0, 'resource': 'b', 'component': 'compute', 'action': 'fail'}],
    )


def result_for(report, check_name):
    return [r for r in report.results if r.check_name == check_name]


def test_valid_scenario_passes():
    report = ScenarioValidator(create_valid_scenario()).validate()

    assert report.passed, report.diagnostics()
    assert all(r.passed for r in report.results), "Every check should pass with a valid scenario"
    assert report.warnings == []


def test_shipped_scenario_passes():
    with open(os.path.join(config.SCENARIO_DIR, 'belle-default.json'), encoding='utf-8') as f:
        report = validate_scenario(json.load(f))

    assert report.passed, report.diagnostics()


def test_schema_check_fails_missing_sections():
    report = validate_scenario({'servers': [{'id': 'a'}]})

    assert not report.passed
    assert 'data_hosts: required section is missing' in report.diagnostics()
    assert 'catalog: required section is missing' in report.diagnostics()


def test_non_object_document_fails():
    report = validate_scenario(['servers'])

    assert not report.passed
    assert report.diagnostics()[0] == 'scenario must be a JSON object'


def test_unknown_keys_are_warnings_only():
    doc = create_valid_scenario()
    doc['colour'] = 'blue'
    report = validate_scenario(doc)

    assert report.passed, "Unknown keys should not block a run"
    assert [w.path for w in report.warnings] == ['colour']


@pytest.mark.parametrize('mutate, expected', [
    (lambda d: d['servers'][0].update(cpus=0), 'servers[0].cpus'),
    (lambda d: d['servers'][1].update(speed=-1.0), 'servers[1].speed'),
    (lambda d: d['servers'][1].update(id='a'), 'servers[1].id'),
    (lambda d: d['data_hosts'][1].update(co_located_compute='ghost'), 'data_hosts[1].co_located_compute'),
    (lambda d: d['catalog'][0].update(lfn='/d/x.dat'), 'catalog[0].lfn'),
    (lambda d: d['catalog'][1].update(size_bytes=0), 'catalog[1].size_bytes'),
    (lambda d: d['catalog'][1]['replicas'].append({'host': 'nowhere'}), 'catalog[1].replicas[2].host'),
    (lambda d: d['bandwidth_trace'][0]['matrix']['store'].update(b=-2.0), 'bandwidth_trace[0].matrix.store.b'),
    (lambda d: d['failures'][0].update(resource='store'), 'failures[0].resource'),
    (lambda d: d.update(horizon=30.0), 'failures[0].time'),
    (lambda d: d.update(estimator={'alpha': 1.5}), 'estimator.alpha'),
    (lambda d: d.update(streaming_overlap=2.0), 'streaming_overlap'),
    (lambda d: d.update(broker_host='perth'), 'broker_host'),
])
def test_errors_name_the_field_path(mutate, expected):
    """Each broken field is reported under its own path."""
    doc = create_valid_scenario()
    mutate(doc)
    report = validate_scenario(doc)

    assert not report.passed
    paths = [r.path for r in report.errors]
    assert expected in paths, f"Expected an error at {expected}, got {paths}"


def test_size_conflict_between_registrations():
    doc = create_valid_scenario()
    doc['catalog'].append({'lfn': 'lfn:/d/x.dat', 'size_bytes': 10, 'replicas': [{'host': 'store'}]})
    report = validate_scenario(doc)

    catalog = result_for(report, 'Replica Catalog')
    assert [r.path for r in catalog] == ['catalog[2].size_bytes']


def test_trace_must_start_at_zero():
    doc = create_valid_scenario()
    doc['bandwidth_trace'][0]['from_time'] = 10.0
    report = validate_scenario(doc)

    assert 'bandwidth_trace: first segment must start at from_time 0' in report.diagnostics()


def test_all_problems_are_reported_at_once():
    doc = create_valid_scenario()
    doc['servers'][0]['cpus'] = 0
    doc['catalog'][0]['replicas'][0]['host'] = 'nowhere'
    doc['failures'][0]['action'] = 'explode'
    report = validate_scenario(doc)

    assert len(report.errors) == 3
    assert {r.check_name for r in report.errors} == {'Compute Servers', 'Replica Catalog', 'Failure Script'}


def test_result_formatting(capsys):
    assert str(ValidationResult('Schema Check', True, 'ok')).startswith('[✓ PASS] Schema Check')
    failed = ValidationResult('Compute Servers', False, 'bad', path='servers[0].cpus')
    assert str(failed) == '[✗ FAIL] Compute Servers [servers[0].cpus]: bad'

    ValidationReport([failed]).print_report()
    out = capsys.readouterr().out
    assert 'SCENARIO VALIDATION REPORT' in out
    assert 'Validation FAILED' in out


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
