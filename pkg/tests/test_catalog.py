"""
Tests for the replica catalog.
"""

import pytest
import numpy as np
import fnmatch
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.catalog.replica import Catalog, Replica, build_catalog, normalize_lfn
from src.errors import CatalogError, UnknownResourceError
from builders import MB, belle_scenario

BELLE_PATTERN = 'lfn:/users/winton/fsimddks/fsimdata*.mdst'


def belle_catalog():
    return belle_scenario().build_model().catalog


def glob_oracle(pattern, names):
    """Segment-by-segment fnmatch: `*` and `?` never cross a '/'."""
    parts = pattern.split('/')
    matches = []
    for name in names:
        segments = name.split('/')
        if len(segments) == len(parts) and all(fnmatch.fnmatchcase(s, p) for s, p in zip(segments, parts)):
            matches.append(name)
    return sorted(matches)


def test_belle_catalog_has_100_entries():
    """Every belle file is registered with one 30 MB replica."""
    catalog = belle_catalog()

    assert len(catalog) == 100
    for entry in catalog.entries.values():
        assert entry.size == 30 * MB
        assert len(entry.replicas) == 1, f"{entry.lfn} should have exactly one replica"


def test_belle_files_spread_20_per_host():
    """Each of the five data hosts holds 20 files."""
    catalog = belle_catalog()
    for host in ('adelaide', 'anu', 'melbourne-cs', 'melbourne-physics', 'sydney'):
        assert len(catalog.entries_on_host(host)) == 20, f"{host} should hold 20 files"


def test_wildcard_resolves_every_belle_file():
    """The plan's INFILE pattern matches all 100 files, sorted."""
    catalog = belle_catalog()
    matches = catalog.resolve_wildcard(BELLE_PATTERN)

    assert len(matches) == 100
    assert matches == sorted(matches)
    assert matches[0] == 'lfn:/users/winton/fsimddks/fsimdata001.mdst'


def test_question_mark_pattern_matches_oracle():
    """`?` matches one character and `*` one directory level."""
    catalog = belle_catalog()
    pattern = 'lfn:/users/*/fsimddks/fsimdata0?1.mdst'
    matches = catalog.resolve_wildcard(pattern)

    assert matches == glob_oracle(pattern, catalog.entries)
    assert len(matches) == 10, "001, 011, ..., 091 should match"


def test_star_does_not_cross_directories():
    """`lfn:/users/*.mdst` matches nothing two levels down."""
    catalog = belle_catalog()
    assert catalog.resolve_wildcard('lfn:/users/*.mdst') == []


def test_random_patterns_match_oracle():
    """Random patterns over a random tree agree with the oracle."""
    rng = np.random.default_rng(3)
    catalog = Catalog()
    for _ in range(60):
        depth = int(rng.integers(1, 4))
        segments = [''.join(rng.choice(list('abc'), size=int(rng.integers(1, 4)))) for _ in range(depth)]
        catalog.register('lfn:/' + '/'.join(segments), 10, [('h', '')])
    names = list(catalog.entries)

    for _ in range(200):
        depth = int(rng.integers(1, 4))
        segments = []
        for _ in range(depth):
            seg = ''.join(rng.choice(list('abc*?'), size=int(rng.integers(1, 4))))
            while '**' in seg:
                seg = seg.replace('**', '*')
            segments.append(seg)
        pattern = 'lfn:/' + '/'.join(segments)
        assert catalog.resolve_wildcard(pattern) == glob_oracle(pattern, names), f"pattern {pattern}"


def test_pattern_without_wildcard_is_exact_lookup():
    catalog = belle_catalog()
    name = 'lfn:/users/winton/fsimddks/fsimdata042.mdst'

    assert catalog.resolve_wildcard(name) == [name]
    assert catalog.resolve_wildcard('lfn:/users/winton/fsimddks/missing.mdst') == []


@pytest.mark.parametrize('pattern', [
    'lfn:/users/**/x.mdst',
    '/users/winton/*.mdst',
    'lfn:users/*.mdst',
    'lfn:/users//winton/*.mdst',
    'lfn:/users/winton/',
])
def test_malformed_patterns_raise(pattern):
    """Malformed patterns raise CatalogError."""
    with pytest.raises(CatalogError):
        belle_catalog().resolve_wildcard(pattern)


def test_lookup_returns_replica_host():
    """fsimdata041 lives on adelaide."""
    entry = belle_catalog().lookup_replicas('lfn:/users/winton/fsimddks/fsimdata041.mdst')

    assert entry.hosts == ['adelaide']
    assert entry.size == 30 * MB


def test_lookup_unknown_lfn_raises():
    with pytest.raises(UnknownResourceError):
        belle_catalog().lookup_replicas('lfn:/users/winton/fsimddks/nothere.mdst')


def test_duplicate_registration_merges_replicas():
    """Registering a known LFN again adds new replicas without duplicates."""
    catalog = Catalog()
    catalog.register('lfn:/d/a.dat', 100, [('h1', '/x')])
    entry = catalog.register('lfn:/d/a.dat', 100, [('h1', '/x'), ('h2', '/y')])

    assert entry.replicas == (Replica('h1', '/x'), Replica('h2', '/y'))
    assert len(catalog) == 1


def test_size_conflict_is_rejected():
    catalog = Catalog()
    catalog.register('lfn:/d/a.dat', 100, [('h1', '')])
    with pytest.raises(CatalogError):
        catalog.register('lfn:/d/a.dat', 200, [('h1', '')])


@pytest.mark.parametrize('size', [0, -5, 1.5, True])
def test_non_positive_size_is_rejected(size):
    with pytest.raises(CatalogError):
        Catalog().register('lfn:/d/a.dat', size, [('h1', '')])


def test_replica_on_unknown_host_is_rejected():
    with pytest.raises(UnknownResourceError):
        build_catalog([{'lfn': 'lfn:/d/a.dat', 'size_bytes': 10, 'replicas': [{'host': 'ghost'}]}],
                      known_hosts=['h1'])


def test_normalize_collapses_segments():
    assert normalize_lfn('lfn://d/./e/../f.dat') == 'lfn:/d/f.dat'
    with pytest.raises(CatalogError):
        normalize_lfn('lfn:/../f.dat')


def test_directory_listing_and_collections():
    """Files are listed per virtual directory."""
    catalog = Catalog()
    catalog.register('lfn:/top.dat', 1, [('h', '')])
    catalog.register('lfn:/d/a.dat', 1, [('h', '')])
    catalog.register('lfn:/d/b.dat', 1, [('h', '')])
    catalog.register('lfn:/d/sub/c.dat', 1, [('h', '')])

    assert catalog.list_directory('lfn:/d') == ['lfn:/d/a.dat', 'lfn:/d/b.dat']
    assert catalog.list_directory('lfn:/') == ['lfn:/top.dat']
    assert catalog.collections() == ['lfn:/', 'lfn:/d', 'lfn:/d/sub']


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
