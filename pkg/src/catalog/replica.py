"""
In-memory replica catalog.

Logical file names (`lfn:/dir/.../name`) live in a virtual directory tree and
map to one or more physical replicas on data hosts. Wildcard patterns resolve
against the registered names; `*` stays within one path segment and `?`
matches a single character.
"""

import logging
import posixpath
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Tuple

from src.errors import CatalogError, UnknownResourceError
from src.plan_lang.nodes import LFN_PREFIX

logger = logging.getLogger(__name__)

WILDCARD_CHARS = ('*', '?')
ROOT_DIRECTORY = LFN_PREFIX + '/'


@dataclass(frozen=True)
class Replica:
    host: str
    physical_path: str


@dataclass(frozen=True)
class ReplicaEntry:
    lfn: str
    size: int
    replicas: Tuple[Replica, ...]

    @property
    def hosts(self) -> List[str]:
        return [r.host for r in self.replicas]

    def to_dict(self) -> Dict:
        return {
            'lfn': self.lfn,
            'size_bytes': self.size,
            'replicas': [{'host': r.host, 'path': r.physical_path} for r in self.replicas],
        }


def normalize_lfn(lfn: str) -> str:
    """
    Canonical form of a logical file name.

    Collapses repeated slashes and resolves `.`/`..` segments. Raises
    CatalogError for names outside the `lfn:` scheme, relative names and
    names that climb above the root.
    """
    if not isinstance(lfn, str) or not lfn.startswith(LFN_PREFIX):
        raise CatalogError(f"logical file name must start with '{LFN_PREFIX}': {lfn!r}")
    path = lfn[len(LFN_PREFIX):]
    if not path.startswith('/'):
        raise CatalogError(f"logical file name must be absolute: {lfn!r}")

    parts: List[str] = []
    for segment in path.split('/'):
        if segment in ('', '.'):
            continue
        if segment == '..':
            if not parts:
                raise CatalogError(f"logical file name escapes the root: {lfn!r}")
            parts.pop()
            continue
        parts.append(segment)
    if not parts:
        raise CatalogError(f"logical file name has no file component: {lfn!r}")
    return LFN_PREFIX + '/' + '/'.join(parts)


def parent_directory(lfn: str) -> str:
    parent = posixpath.dirname(lfn)
    return ROOT_DIRECTORY if parent == LFN_PREFIX else parent


def has_wildcard(pattern: str) -> bool:
    return any(c in pattern for c in WILDCARD_CHARS)


def compile_pattern(pattern: str) -> re.Pattern:
    """Translate an LFN glob into an anchored regex."""
    if '**' in pattern:
        raise CatalogError(f"malformed pattern {pattern!r}: '**' is not supported")
    if not pattern.startswith(LFN_PREFIX + '/'):
        raise CatalogError(f"malformed pattern {pattern!r}: must start with '{LFN_PREFIX}/'")
    if '//' in pattern[len(LFN_PREFIX):] or '/./' in pattern or '/../' in pattern or pattern.endswith('/'):
        raise CatalogError(f"malformed pattern {pattern!r}: not a normalized path")

    out = []
    for ch in pattern:
        if ch == '*':
            out.append('[^/]*')
        elif ch == '?':
            out.append('[^/]')
        else:
            out.append(re.escape(ch))
    return re.compile('^' + ''.join(out) + '$')


@dataclass
class Catalog:
    """
    LFN → ReplicaEntry store.

    `known_hosts`, when given, restricts replicas to declared data hosts.
    """
    entries: Dict[str, ReplicaEntry] = field(default_factory=dict)
    known_hosts: Optional[frozenset] = None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, lfn: str) -> bool:
        try:
            return normalize_lfn(lfn) in self.entries
        except CatalogError:
            return False

    def register(self, lfn: str, size: int, replicas: Iterable) -> ReplicaEntry:
        """
        Add an LFN or extend its replica list.

        Parameters
        ----------
        lfn : str
            Logical file name
        size : int
            File size in bytes, > 0
        replicas : iterable of Replica or (host, path)
            Physical locations

        Returns
        -------
        ReplicaEntry
            The stored entry after registration
        """
        name = normalize_lfn(lfn)
        if isinstance(size, bool) or not isinstance(size, int) or size <= 0:
            raise CatalogError(f"{name}: size must be a positive integer number of bytes, got {size!r}")

        new = [r if isinstance(r, Replica) else Replica(*r) for r in replicas]
        if not new:
            raise CatalogError(f"{name}: at least one replica is required")
        for r in new:
            if self.known_hosts is not None and r.host not in self.known_hosts:
                raise UnknownResourceError(f"{name}: unknown data host '{r.host}'")

        existing = self.entries.get(name)
        if existing is not None:
            if existing.size != size:
                raise CatalogError(f"{name}: already registered with size {existing.size}, "
                                   f"cannot re-register with size {size}")
            merged = list(existing.replicas)
            for r in new:
                if r not in merged:
                    merged.append(r)
            entry = replace(existing, replicas=tuple(merged))
        else:
            deduped = []
            for r in new:
                if r not in deduped:
                    deduped.append(r)
            entry = ReplicaEntry(lfn=name, size=size, replicas=tuple(deduped))

        self.entries[name] = entry
        return entry

    def lookup_replicas(self, lfn: str) -> ReplicaEntry:
        name = normalize_lfn(lfn)
        try:
            return self.entries[name]
        except KeyError:
            raise UnknownResourceError(f"unknown logical file name '{name}'") from None

    def resolve_wildcard(self, pattern: str) -> List[str]:
        """Registered LFNs matching `pattern`, sorted and duplicate-free."""
        if not has_wildcard(pattern):
            compile_pattern(pattern)
            try:
                name = normalize_lfn(pattern)
            except CatalogError as exc:
                raise CatalogError(f"malformed pattern {pattern!r}: {exc}") from None
            return [name] if name in self.entries else []

        regex = compile_pattern(pattern)
        matches = sorted(lfn for lfn in self.entries if regex.match(lfn))
        logger.debug("pattern %s matched %d of %d entries", pattern, len(matches), len(self.entries))
        return matches

    def list_directory(self, directory: str) -> List[str]:
        """LFNs stored directly in the virtual directory `directory`."""
        if directory.rstrip('/') == LFN_PREFIX:
            prefix = ROOT_DIRECTORY
        else:
            prefix = normalize_lfn(directory)
        return sorted(lfn for lfn in self.entries if parent_directory(lfn) == prefix)

    def collections(self) -> List[str]:
        """Distinct virtual directories holding at least one entry."""
        return sorted({parent_directory(lfn) for lfn in self.entries})

    def entries_on_host(self, host: str) -> List[ReplicaEntry]:
        return [self.entries[lfn] for lfn in sorted(self.entries) if host in self.entries[lfn].hosts]

    def to_records(self) -> List[Dict]:
        return [self.entries[lfn].to_dict() for lfn in sorted(self.entries)]


def build_catalog(records: Iterable[Dict], known_hosts: Optional[Iterable[str]] = None) -> Catalog:
    """Build a Catalog from `{lfn, size_bytes, replicas: [{host, path}]}` records."""
    catalog = Catalog(known_hosts=frozenset(known_hosts) if known_hosts is not None else None)
    for record in records:
        replicas = [Replica(r['host'], r.get('path', '')) for r in record['replicas']]
        catalog.register(record['lfn'], record['size_bytes'], replicas)
    logger.info("catalog built with %d entries in %d collection(s)",
                len(catalog), len(catalog.collections()))
    return catalog
