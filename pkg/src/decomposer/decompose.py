"""
Turn a validated plan into the job set.

Dynamic (Gridfile) parameters are first resolved against the replica
catalog. The job set is then the Cartesian product of every parameter
domain in declaration order, with `$NAME` references substituted into each
job's commands.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from src import config
from src.catalog.replica import Catalog
from src.decomposer.jobs import Job, JobSet
from src.errors import CatalogError, DecompositionError
from src.plan_lang.nodes import (
    Copy, Execute, Gridfile, JOBNAME, MCopy, PlanFile, Range, Single,
    Substitute, TASK_MAIN, TASK_NODESTART, Value, ValueSet, VARIABLE_RE,
)
from src.utils.io import write_jsonl

logger = logging.getLogger(__name__)

RANGE_EPSILON = 1e-9


@dataclass(frozen=True)
class ResolvedPlan:
    """A plan whose every parameter has a concrete, ordered domain."""
    plan: PlanFile
    domains: Tuple[Tuple[str, Tuple[Value, ...]], ...]
    file_sizes: Dict[str, int] = field(default_factory=dict, compare=False)

    def domain(self, name: str) -> Tuple[Value, ...]:
        for param, values in self.domains:
            if param == name:
                return values
        raise KeyError(name)

    @property
    def job_count(self) -> int:
        return math.prod(len(values) for _, values in self.domains)


def expand_range(kind: Range) -> Tuple[Value, ...]:
    bounds = (kind.lo, kind.hi, kind.step)
    if not all(isinstance(v, int) or math.isfinite(v) for v in bounds):
        raise DecompositionError(f"range {kind.lo} {kind.hi} {kind.step} has a non-finite bound or step")
    if not kind.step > 0 or kind.lo > kind.hi:
        raise DecompositionError(f"range {kind.lo} {kind.hi} {kind.step} is empty or has a non-positive step")
    try:
        steps = (kind.hi - kind.lo) / kind.step
    except OverflowError:
        steps = math.inf
    if not steps < config.MAX_RANGE_VALUES:
        raise DecompositionError(f"range {kind.lo} {kind.hi} {kind.step} expands to more than "
                                 f"{config.MAX_RANGE_VALUES} values")
    count = int(math.floor(steps + RANGE_EPSILON)) + 1
    values = [kind.lo + i * kind.step for i in range(count)]
    if all(isinstance(v, int) for v in bounds):
        return tuple(int(v) for v in values)
    return tuple(float(v) for v in values)


def static_domain(kind) -> Tuple[Value, ...]:
    if isinstance(kind, Single):
        return (kind.value,)
    if isinstance(kind, Range):
        return expand_range(kind)
    if isinstance(kind, ValueSet):
        return tuple(kind.values)
    raise TypeError(f"not a static parameter kind: {kind!r}")


def resolve_dynamic_parameters(plan: PlanFile, catalog: Catalog) -> ResolvedPlan:
    """
    Make every parameter domain concrete.

    Gridfile domains become the sorted list of matching LFNs; other kinds
    expand in place. A Gridfile pattern matching nothing is an error.
    """
    domains = []
    sizes: Dict[str, int] = {}
    for decl in plan.parameters:
        if isinstance(decl.kind, Gridfile):
            try:
                matches = catalog.resolve_wildcard(decl.kind.pattern)
            except CatalogError as exc:
                raise DecompositionError(f"parameter '{decl.name}': {exc}") from exc
            if not matches:
                raise DecompositionError(f"parameter '{decl.name}': pattern '{decl.kind.pattern}' "
                                         f"matches no catalog entry")
            for lfn in matches:
                sizes[lfn] = catalog.lookup_replicas(lfn).size
            logger.info("resolved %s to %d file(s)", decl.name, len(matches))
            domains.append((decl.name, tuple(matches)))
        else:
            domains.append((decl.name, static_domain(decl.kind)))
    return ResolvedPlan(plan=plan, domains=tuple(domains), file_sizes=sizes)


def format_binding(value: Value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def substitute_text(text: str, bindings: Dict[str, Value], job_id: str) -> str:
    def lookup(match):
        name = match.group(1)
        if name == JOBNAME:
            return job_id
        if name not in bindings:
            raise DecompositionError(f"{job_id}: unresolved variable '${name}'")
        return format_binding(bindings[name])
    return VARIABLE_RE.sub(lookup, text)


def substitute_command(command, bindings: Dict[str, Value], job_id: str):
    sub = lambda s: substitute_text(s, bindings, job_id)  # noqa: E731
    if isinstance(command, (Copy, MCopy)):
        return replace(command, src=sub(command.src), dst=sub(command.dst))
    if isinstance(command, Execute):
        return replace(command, program=sub(command.program), args=tuple(sub(a) for a in command.args))
    if isinstance(command, Substitute):
        return replace(command, template=sub(command.template), output=sub(command.output))
    raise TypeError(f"unknown command {command!r}")


def decompose(resolved: ResolvedPlan) -> JobSet:
    """
    Expand a resolved plan into jobs.

    Parameters
    ----------
    resolved : ResolvedPlan
        Output of resolve_dynamic_parameters

    Returns
    -------
    JobSet
        One job per element of the Cartesian product of the domains, ids
        `job1`, `job2`, ... in product order
    """
    plan = resolved.plan
    gridfiles = [p.name for p in plan.gridfile_parameters]
    if len(gridfiles) > 1:
        raise DecompositionError(f"at most one gridfile parameter is supported, got {len(gridfiles)}: "
                                 f"{', '.join(gridfiles)}")
    for name, values in resolved.domains:
        if not values:
            raise DecompositionError(f"parameter '{name}' has an empty domain")

    main = plan.task(TASK_MAIN)
    nodestart = plan.task(TASK_NODESTART)
    names = [name for name, _ in resolved.domains]
    data_param: Optional[str] = gridfiles[0] if gridfiles else None

    jobs: List[Job] = []
    for ordinal, combo in enumerate(itertools.product(*(v for _, v in resolved.domains)), start=1):
        job_id = f"job{ordinal}"
        bindings = dict(zip(names, combo))
        lfn = bindings[data_param] if data_param else None
        jobs.append(Job(
            id=job_id,
            ordinal=ordinal,
            bindings=bindings,
            main=tuple(substitute_command(c, bindings, job_id) for c in (main.commands if main else ())),
            nodestart=tuple(substitute_command(c, bindings, job_id)
                            for c in (nodestart.commands if nodestart else ())),
            required_lfn=lfn,
            input_bytes=resolved.file_sizes.get(lfn, 0) if lfn else 0,
        ))

    logger.info("decomposed plan into %d job(s)", len(jobs))
    return JobSet(jobs=jobs)


def write_manifest(jobs: JobSet, path: str):
    """One JSON object per job, in job order."""
    write_jsonl(path, [job.to_manifest() for job in jobs])
