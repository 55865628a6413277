"""
Semantic checks for parsed plans.

Runs every check and collects the findings, so one pass reports all
problems. A plan is valid when the returned list is empty.
"""

import math
from typing import Dict, List

from src.plan_lang.nodes import (
    Diagnostic, Execute, Gridfile, IDENTIFIER_RE, JOBNAME, LFN_PREFIX, MCopy,
    PlanFile, Range, Single, TASK_MAIN, TASK_NODESTART, ValueSet, variables_in,
)

KNOWN_TASKS = (TASK_NODESTART, TASK_MAIN)
WILDCARDS = ('*', '?')


class PlanValidator:
    """
    Validates a PlanFile against the plan invariants.

    - parameter names are identifiers, unique, and not the reserved `jobname`
    - range, set and gridfile domains are well formed, with finite numbers
    - at most one gridfile parameter, without `**` in its pattern
    - tasks are `nodestart` (at most once) and `main` (exactly once)
    - mcopy sources carry a wildcard, execute names a program
    - every `$NAME` resolves to a parameter or to `$jobname`
    """

    def __init__(self, plan: PlanFile):
        self.plan = plan
        self.results: List[Diagnostic] = []

    def validate(self) -> List[Diagnostic]:
        self._check_parameter_names()
        self._check_parameter_domains()
        self._check_tasks()
        self._check_commands()
        self._check_references()
        return sorted(self.results, key=lambda d: (d.line, d.message))

    def _error(self, line: int, message: str):
        self.results.append(Diagnostic('error', max(1, line), message))

    def _check_parameter_names(self):
        first_seen: Dict[str, int] = {}
        for decl in self.plan.parameters:
            if not IDENTIFIER_RE.match(decl.name):
                self._error(decl.line, f"parameter name '{decl.name}' is not an identifier")
            if decl.name == JOBNAME:
                self._error(decl.line, "'jobname' is reserved and cannot be declared")
            if decl.name in first_seen:
                self._error(decl.line, f"duplicate parameter '{decl.name}' "
                                       f"(first declared on line {first_seen[decl.name]})")
            else:
                first_seen[decl.name] = decl.line

    def _check_parameter_domains(self):
        gridfiles = []
        for decl in self.plan.parameters:
            kind = decl.kind
            for value in _numbers_in(kind):
                if not math.isfinite(value):
                    self._error(decl.line, f"parameter '{decl.name}' has non-finite value {value!r}")
            if isinstance(kind, Range):
                if not kind.step > 0:
                    self._error(decl.line, f"range '{decl.name}' needs a positive step, got {kind.step}")
                if kind.lo > kind.hi:
                    self._error(decl.line, f"range '{decl.name}' has lo {kind.lo} greater than hi {kind.hi}")
            elif isinstance(kind, ValueSet):
                if not kind.values:
                    self._error(decl.line, f"set '{decl.name}' is empty")
                seen = []
                for value in kind.values:
                    if value in seen:
                        self._error(decl.line, f"duplicate set value {value!r} in parameter '{decl.name}'")
                    else:
                        seen.append(value)
            elif isinstance(kind, Gridfile):
                gridfiles.append(decl)
                if not kind.pattern.startswith(LFN_PREFIX):
                    self._error(decl.line, f"gridfile '{decl.name}' pattern must start with "
                                           f"'{LFN_PREFIX}', got '{kind.pattern}'")
                if '**' in kind.pattern:
                    self._error(decl.line, f"gridfile '{decl.name}' pattern uses '**', which is not supported")
            elif isinstance(kind, Single):
                if kind.value is None:
                    self._error(decl.line, f"single '{decl.name}' has no value")
        for extra in gridfiles[1:]:
            self._error(extra.line, f"at most one gridfile parameter is supported "
                                    f"('{gridfiles[0].name}' declared on line {gridfiles[0].line})")

    def _check_tasks(self):
        counts = {name: 0 for name in KNOWN_TASKS}
        for task in self.plan.tasks:
            if task.name not in KNOWN_TASKS:
                self._error(task.line, f"unknown task '{task.name}' (expected 'nodestart' or 'main')")
                continue
            counts[task.name] += 1
            if counts[task.name] > 1:
                self._error(task.line, f"task '{task.name}' is declared more than once")
        if counts[TASK_MAIN] == 0:
            self._error(1, "plan has no 'main' task")

    def _check_commands(self):
        for task in self.plan.tasks:
            for command in task.commands:
                if isinstance(command, MCopy) and not any(w in command.src for w in WILDCARDS):
                    self._error(command.line, f"mcopy source '{command.src}' has no wildcard (* or ?)")
                if isinstance(command, Execute) and not command.program:
                    self._error(command.line, "execute has an empty program")

    def _check_references(self):
        declared = {decl.name for decl in self.plan.parameters} | {JOBNAME}
        reported = set()
        for task in self.plan.tasks:
            for command in task.commands:
                for text in command.strings():
                    for name in variables_in(text):
                        if name not in declared and name not in reported:
                            reported.add(name)
                            self._error(command.line, f"unresolved variable '${name}' ('{name}' "
                                                      f"is not a declared parameter)")


def _numbers_in(kind) -> List[float]:
    if isinstance(kind, Range):
        values = [kind.lo, kind.hi, kind.step]
    elif isinstance(kind, ValueSet):
        values = list(kind.values)
    elif isinstance(kind, Single):
        values = [kind.value]
    else:
        values = []
    return [v for v in values if isinstance(v, float)]


def validate_plan(plan: PlanFile) -> List[Diagnostic]:
    """Return the diagnostics for `plan`; an empty list means it is valid."""
    return PlanValidator(plan).validate()
