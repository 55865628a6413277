"""
AST for the declarative plan language.

A plan declares parameters and two tasks (`nodestart`, `main`). Source line
numbers ride along on every node for diagnostics but are excluded from
equality, so a pretty-printed and re-parsed plan compares equal.
"""

import re
from dataclasses import dataclass, field
from typing import List, Tuple, Union

Value = Union[int, float, str]

NODE_PREFIX = 'node:'
LFN_PREFIX = 'lfn:'
JOBNAME = 'jobname'
TASK_NODESTART = 'nodestart'
TASK_MAIN = 'main'

IDENTIFIER_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')
VARIABLE_RE = re.compile(r'\$([A-Za-z_][A-Za-z0-9_]*)')


@dataclass(frozen=True)
class Diagnostic:
    """A parser or validator finding tied to a source line."""
    severity: str  # 'error' or 'warning'
    line: int
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == 'error'

    def __str__(self):
        return f"line {self.line}: {self.severity}: {self.message}"


# -----------------------------------------------------------------------------
# Parameters
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Single:
    value: Value


@dataclass(frozen=True)
class Range:
    lo: Union[int, float]
    hi: Union[int, float]
    step: Union[int, float]


@dataclass(frozen=True)
class ValueSet:
    values: Tuple[Value, ...]


@dataclass(frozen=True)
class Gridfile:
    """Dynamic parameter: an LFN pattern resolved against the catalog."""
    pattern: str


ParameterKind = Union[Single, Range, ValueSet, Gridfile]


@dataclass(frozen=True)
class ParameterDecl:
    name: str
    kind: ParameterKind
    line: int = field(default=0, compare=False)


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Copy:
    src: str
    dst: str
    line: int = field(default=0, compare=False)

    @property
    def keyword(self) -> str:
        return 'copy'

    def strings(self) -> Tuple[str, ...]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class MCopy:
    """Copy of every file matching a wildcard source."""
    src: str
    dst: str
    line: int = field(default=0, compare=False)

    @property
    def keyword(self) -> str:
        return 'mcopy'

    def strings(self) -> Tuple[str, ...]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Execute:
    program: str
    args: Tuple[str, ...] = ()
    on_node: bool = False  # written as `node:execute`
    line: int = field(default=0, compare=False)

    @property
    def keyword(self) -> str:
        return NODE_PREFIX + 'execute' if self.on_node else 'execute'

    def strings(self) -> Tuple[str, ...]:
        return (self.program,) + tuple(self.args)


@dataclass(frozen=True)
class Substitute:
    """Rewrite `$NAME` references inside a template file."""
    template: str
    output: str
    line: int = field(default=0, compare=False)

    @property
    def keyword(self) -> str:
        return 'substitute'

    def strings(self) -> Tuple[str, ...]:
        return (self.template, self.output)


Command = Union[Copy, MCopy, Execute, Substitute]


@dataclass(frozen=True)
class TaskDecl:
    name: str
    commands: Tuple[Command, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PlanFile:
    parameters: Tuple[ParameterDecl, ...] = ()
    tasks: Tuple[TaskDecl, ...] = ()

    def parameter(self, name: str) -> ParameterDecl:
        for decl in self.parameters:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def task(self, name: str):
        """Return the task called `name`, or None."""
        for task in self.tasks:
            if task.name == name:
                return task
        return None

    @property
    def gridfile_parameters(self) -> List[ParameterDecl]:
        return [p for p in self.parameters if isinstance(p.kind, Gridfile)]


def is_node_path(path: str) -> bool:
    return path.startswith(NODE_PREFIX)


def variables_in(text: str) -> List[str]:
    """Names of the `$NAME` references in a command string, in order."""
    return VARIABLE_RE.findall(text)
