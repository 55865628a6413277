"""
Parser and pretty-printer for plan files.

The language is line oriented:

    # comment
    parameter <name> <kind> <args>;
    task <name>
      <command> <args>
    endtask

Keywords are case-insensitive, identifiers are not. Parameter kinds are
`single <v>`, `range <lo> <hi> <step>`, `set <v> ...` and `gridfile <lfn-pattern>`.
Commands are `copy`, `mcopy`, `execute` (optionally written `node:execute`)
and `substitute`. The full grammar is documented in docs/plan_language.md.

Parsing never raises on bad input: every problem becomes a line-numbered
Diagnostic and no partial AST is returned.
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import List, Optional, Union

from src.errors import PlanError
from src.plan_lang.checks import validate_plan
from src.plan_lang.nodes import (
    Copy, Diagnostic, Execute, Gridfile, MCopy, NODE_PREFIX, ParameterDecl,
    PlanFile, Range, Single, Substitute, TaskDecl, Value, ValueSet,
)

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(r'"((?:[^"\\]|\\.)*)"|\'([^\']*)\'|([^\s"\']+)|(["\'])')
INT_RE = re.compile(r'^[+-]?\d+$')
FLOAT_RE = re.compile(r'^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$')
ESCAPE_RE = re.compile(r'\\(.)')

PARAMETER_KINDS = ('single', 'range', 'set', 'gridfile')
COMMAND_ARITY = {
    'copy': 2,
    'mcopy': 2,
    'substitute': 2,
}


@dataclass(frozen=True)
class Token:
    text: str
    quoted: bool = False


class _LineError(Exception):
    pass


def tokenize(line: str) -> List[Token]:
    """Split one source line into tokens, dropping a trailing `#` comment."""
    tokens = []
    for match in TOKEN_RE.finditer(line):
        double, single, bare, stray = match.groups()
        if stray is not None:
            raise _LineError('unterminated quoted string')
        if bare is not None:
            if bare.startswith('#'):
                break
            tokens.append(Token(bare))
        elif double is not None:
            tokens.append(Token(ESCAPE_RE.sub(r'\1', double), quoted=True))
        else:
            tokens.append(Token(single, quoted=True))
    return tokens


def parse_number(text: str) -> Optional[Union[int, float]]:
    """Numeric value of an unquoted token, or None when it is not a number."""
    if INT_RE.match(text):
        return int(text)
    if FLOAT_RE.match(text):
        value = float(text)
        if not math.isfinite(value):
            raise _LineError(f"number '{text}' is out of range")
        return value
    return None


def _to_value(token: Token) -> Value:
    if token.quoted:
        return token.text
    number = parse_number(token.text)
    return token.text if number is None else number


class PlanParser:
    """
    Line-oriented plan parser.

    Collects every syntax error in the source rather than stopping at the
    first one, so a user sees all problems in a single pass.
    """

    def __init__(self, source: Union[str, bytes]):
        if isinstance(source, bytes):
            source = source.decode('utf-8', errors='replace')
        self.lines = source.split('\n')
        self.diagnostics: List[Diagnostic] = []
        self.parameters: List[ParameterDecl] = []
        self.tasks: List[TaskDecl] = []
        self._task_name: Optional[str] = None
        self._task_line = 0
        self._commands: list = []

    def parse(self) -> Union[PlanFile, List[Diagnostic]]:
        for number, raw in enumerate(self.lines, start=1):
            try:
                tokens = tokenize(raw.rstrip('\r'))
            except _LineError as exc:
                self._error(number, str(exc))
                continue
            if not tokens:
                continue
            try:
                if self._task_name is None:
                    self._parse_top_level(number, tokens)
                else:
                    self._parse_task_line(number, tokens)
            except _LineError as exc:
                self._error(number, str(exc))

        if self._task_name is not None:
            self._error(self._task_line,
                        f"unterminated task block '{self._task_name}': expected 'endtask'")

        if self.diagnostics:
            logger.debug("plan rejected with %d diagnostic(s)", len(self.diagnostics))
            return list(self.diagnostics)
        return PlanFile(parameters=tuple(self.parameters), tasks=tuple(self.tasks))

    def _error(self, line: int, message: str):
        self.diagnostics.append(Diagnostic('error', line, message))

    # -------------------------------------------------------------------------
    # Top level
    # -------------------------------------------------------------------------
    def _parse_top_level(self, number: int, tokens: List[Token]):
        keyword = tokens[0].text.lower() if not tokens[0].quoted else ''
        if keyword == 'parameter':
            decl = self._parse_parameter(number, tokens[1:])
            if decl is not None:
                self.parameters.append(decl)
        elif keyword == 'task':
            self._open_task(number, tokens[1:])
        elif keyword == 'endtask':
            self._error(number, "'endtask' without a matching 'task'")
        else:
            self._error(number, f"unknown keyword '{tokens[0].text}'")

    def _parse_parameter(self, number: int, tokens: List[Token]) -> Optional[ParameterDecl]:
        if not tokens:
            self._error(number, 'parameter declaration needs a name and a kind')
            return None

        # Declarations end with ';', either glued to the last token or alone
        last = tokens[-1]
        if last.quoted or not last.text.endswith(';'):
            self._error(number, "parameter declaration must end with ';'")
            return None
        stripped = last.text[:-1]
        tokens = tokens[:-1] + ([Token(stripped)] if stripped else [])

        if len(tokens) < 2:
            self._error(number, 'parameter declaration needs a name and a kind')
            return None

        name = tokens[0].text
        kind_token = tokens[1]
        args = tokens[2:]
        kind_name = kind_token.text.lower()
        if kind_token.quoted or kind_name not in PARAMETER_KINDS:
            self._error(number, f"malformed parameter kind '{kind_token.text}' for '{name}' "
                                f"(expected one of: {', '.join(PARAMETER_KINDS)})")
            return None

        if kind_name == 'single':
            if len(args) != 1:
                self._error(number, f"single parameter '{name}' takes exactly one value")
                return None
            kind = Single(_to_value(args[0]))
        elif kind_name == 'range':
            numbers = [None if a.quoted else parse_number(a.text) for a in args]
            if len(args) != 3 or any(n is None for n in numbers):
                self._error(number, f"range parameter '{name}' takes three numbers: <lo> <hi> <step>")
                return None
            kind = Range(*numbers)
        elif kind_name == 'set':
            if not args:
                self._error(number, f"set parameter '{name}' needs at least one value")
                return None
            kind = ValueSet(tuple(_to_value(a) for a in args))
        else:
            if len(args) != 1:
                self._error(number, f"gridfile parameter '{name}' takes exactly one LFN pattern")
                return None
            kind = Gridfile(args[0].text)

        return ParameterDecl(name=name, kind=kind, line=number)

    # -------------------------------------------------------------------------
    # Tasks
    # -------------------------------------------------------------------------
    def _open_task(self, number: int, tokens: List[Token]):
        if len(tokens) != 1:
            self._error(number, "task declaration takes exactly one name: 'task <name>'")
            name = tokens[0].text if tokens else '?'
        else:
            name = tokens[0].text
        self._task_name = name
        self._task_line = number
        self._commands = []

    def _close_task(self):
        self.tasks.append(TaskDecl(name=self._task_name, commands=tuple(self._commands),
                                   line=self._task_line))
        self._task_name = None
        self._commands = []

    def _parse_task_line(self, number: int, tokens: List[Token]):
        keyword = tokens[0].text.lower() if not tokens[0].quoted else ''
        args = [t.text for t in tokens[1:]]

        if keyword == 'endtask':
            if args:
                self._error(number, "'endtask' takes no arguments")
            self._close_task()
            return
        if keyword == 'task':
            self._error(self._task_line,
                        f"unterminated task block '{self._task_name}': expected 'endtask'")
            self._close_task()
            self._open_task(number, tokens[1:])
            return
        if keyword == 'parameter':
            self._error(number, 'parameter declarations are not allowed inside a task')
            return

        if keyword in COMMAND_ARITY:
            if len(args) != COMMAND_ARITY[keyword]:
                self._error(number, f"'{keyword}' takes {COMMAND_ARITY[keyword]} arguments, got {len(args)}")
                return
            if keyword == 'copy':
                command = Copy(args[0], args[1], line=number)
            elif keyword == 'mcopy':
                command = MCopy(args[0], args[1], line=number)
            else:
                command = Substitute(args[0], args[1], line=number)
        elif keyword in ('execute', NODE_PREFIX + 'execute'):
            if not args:
                self._error(number, "'execute' needs a program to run")
                return
            command = Execute(args[0], tuple(args[1:]), on_node=keyword != 'execute', line=number)
        else:
            self._error(number, f"unknown command '{tokens[0].text}' in task '{self._task_name}'")
            return

        self._commands.append(command)


def parse_plan(source: Union[str, bytes], validate: bool = True) -> Union[PlanFile, List[Diagnostic]]:
    """
    Parse plan-file text.

    Parameters
    ----------
    source : str
        Plan file contents
    validate : bool
        Also run validate_plan and reject plans with semantic errors

    Returns
    -------
    PlanFile or list of Diagnostic
        The AST on success, otherwise at least one error diagnostic
    """
    result = PlanParser(source).parse()
    if isinstance(result, list) or not validate:
        return result

    problems = validate_plan(result)
    if any(d.is_error for d in problems):
        return problems
    return result


def load_plan(path: str) -> PlanFile:
    """Read and parse a plan file, raising PlanError on any diagnostic."""
    with open(path, encoding='utf-8') as f:
        result = parse_plan(f.read())
    if isinstance(result, list):
        raise PlanError(result)
    logger.info("loaded plan %s: %d parameter(s), %d task(s)",
                path, len(result.parameters), len(result.tasks))
    return result


# -----------------------------------------------------------------------------
# Pretty-printing
# -----------------------------------------------------------------------------
def _needs_quotes(text: str) -> bool:
    return (not text or any(c.isspace() for c in text) or '"' in text or "'" in text
            or '\\' in text or text.startswith('#'))


def _quote(text: str) -> str:
    return '"' + text.replace('\\', '\\\\').replace('"', '\\"') + '"'


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return _quote(str(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if _needs_quotes(value) or ';' in value or FLOAT_RE.match(value):
        return _quote(value)
    return value


def format_arg(text: str) -> str:
    return _quote(text) if _needs_quotes(text) else text


def format_plan(plan: PlanFile) -> str:
    """Render a PlanFile back to plan-file text that parses to an equal AST."""
    out = []
    for decl in plan.parameters:
        kind = decl.kind
        if isinstance(kind, Single):
            body = f"single {format_value(kind.value)}"
        elif isinstance(kind, Range):
            body = f"range {format_value(kind.lo)} {format_value(kind.hi)} {format_value(kind.step)}"
        elif isinstance(kind, ValueSet):
            body = 'set ' + ' '.join(format_value(v) for v in kind.values)
        else:
            body = f"gridfile {format_value(kind.pattern)}"
        out.append(f"parameter {decl.name} {body};")

    for task in plan.tasks:
        if out:
            out.append('')
        out.append(f"task {task.name}")
        for command in task.commands:
            out.append('  ' + ' '.join([command.keyword] + [format_arg(s) for s in command.strings()]))
        out.append('endtask')

    return '\n'.join(out) + '\n'
