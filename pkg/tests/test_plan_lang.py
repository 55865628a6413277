"""
Tests for the plan language parser, validator and pretty-printer.
"""

import pytest
import numpy as np
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.errors import PlanError
from src.plan_lang.nodes import (
    Copy, Diagnostic, Execute, Gridfile, MCopy, ParameterDecl, PlanFile, Range,
    Single, Substitute, TaskDecl, ValueSet,
)
from src.plan_lang.parser import format_plan, load_plan, parse_plan
from src.plan_lang.checks import validate_plan
from builders import BELLE_PLAN, read_belle_plan_text


def expected_belle_ast():
    """The belle analysis plan, built by hand."""
    nodestart = tuple(Copy(src, 'node:' + dst) for src, dst in [
        ('ddk_ana.so', 'ddks_ana.so'),
        ('libanalyser.so', 'libanalyser.so'),
        ('libbase_analyser.so', 'libbase_analyser.so'),
        ('libreconstructor.so', 'libreconstructor.so'),
        ('libtools.so', 'libtools.so'),
        ('event.conf', 'event.conf'),
        ('recon.conf', 'recon.conf'),
        ('particle.conf', 'particle.conf'),
    ])
    main = (
        Execute('./runme.ddksana', ('$INFILE', '$jobname'), on_node=True),
        Copy('node:runme.log', 'runme.log.$jobname'),
        Copy('node:ddks-$jobname.hbook', 'ddk-$jobname.hbook'),
    )
    return PlanFile(
        parameters=(ParameterDecl('INFILE', Gridfile('lfn:/users/winton/fsimddks/fsimdata*.mdst')),),
        tasks=(TaskDecl('nodestart', nodestart), TaskDecl('main', main)),
    )


MALFORMED_PLANS = [
    "parameter X Set 1 2 2;\ntask main\nendtask\n",
    "parameter X range 1 10;\ntask main\nendtask\n",
    "parameter X range 10 1 1;\ntask main\nendtask\n",
    "parameter X range 1 10 0;\ntask main\nendtask\n",
    "parameter X single 5\ntask main\nendtask\n",
    "parameter X color red;\ntask main\nendtask\n",
    "parameter X set;\ntask main\nendtask\n",
    "parameter X gridfile /users/winton/*.mdst;\ntask main\nendtask\n",
    "task main\n  copy onlyone\nendtask\n",
    "task main\n  execute\nendtask\n",
    "task main\n  frobnicate x y\nendtask\n",
    "task main\n  copy a node:a\n",
    "endtask\n",
    "task main\nendtask\ntask main\nendtask\n",
    "task cleanup\nendtask\ntask main\nendtask\n",
    "task nodestart\n  copy a node:a\nendtask\n",
    "task main\n  execute ./run $MISSING\nendtask\n",
    "parameter jobname single 1;\ntask main\nendtask\n",
    'task main\n  copy "unterminated node:b\nendtask\n',
    "task main\n  mcopy node:out.dat results\nendtask\n",
]


def test_belle_plan_parses_to_expected_ast():
    """The belle analysis plan parses to the hand-built AST."""
    plan = parse_plan(read_belle_plan_text())

    assert isinstance(plan, PlanFile), f"Plan should parse, got diagnostics: {plan}"
    assert plan == expected_belle_ast(), "Parsed AST should match the hand-built one"
    assert len(plan.task('nodestart').commands) == 8, "nodestart should hold 8 copies"
    assert [type(c) for c in plan.task('main').commands] == [Execute, Copy, Copy]


def test_belle_plan_validates_clean():
    """The belle analysis plan has no semantic problems."""
    plan = parse_plan(read_belle_plan_text(), validate=False)
    assert validate_plan(plan) == [], "Belle plan should validate without diagnostics"


def test_load_plan_reads_file():
    """load_plan returns the AST for a valid file."""
    plan = load_plan(BELLE_PLAN)
    assert plan.parameter('INFILE').kind == Gridfile('lfn:/users/winton/fsimddks/fsimdata*.mdst')


def test_minimal_plan():
    """A main task with no parameters is a complete plan."""
    plan = parse_plan("task main\nendtask\n")

    assert plan == PlanFile(parameters=(), tasks=(TaskDecl('main', ()),))


def test_duplicate_set_value_is_reported():
    """A repeated set value is an error on its declaration line."""
    result = parse_plan("parameter X Set 1 2 2;\ntask main\nendtask\n")

    assert isinstance(result, list), "Duplicate set value should be rejected"
    assert any('duplicate set value' in d.message and d.line == 1 for d in result)


def test_unresolved_reference_names_the_variable():
    """An undeclared $NAME yields exactly one error naming it."""
    plan = parse_plan("task main\n  execute ./run $MISSING $MISSING\nendtask\n", validate=False)
    problems = validate_plan(plan)

    assert len(problems) == 1, f"Expected one diagnostic, got {problems}"
    assert 'MISSING' in problems[0].message
    assert problems[0].line == 2


def test_duplicate_parameter_name():
    """Two parameters called INFILE give one duplicate-name error."""
    source = ("parameter INFILE single a;\nparameter INFILE single b;\n"
              "task main\n  execute ./run $INFILE\nendtask\n")
    problems = validate_plan(parse_plan(source, validate=False))

    assert len(problems) == 1, f"Expected one diagnostic, got {problems}"
    assert 'duplicate parameter' in problems[0].message
    assert problems[0].line == 2


@pytest.mark.parametrize('source', MALFORMED_PLANS)
def test_malformed_plans_yield_line_numbered_errors(source):
    """Every malformed plan is rejected with at least one located error."""
    result = parse_plan(source)

    assert isinstance(result, list), f"Plan should be rejected:\n{source}"
    errors = [d for d in result if d.is_error]
    assert errors, "At least one error diagnostic expected"
    n_lines = source.count('\n') + 1
    for d in errors:
        assert 1 <= d.line <= n_lines, f"Diagnostic line {d.line} out of range: {d}"


def test_parser_collects_every_error():
    """Errors on separate lines are all reported in one pass."""
    source = "parameter A single;\nparameter B range 1 2;\nbogus\ntask main\nendtask\n"
    result = parse_plan(source)

    assert {d.line for d in result} == {1, 2, 3}


def test_load_plan_raises_plan_error(tmp_path):
    """load_plan turns diagnostics into a PlanError."""
    path = tmp_path / 'bad.plan'
    path.write_text("task main\n")

    with pytest.raises(PlanError) as excinfo:
        load_plan(str(path))
    assert excinfo.value.diagnostics, "PlanError should carry the diagnostics"
    assert all(isinstance(d, Diagnostic) for d in excinfo.value.diagnostics)


def test_keywords_are_case_insensitive():
    """PARAMETER, Task and EndTask parse like their lower-case forms."""
    upper = parse_plan("PARAMETER N RANGE 1 3 1;\nTask main\n  EXECUTE ./run $N\nEndTask\n")
    lower = parse_plan("parameter N range 1 3 1;\ntask main\n  execute ./run $N\nendtask\n")
    assert upper == lower


def test_comments_and_quoted_arguments():
    """Comments are dropped and quoted arguments keep their spaces."""
    plan = parse_plan('# header\ntask main  # trailing\n  execute ./run "two words"\nendtask\n')

    assert plan.task('main').commands == (Execute('./run', ('two words',)),)


def test_round_trip_belle_plan():
    """Pretty-printing and re-parsing gives an equal AST."""
    plan = parse_plan(read_belle_plan_text())
    assert parse_plan(format_plan(plan)) == plan


def test_round_trip_every_construct():
    """All parameter kinds and commands survive a round trip."""
    plan = PlanFile(
        parameters=(
            ParameterDecl('A', Single('hello world')),
            ParameterDecl('B', Range(0.5, 2.0, 0.5)),
            ParameterDecl('C', ValueSet((1, 'x', 2.5, '3'))),
            ParameterDecl('D', Gridfile('lfn:/data/run?/*.dat')),
        ),
        tasks=(
            TaskDecl('nodestart', (MCopy('lib/*.so', 'node:.'), Substitute('in.tmpl', 'node:in.$A'))),
            TaskDecl('main', (Execute('./run', ('$A', '$B', '$C', '$D')), Copy('node:out', 'out.$jobname'))),
        ),
    )
    assert parse_plan(format_plan(plan)) == plan


def random_plan(rng):
    """Random valid plan over every construct."""
    parameters = []
    has_gridfile = False
    for i in range(int(rng.integers(0, 4))):
        choice = int(rng.integers(0, 3 if has_gridfile else 4))
        if choice == 0:
            kind = Single(int(rng.integers(-5, 50)))
        elif choice == 1:
            lo = int(rng.integers(0, 5))
            kind = Range(lo, lo + int(rng.integers(0, 5)), int(rng.integers(1, 3)))
        elif choice == 2:
            kind = ValueSet(tuple(f"v{j}" for j in range(int(rng.integers(1, 4)))))
        else:
            kind = Gridfile(f"lfn:/d{i}/*.dat")
            has_gridfile = True
        parameters.append(ParameterDecl(f"P{i}", kind))
    refs = tuple('$' + p.name for p in parameters)
    main = [Execute('./prog', refs + ('$jobname',), on_node=bool(rng.integers(0, 2)))]
    if rng.integers(0, 2):
        main.append(Copy('node:out.$jobname', 'results/out.$jobname'))
    tasks = [TaskDecl('main', tuple(main))]
    if rng.integers(0, 2):
        tasks.insert(0, TaskDecl('nodestart', (Copy('conf', 'node:conf'),)))
    return PlanFile(parameters=tuple(parameters), tasks=tuple(tasks))


def test_round_trip_random_plans():
    """Random valid plans round-trip and validate clean."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        plan = random_plan(rng)
        text = format_plan(plan)
        reparsed = parse_plan(text)
        assert reparsed == plan, f"Round trip failed for:\n{text}"


def test_fuzz_never_raises():
    """Arbitrary text yields an AST or diagnostics, never an exception."""
    rng = np.random.default_rng(11)
    alphabet = list("abcXYZ019 ;#$\"'\\\n\t:*?") + [
        'parameter ', 'task ', 'endtask', 'main', 'nodestart', 'copy ', 'execute ', 'set ', 'range ',
    ]
    for _ in range(500):
        pieces = rng.choice(alphabet, size=int(rng.integers(0, 40)))
        source = ''.join(pieces)
        result = parse_plan(source)
        assert isinstance(result, (PlanFile, list)), f"Unexpected result for {source!r}"
        if isinstance(result, list):
            assert all(d.line >= 1 for d in result)


def test_bytes_input_is_accepted():
    """Plan sources may arrive as bytes."""
    plan = parse_plan(b"task main\nendtask\n")
    assert isinstance(plan, PlanFile)


@pytest.mark.parametrize('declaration', [
    'parameter N single 1e400;',
    'parameter N range 0 1e400 1;',
    'parameter N set 1 -2e999;',
])
def test_overflowing_numbers_are_rejected(declaration):
    """Numbers too large for a float are located errors, not infinities."""
    result = parse_plan(f"task main\nendtask\n{declaration}\n")

    assert isinstance(result, list), f"{declaration!r} should be rejected"
    assert [d.line for d in result] == [3]
    assert 'out of range' in result[0].message


def test_quoted_large_number_stays_a_string():
    """A quoted numeric literal is a string and prints back quoted."""
    plan = parse_plan('parameter N single "1e400";\ntask main\n  execute ./run $N\nendtask\n')

    assert plan.parameter('N').kind == Single('1e400')
    assert parse_plan(format_plan(plan)) == plan


def test_non_finite_values_in_a_built_plan_are_invalid():
    """Hand-built ASTs carrying inf or nan fail validation."""
    plan = PlanFile(
        parameters=(ParameterDecl('A', Single(float('inf')), line=1),
                    ParameterDecl('B', Range(0, float('nan'), 1), line=2)),
        tasks=(TaskDecl('main', ()),),
    )
    problems = validate_plan(plan)

    assert [d.line for d in problems] == [1, 2]
    assert all('non-finite' in d.message for d in problems)


def test_second_gridfile_parameter_is_rejected():
    """Only one gridfile parameter per plan; the extra one is located."""
    source = ("parameter F gridfile lfn:/d/*.dat;\nparameter G gridfile lfn:/d/a.*;\n"
              "task main\n  execute ./run $F $G\nendtask\n")
    result = parse_plan(source)

    assert isinstance(result, list), "Two gridfile parameters should be rejected"
    assert [d.line for d in result] == [2]
    assert 'at most one gridfile' in result[0].message


def test_double_star_gridfile_pattern_is_rejected():
    result = parse_plan("parameter F gridfile lfn:/users/**/x.mdst;\ntask main\nendtask\n")

    assert isinstance(result, list)
    assert any("'**'" in d.message and d.line == 1 for d in result)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
