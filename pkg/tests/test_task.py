"""Task program parsing and static unrolling units."""

import pytest

from retrace.task import (
    ActionCall,
    Assign,
    PromptExpr,
    TaskError,
    eval_arg,
    parse_task,
)


def names(program):
    return [
        step.stmt.name if isinstance(step.stmt, ActionCall) else f"={step.stmt.name}"
        for step in program.steps
    ]


def test_packaged_step_counts(tasks):
    assert {k: len(v) for k, v in tasks.items()} == {
        "pd2": 7,
        "pd3": 10,
        "el": 8,
        "es": 5,
        "sc5": 14,
    }


def test_indices_are_one_based_and_dense(tasks):
    for program in tasks.values():
        assert [s.index for s in program.steps] == list(
            range(1, len(program.steps) + 1)
        )


def test_loop_unrolls_with_bindings():
    p = parse_task('for i in range(3):\n    grab(f"box {i}")\n')
    assert names(p) == ["grab"] * 3
    assert [s.loop_env for s in p.steps] == [(("i", 0),), (("i", 1),), (("i", 2),)]
    args = [eval_arg(s.stmt.args[0], {}, s.loop_env) for s in p.steps]
    assert args == ["box 0", "box 1", "box 2"]


def test_nested_loops():
    p = parse_task(
        "for i in range(2):\n"
        "    for j in range(2):\n"
        '        mark(f"{i}-{j}")\n'
    )
    args = [eval_arg(s.stmt.args[0], {}, s.loop_env) for s in p.steps]
    assert args == ["0-0", "0-1", "1-0", "1-1"]


def test_variable_loop_bound():
    p = parse_task("n = 2\nfor i in range(n):\n    ping()\n")
    assert names(p) == ["=n", "ping", "ping"]


def test_prompt_assignment_is_a_step():
    p = parse_task('where = prompt("Destination?")\ngoto(where)\n')
    assert isinstance(p.steps[0].stmt, Assign)
    assert isinstance(p.steps[0].stmt.expr, PromptExpr)
    assert names(p) == ["=where", "goto"]


def test_comments_and_blank_lines_ignored():
    p = parse_task("# heading\n\nwave()\n   # not a step\n")
    assert names(p) == ["wave"]


def test_fstring_mixes_variables_and_loop_vars():
    p = parse_task('x = "kit"\nfor i in range(1):\n    pack(f"{x} {i}")\n')
    step = p.steps[1]
    assert eval_arg(step.stmt.args[0], {"x": "kit"}, step.loop_env) == "kit 0"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "empty task"),
        ('  goto("x")', "must not be indented"),
        ("for i in range(2):\n", "no body"),
        ("for i in range(2):\nping()\n", "must be indented"),
        ("for i in items:\n    ping()\n", "range"),
        ('goto("a") extra\n', "trailing tokens"),
        ("for i in range(x):\n    ping()\n", "not a known integer"),
        ("\tping()\n", "spaces, not tabs"),
        ("2 + 2\n", "unexpected character"),
        ("7\n", "expected an assignment"),
    ],
)
def test_parse_rejections(text, fragment):
    with pytest.raises(TaskError) as info:
        parse_task(text)
    assert fragment in str(info.value)


def test_eval_arg_unknown_variable():
    p = parse_task("goto(spot)\n")
    with pytest.raises(TaskError, match="spot"):
        eval_arg(p.steps[0].stmt.args[0], {}, ())
