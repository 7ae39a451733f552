"""Model parsing and grounding units against the packaged courier model."""

import pytest

from retrace.model import (
    GroundingError,
    Literal,
    LiteralSetWorld,
    ModelError,
    ground_action,
    ml_apply,
    parse_literal,
    parse_model,
    precondition_holds,
    reground,
)


def lit(text):
    return parse_literal(text)


def world(*lits):
    return LiteralSetWorld(frozenset(lit(s) for s in lits))


# -- parsing -------------------------------------------------------------


def test_packaged_model_inventory(robot):
    assert robot.name == "robot"
    assert len(robot.actions) == 13
    assert len(robot.params) == 15
    assert len(robot.objects) == 23
    assert set(robot.types) == {"location", "item", "floor", "mark"}
    assert sorted(robot.functions) == ["lobby", "signer"]
    assert robot.objects["package 1"] == "item"
    assert robot.objects_of("floor") == ["1", "2"]


def test_literal_parse_render_roundtrip():
    for text in ("have(package 1)", "called()", "at(floor 1 lobby)"):
        assert lit(text).render() == text
    assert lit("have(a, b)").args == ("a", "b")
    with pytest.raises(ModelError):
        parse_literal("no parens")
    with pytest.raises(ModelError):
        parse_literal("open(paren")


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("(:model m (:bogus))", "unknown section"),
        ("(:model m (:params (p 2.0)))", "outside [0, 1]"),
        ("(:model m (:params (p 0.1) (p 0.2)))", "duplicate parameter"),
        (
            "(:model m (:types t) (:objects (a a - t)))",
            "duplicate object",
        ),
        (
            "(:model m (:objects (a - ghost)))",
            "unknown type",
        ),
        (
            "(:model m (:action a (:precondition (and)) (:postcondition (p))"
            " (:update (:var ?s missing) (:set (p) ?s))))",
            "unknown parameter",
        ),
        (
            "(:model m (:params (f 0.1)) (:action a (:precondition (and))"
            " (:postcondition (p)) (:update (:var ?s f) (:set (p) ?s))"
            " (:failure (\"x\" ((q) false)))))",
            "not in precondition/postcondition",
        ),
        (
            "(:model m (:types t u) (:function f (t u) ((a b))))",
            "maps non-t",
        ),
    ],
)
def test_parse_rejections(text, fragment):
    with pytest.raises(ModelError) as info:
        parse_model(text)
    assert fragment in str(info.value)


def test_partial_function_allowed_but_guarded(robot):
    signer = robot.functions["signer"]
    assert signer.apply("office 2") == "signature 2"
    with pytest.raises(GroundingError):
        signer.apply("lab")


# -- grounding -----------------------------------------------------------


def test_omitted_argument_resolves_and_freezes(robot):
    g = ground_action(robot, "pickup", ("package 1",), world("at(mail room)"))
    assert g.render() == "pickup(package 1, mail room)"
    assert g.args == ("package 1", "mail room")
    # regrounding elsewhere keeps the frozen argument
    r = reground(g, world("at(office 3)"))
    assert r.args == ("package 1", "mail room")


def test_required_local_must_be_unique(robot):
    with pytest.raises(GroundingError, match="0 candidates"):
        ground_action(robot, "waitForElevatorStop", (), world("in-elevator()"))
    with pytest.raises(GroundingError, match="2 candidates"):
        ground_action(robot, "goto", ("mail room",), world("at(lab)", "at(entrance)"))


def test_optional_local_switches_update_branch(robot):
    unbound = ground_action(robot, "goto", ("lab",), world())
    assert unbound.locals == (("?from", None),)
    assert [st.target.render() for st in unbound.statements] == ["at(lab)"]
    bound = ground_action(robot, "goto", ("lab",), world("at(entrance)"))
    assert bound.locals == (("?from", "entrance"),)
    assert [st.target.render() for st in bound.statements] == [
        "at(entrance)",
        "at(lab)",
    ]


def test_quantified_update_expands_over_held_items(robot):
    held = world("at(office 1)", "have(package 0)", "have(package 1)")
    g = ground_action(robot, "give", ("package 1",), held)
    assert [st.target.render() for st in g.statements] == [
        "have(package 1)",
        "have(package 0)",
    ]
    assert [(v.name, v.alpha_param) for v in g.variables] == [
        ("?s", "give-fail"),
        ("?w", "give-wrong"),
    ]
    assert g.success_var.name == "?s"


def test_function_application_in_postcondition(robot):
    g = ground_action(
        robot, "getSignature", ("dissertation",),
        world("at(office 2)", "have(dissertation)"),
    )
    assert [c.render() for c in g.postcondition] == ["signed(signature 2)"]


def test_function_off_mapping_is_grounding_error(robot):
    with pytest.raises(GroundingError, match="not defined on"):
        ground_action(
            robot, "getSignature", ("dissertation",),
            world("at(lab)", "have(dissertation)"),
        )


def test_alpha_overrides_change_variable_priors(robot):
    g = ground_action(
        robot, "pickup", ("package 0",), world("at(mail room)"),
        {"pickup-fail": 0.42},
    )
    assert g.success_var.alpha == 0.42
    assert g.alpha_overrides() == {"pickup-fail": 0.42}


def test_failure_evidence_and_timeout_label(robot):
    g = ground_action(
        robot, "confirmArrival", (), world("following()", "at(ward 3)")
    )
    assert g.timeout_label == "no-confirmation"
    assert g.evidence_for("no-confirmation") == ((lit("following()"), False),)
    with pytest.raises(GroundingError, match="unknown failure label"):
        g.evidence_for("nope")
    assert g.labels == ("no-confirmation",)


def test_unknown_action_and_bad_arity(robot):
    with pytest.raises(GroundingError, match="unknown action"):
        ground_action(robot, "teleport", (), world())
    with pytest.raises(GroundingError):
        ground_action(robot, "pickup", ("package 0", "lab", "extra"), world())
    with pytest.raises(GroundingError):
        ground_action(robot, "goto", ("nowhere",), world())


# -- crisp application ----------------------------------------------------


def test_ml_apply_sequences_statements(robot):
    start = frozenset({lit("at(entrance)")})
    g = ground_action(robot, "goto", ("lab",), LiteralSetWorld(start))
    after = ml_apply(g, start)
    assert after == {lit("at(lab)")}
    # a failed drive keeps the old position and never arrives
    stayed = ml_apply(g, start, var_values={"?s": False})
    assert stayed == {lit("at(entrance)")}


def test_precondition_holds_is_polarity_aware(robot):
    have = frozenset({lit("at(office 0)"), lit("have(package 0)")})
    g = ground_action(robot, "give", ("package 0",), LiteralSetWorld(have))
    assert precondition_holds(g, have)
    assert not precondition_holds(g, frozenset({lit("at(office 0)")}))
