"""Minimal perforated-trace recovery units and oracle cross-checks."""

import pytest

import gen
import retrace.runtime as runtime_mod
from retrace.model import LiteralSetWorld, ground_action, parse_literal, parse_model
from retrace.net import TraceNet
from retrace.recover import (
    brute_force_trace,
    plan_recovery,
    search_min_trace,
)
from retrace.runtime import Session
from retrace.sim import make_env

CHAIN = """
(:model chain
  (:params (f 0.1))
  (:action seed
    (:precondition (and))
    (:postcondition (p0))
    (:update (:var ?s f) (:set (p0) ?s)))
  (:action build
    (:precondition (p0))
    (:postcondition (p1))
    (:update (:var ?s f) (:set (p1) ?s)))
  (:action topple
    (:precondition (p1))
    (:postcondition (not (p0)))
    (:update (:var ?s f) (:set (p0) (and (p0) (not ?s)))))
  (:action stubborn
    (:precondition (and))
    (:postcondition (not (p0)))
    (:update (:var ?s f) (:set (p0) (or (p0) ?s))))
  (:action wantsq
    (:precondition (q9))
    (:postcondition (q9))
    (:update (:var ?s f) (:set (q9) (q9)))))
"""


def lit(text):
    return parse_literal(text)


@pytest.fixture(scope="module")
def chain():
    model = parse_model(CHAIN)
    w = LiteralSetWorld(frozenset({lit("p0()"), lit("p1()"), lit("q9()")}))

    def g(name):
        return ground_action(model, name, (), w)

    return g


def test_dependency_chain_from_empty_world(chain):
    window = (chain("seed"), chain("build"), chain("topple"))
    assert search_min_trace(window, frozenset()) == (3, 0b111)


def test_satisfied_prefix_is_skipped(chain):
    window = (chain("seed"), chain("build"), chain("topple"))
    start = frozenset({lit("p0()"), lit("p1()")})
    assert search_min_trace(window, start) == (1, 0b100)


def test_tie_breaks_toward_later_actions(chain):
    # either seed alone enables the detection; the later one wins the tie
    window = (chain("seed"), chain("seed"), chain("build"))
    assert search_min_trace(window, frozenset()) == (2, 0b110)


def test_unsatisfiable_precondition_gives_none(chain):
    window = (chain("seed"), chain("wantsq"))
    assert search_min_trace(window, frozenset()) is None
    assert brute_force_trace(window, frozenset()) is None


def test_detection_postcondition_must_hold(chain):
    # the attempt re-runs fine but its declared outcome cannot come true
    window = (chain("stubborn"),)
    assert search_min_trace(window, frozenset({lit("p0()")})) is None
    assert brute_force_trace(window, frozenset({lit("p0()")})) is None


def test_detection_always_included(chain):
    window = (chain("seed"), chain("build"), chain("topple"))
    start = frozenset({lit("p0()"), lit("p1()")})
    size, mask = search_min_trace(window, start)
    assert mask & (1 << (len(window) - 1))


def test_plan_recovery_maps_mask_to_positions(chain):
    net = TraceNet()
    net.extend(chain("seed"))
    net.extend(chain("build"))
    plan = plan_recovery(net, chain("topple"), frozenset({lit("p0()"), lit("p1()")}))
    assert plan.include == (3,)
    assert plan.length == 1
    assert plan.actions[0].name == "topple"


def test_plan_recovery_none_when_unrepairable(chain):
    net = TraceNet()
    net.extend(chain("seed"))
    assert plan_recovery(net, chain("wantsq"), frozenset()) is None


def test_oracle_respects_force_pure(chain):
    window = (chain("seed"), chain("build"), chain("topple"))
    for start in (frozenset(), frozenset({lit("p0()")})):
        assert brute_force_trace(window, start) == brute_force_trace(
            window, start, force_pure=True
        )


def test_random_windows_match_enumeration():
    feasible = 0
    for seed in range(30):
        window, start = gen.random_window(seed, max_history=9)
        got = search_min_trace(window, start)
        assert got == brute_force_trace(window, start), seed
        assert got == brute_force_trace(window, start, force_pure=True), seed
        if got is not None:
            feasible += 1
            assert got[1] & (1 << (len(window) - 1))
    assert 0 < feasible < 30


def test_random_dynamic_windows_match_enumeration():
    feasible = 0
    for seed in range(20):
        window, start = gen.random_window(seed, max_history=8, dynamic=True)
        got = search_min_trace(window, start)
        assert got == brute_force_trace(window, start), seed
        if got is not None:
            feasible += 1
    assert feasible > 0


@pytest.fixture
def recovery_spy(monkeypatch):
    """Record every (window, start world) the runtime plans over."""
    calls = []
    real = runtime_mod.plan_recovery

    def spy(net, detection, world):
        calls.append((tuple(net.actions) + (detection,), frozenset(world)))
        return real(net, detection, world)

    monkeypatch.setattr(runtime_mod, "plan_recovery", spy)
    return calls


@pytest.mark.parametrize(
    "name",
    [
        "pd2_missing_b",
        "pd2_missing_a",
        "pd3_missing_c",
        "el_wrong_floor",
        "el_not_called",
        "sc5_sig1_no_thesis",
        "sc5_member5_kept",
        "es_restart",
        "es_lost",
    ],
)
def test_live_scenario_plans_are_optimal(robot, tasks, scenario, recovery_spy, name):
    spec = scenario(name)
    session = Session(
        robot,
        tasks[spec.task],
        make_env(spec),
        labels=(robot.name, spec.task, spec.name),
        alpha=spec.alpha,
        retry_limit=spec.retry_limit,
    )
    session.run()
    assert recovery_spy
    for window, world in recovery_spy:
        assert search_min_trace(window, world) == brute_force_trace(window, world)


def test_fallback_mask_kernel_matches_active_backend(monkeypatch):
    """The NumPy mask kernel and the compiled one pick identical traces."""
    from retrace import recover as recover_mod
    from retrace._core import pure

    for seed in range(12):
        window, start = gen.random_window(seed, max_history=12)
        want = recover_mod.brute_force_trace(window, start)
        with monkeypatch.context() as m:
            m.setattr(recover_mod, "_core", pure)
            assert recover_mod.brute_force_trace(window, start) == want
