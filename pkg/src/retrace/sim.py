"""Simulated environment ports and scenario files.

A scenario is a JSON document naming the model and task to run, failure
parameter overrides, the retry limit, the initial true world, scripted
operator answers, and an environment mode.  The scripted mode replays an
exact directive list: each dispatched action is matched against directives
by action name, argument prefix, and occurrence number (occurrences are
counted per exact name and argument signature); the first matching
directive decides the behavior and actions with no match comply.

Behaviors: ``comply`` applies the action's most-likely effect to the true
world (regrounding against the truth, so world-dependent bindings follow
reality); ``silent-fail`` confirms the dispatch but changes nothing;
``wrong-action`` confirms it and applies explicit literal edits instead of
the intended effect; ``cannot`` and ``timeout`` reject the dispatch, the
former with a failure label.  The stochastic mode instead samples every
action variable from its Bernoulli prior and applies the sampled effect,
rejecting the dispatch when the precondition does not hold in the true
world.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .model import (
    GroundingError,
    Literal,
    LiteralSetWorld,
    ml_apply,
    parse_literal,
    reground,
)
from .runtime import EnvError, Outcome


class ScenarioError(Exception):
    """Malformed scenario file."""


def apply_most_likely(action, truth):
    """Reground against the true world and apply the most-likely effect."""
    try:
        ground = reground(action, LiteralSetWorld(frozenset(truth)))
    except GroundingError as exc:
        raise EnvError(f"true world cannot ground {action.render()}: {exc}")
    return set(ml_apply(ground, truth))


_BEHAVIORS = ("comply", "silent-fail", "wrong-action", "cannot", "timeout")


@dataclass(frozen=True)
class Directive:
    action: str
    args: tuple | None = None
    occurrence: int | None = None
    behavior: str = "comply"
    label: str | None = None
    add: tuple = ()
    delete: tuple = ()


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    model: str
    task: str
    mode: str = "scripted"
    retry_limit: int = 3
    seed: int = 0
    alpha: dict = field(default_factory=dict)
    init: tuple = ()
    answers: tuple = ()
    directives: tuple = ()


def parse_scenario(data, source="<scenario>"):
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: scenario must be a JSON object")
    known = {
        "name",
        "model",
        "task",
        "mode",
        "retry_limit",
        "seed",
        "alpha",
        "init",
        "answers",
        "directives",
    }
    for key in data:
        if key not in known:
            raise ScenarioError(f"{source}: unknown key {key!r}")
    for key in ("name", "model", "task"):
        if not isinstance(data.get(key), str):
            raise ScenarioError(f"{source}: {key!r} must be a string")
    mode = data.get("mode", "scripted")
    if mode not in ("scripted", "stochastic"):
        raise ScenarioError(f"{source}: mode must be scripted or stochastic")
    retry_limit = data.get("retry_limit", 3)
    if not isinstance(retry_limit, int) or retry_limit < 0:
        raise ScenarioError(f"{source}: retry_limit must be a non-negative integer")
    alpha = data.get("alpha", {})
    if not isinstance(alpha, dict):
        raise ScenarioError(f"{source}: alpha must be an object")
    for k, v in alpha.items():
        if not isinstance(v, (int, float)) or not 0.0 <= float(v) <= 1.0:
            raise ScenarioError(f"{source}: alpha {k!r} must be a number in [0, 1]")
    try:
        init = tuple(parse_literal(s) for s in data.get("init", ()))
    except Exception as exc:
        raise ScenarioError(f"{source}: bad init literal: {exc}") from None
    answers = tuple(str(a) for a in data.get("answers", ()))
    directives = []
    for k, entry in enumerate(data.get("directives", ())):
        where = f"{source}: directives[{k}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where}: must be an object")
        behavior = entry.get("behavior", "comply")
        if behavior not in _BEHAVIORS:
            raise ScenarioError(f"{where}: unknown behavior {behavior!r}")
        if "action" not in entry:
            raise ScenarioError(f"{where}: missing action name")
        occurrence = entry.get("occurrence")
        if occurrence is not None and (not isinstance(occurrence, int) or occurrence < 1):
            raise ScenarioError(f"{where}: occurrence must be a positive integer")
        args = entry.get("args")
        if args is not None:
            args = tuple(str(a) for a in args)
        if behavior == "cannot" and not isinstance(entry.get("label"), str):
            raise ScenarioError(f"{where}: cannot needs a label")
        try:
            add = tuple(parse_literal(s) for s in entry.get("add", ()))
            delete = tuple(parse_literal(s) for s in entry.get("delete", ()))
        except Exception as exc:
            raise ScenarioError(f"{where}: bad literal: {exc}") from None
        if behavior != "wrong-action" and (add or delete):
            raise ScenarioError(f"{where}: add/delete only apply to wrong-action")
        directives.append(
            Directive(
                action=str(entry["action"]),
                args=args,
                occurrence=occurrence,
                behavior=behavior,
                label=entry.get("label"),
                add=add,
                delete=delete,
            )
        )
    return ScenarioSpec(
        name=data["name"],
        model=data["model"],
        task=data["task"],
        mode=mode,
        retry_limit=retry_limit,
        seed=int(data.get("seed", 0)),
        alpha={str(k): float(v) for k, v in alpha.items()},
        init=init,
        answers=answers,
        directives=tuple(directives),
    )


def load_scenario(path):
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from None
    return parse_scenario(data, source=str(path))


class ScriptedEnv:
    """Environment port that replays a scenario's directive script."""

    def __init__(self, spec):
        self.spec = spec
        self.truth = set(spec.init)
        self.counts = {}
        self._answers = list(spec.answers)
        self._next_answer = 0

    def _match(self, action, count):
        for d in self.spec.directives:
            if d.action != action.name:
                continue
            if d.args is not None and action.args[: len(d.args)] != d.args:
                continue
            if d.occurrence is not None and d.occurrence != count:
                continue
            return d
        return None

    def dispatch(self, action):
        key = (action.name, action.args)
        self.counts[key] = self.counts.get(key, 0) + 1
        d = self._match(action, self.counts[key])
        behavior = d.behavior if d is not None else "comply"
        if behavior == "comply":
            self.truth = apply_most_likely(action, self.truth)
            return Outcome("ok")
        if behavior == "silent-fail":
            return Outcome("ok")
        if behavior == "wrong-action":
            self.truth |= set(d.add)
            self.truth -= set(d.delete)
            return Outcome("ok")
        if behavior == "cannot":
            return Outcome("cannot", d.label)
        return Outcome("timeout", d.label)

    def answer(self, question):
        if self._next_answer >= len(self._answers):
            raise EnvError(f"no scripted answer for prompt: {question}")
        value = self._answers[self._next_answer]
        self._next_answer += 1
        return value


class StochasticEnv:
    """Environment port that samples every action variable from its prior."""

    def __init__(self, spec):
        self.spec = spec
        self.truth = set(spec.init)
        self.rng = random.Random(spec.seed)
        self._answers = list(spec.answers)
        self._next_answer = 0

    def dispatch(self, action):
        try:
            ground = reground(action, LiteralSetWorld(frozenset(self.truth)))
        except GroundingError:
            labels = action.labels
            return Outcome("cannot", labels[0] if labels else None)
        if not all(
            (c.literal in self.truth) == c.positive for c in ground.precondition
        ):
            labels = ground.labels
            return Outcome("cannot", labels[0] if labels else None)
        sampled = {v.name: self.rng.random() < 1.0 - v.alpha for v in ground.variables}
        self.truth = set(ml_apply(ground, self.truth, sampled))
        return Outcome("ok")

    def answer(self, question):
        if self._next_answer >= len(self._answers):
            raise EnvError(f"no scripted answer for prompt: {question}")
        value = self._answers[self._next_answer]
        self._next_answer += 1
        return value


def make_env(spec):
    return ScriptedEnv(spec) if spec.mode == "scripted" else StochasticEnv(spec)
