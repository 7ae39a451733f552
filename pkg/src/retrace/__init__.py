"""Fault-tolerant runtime for sequential robot task programs.

Two-tier structure: an expert-written action model gives each robot skill a
probabilistic belief-update program, while end users write plain sequential
task programs.  The runtime tracks a fully factored belief over world
literals, mirrors execution into a time-indexed Bayesian network, diagnoses
reported failures by exact posterior inference, and repairs the plan by
replaying a minimal subsequence of past actions.
"""

__version__ = "0.1.0"

from .belief import BeliefState
from .model import (
    GroundAction,
    GroundingError,
    Literal,
    ModelError,
    RobotModel,
    ground_action,
    load_model,
    parse_literal,
    parse_model,
)
from .task import TaskError, TaskProgram, parse_task

__all__ = [
    "BeliefState",
    "GroundAction",
    "GroundingError",
    "Literal",
    "ModelError",
    "RobotModel",
    "TaskError",
    "TaskProgram",
    "ground_action",
    "load_model",
    "parse_literal",
    "parse_model",
    "parse_task",
]
