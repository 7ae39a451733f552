"""Shared fixtures: packaged data handles and a CLI-equivalent runner."""

import pytest
from importlib import resources

from retrace import cli
from retrace.model import load_model
from retrace.sim import load_scenario
from retrace.task import load_task

DATA = resources.files("retrace") / "data"


@pytest.fixture(scope="session")
def robot():
    return load_model(DATA / "models" / "robot.rmodel")


@pytest.fixture(scope="session")
def tasks():
    return {
        name: load_task(DATA / "tasks" / f"{name}.task")
        for name in ("pd2", "pd3", "el", "es", "sc5")
    }


@pytest.fixture(scope="session")
def scenario():
    def load(name):
        return load_scenario(DATA / "scenarios" / f"{name}.scenario")

    return load


def exec_cli(argv):
    """Run the CLI in-process and return its exit code."""
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    return info.value.code


@pytest.fixture
def run_cli():
    return exec_cli


@pytest.fixture
def run_scenario(tmp_path):
    """Execute a packaged scenario, returning (exit code, log bytes)."""

    def run(name, *extra):
        log = tmp_path / f"{name}.log"
        code = exec_cli(["run", "--scenario", name, "--log", str(log), *extra])
        return code, log.read_bytes()

    return run
