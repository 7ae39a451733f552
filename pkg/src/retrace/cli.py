"""Command line interface.

``retrace run`` executes a scenario and streams the run log to stdout or a
file, exiting with the session's code (0 done, 2 unrecoverable, 3 retry
limit, 4 configuration error).  ``retrace sweep`` grids two failure
parameters over one scenario and writes a CSV of outcome classes.
``retrace serve`` starts the operator websocket server.  Models, tasks, and
scenarios resolve first as filesystem paths and then against the packaged
data directory by bare name.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from importlib import resources
from pathlib import Path

from .model import ModelError, load_model
from .runtime import EXIT_CONFIG, LogWriter, Session, tee
from .sim import ScenarioError, load_scenario, make_env
from .sweep import grid, run_sweep, write_csv
from .task import TaskError, load_task


class ResolveError(Exception):
    pass


def _data_dir():
    return resources.files("retrace") / "data"


def resolve(kind, name, suffix):
    """Find a model/task/scenario by path, or by name in packaged data."""
    p = Path(name)
    if p.exists():
        return p
    candidate = _data_dir() / kind / f"{name}{suffix}"
    if candidate.is_file():
        return candidate
    raise ResolveError(f"no {kind[:-1]} named {name!r} (looked at {p} and packaged data)")


def load_run_parts(args):
    spec = load_scenario(resolve("scenarios", args.scenario, ".scenario"))
    overrides = {
        field: getattr(args, field)
        for field in ("retry_limit", "mode", "seed")
        if getattr(args, field, None) is not None
    }
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    model_src = args.model or spec.model
    task_src = args.task or spec.task
    model = load_model(resolve("models", model_src, ".rmodel"))
    program = load_task(resolve("tasks", task_src, ".task"))
    return spec, model, program, Path(task_src).stem


def cmd_run(args):
    try:
        spec, model, program, task_label = load_run_parts(args)
    except (ResolveError, ModelError, TaskError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    env = make_env(spec)
    if args.log and args.log != "-":
        stream = open(args.log, "w", encoding="utf-8")
    else:
        stream = sys.stdout
    session = Session(
        model,
        program,
        env,
        labels=(model.name, task_label, spec.name),
        alpha=spec.alpha,
        retry_limit=spec.retry_limit,
        emit=tee(LogWriter(stream)),
    )
    try:
        code = session.run()
    finally:
        if stream is not sys.stdout:
            stream.close()
    if args.dump_belief:
        print(session.belief.dump())
    if args.dump_net:
        print(session.net.dump())
    if args.dump_dot:
        print(session.net.to_dot(), end="")
    return code


def cmd_sweep(args):
    try:
        spec, model, program, _ = load_run_parts(args)
    except (ResolveError, ModelError, TaskError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    values = grid(args.lo, args.hi, args.n)
    try:
        rows = run_sweep(model, program, spec, args.param_a, args.param_b, values, values)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            write_csv(rows, f)
    else:
        write_csv(rows, sys.stdout)
    return 0


def cmd_serve(args):
    from .server import serve

    try:
        model = load_model(resolve("models", args.model, ".rmodel"))
        program = load_task(resolve("tasks", args.task, ".task"))
    except (ResolveError, ModelError, TaskError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return serve(
        model,
        program,
        labels=(model.name, Path(args.task).stem, "interactive"),
        retry_limit=args.retry_limit,
        host=args.host,
        port=args.port,
        once=args.once,
        static=args.static,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="retrace",
        description="fault-tolerant runtime for sequential robot task programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario")
    p_run.add_argument("--scenario", required=True, help="scenario name or path")
    p_run.add_argument("--model", help="override the scenario's model (name or path)")
    p_run.add_argument("--task", help="override the scenario's task (name or path)")
    p_run.add_argument("--retry-limit", type=int, dest="retry_limit")
    p_run.add_argument("--mode", choices=("scripted", "stochastic"))
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--log", default="-", help="log file, - for stdout")
    p_run.add_argument("--dump-belief", action="store_true", help="print the final belief")
    p_run.add_argument("--dump-net", action="store_true", help="print the network nodes")
    p_run.add_argument("--dump-dot", action="store_true", help="print the network as DOT")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid two failure parameters")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--model")
    p_sweep.add_argument("--task")
    p_sweep.add_argument("--param-a", required=True, dest="param_a")
    p_sweep.add_argument("--param-b", required=True, dest="param_b")
    p_sweep.add_argument("--n", type=int, default=10)
    p_sweep.add_argument("--lo", type=float, default=0.01)
    p_sweep.add_argument("--hi", type=float, default=0.49)
    p_sweep.add_argument("--out", default="-", help="CSV file, - for stdout")
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="start the operator websocket server")
    p_serve.add_argument("--model", default="robot", help="model name or path")
    p_serve.add_argument("--task", default="pd2", help="task name or path")
    p_serve.add_argument("--retry-limit", type=int, default=3, dest="retry_limit")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--once", action="store_true", help="serve one session, then exit with its code")
    p_serve.add_argument("--static", help="directory of console assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    raise SystemExit(args.func(args))


if __name__ == "__main__":
    main()
