"""Failure-parameter sweeps.

Re-runs one scripted scenario over a grid of two failure parameters and
records how each run ends: ``no-failure`` (the script never faulted), ``RV``
(a postcondition failure was diagnosed, so re-running work recovers), ``IF``
(an unintended effect, unrecoverable by re-running), or ``PF`` (the failure
was predicted from the belief before dispatch).  Each row also carries the
diagnosed failure step and culprit when inference ran.  The grid sharpens
the phase structure of the diagnosis: which explanation wins depends only
on the parameter ratios, so the plane splits into contiguous regions.
"""

from __future__ import annotations

import csv

from .runtime import Session
from .sim import make_env

CSV_HEADER = ("alpha_a", "alpha_b", "class", "t_f", "culprit")


def grid(lo=0.01, hi=0.49, n=10):
    """n evenly spaced values from lo to hi inclusive."""
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + k * step for k in range(n)]


def classify_run(model, program, spec, alpha):
    """Run once with the given overrides; returns (class, t_f, culprit)."""
    env = make_env(spec)
    session = Session(
        model,
        program,
        env,
        labels=(model.name, spec.task, spec.name),
        alpha=alpha,
        retry_limit=spec.retry_limit,
    )
    session.run()
    cls = session.failure_class or "no-failure"
    diag = session.first_diagnosis
    if diag is None:
        return cls, "-", "-"
    return cls, str(diag.t_f), diag.culprit.render()


def run_sweep(model, program, spec, param_a, param_b, values_a=None, values_b=None):
    """Sweep two failure parameters; yields one row per grid cell."""
    values_a = list(values_a) if values_a is not None else grid()
    values_b = list(values_b) if values_b is not None else grid()
    for name in (param_a, param_b):
        if name not in model.params:
            raise ValueError(f"unknown model parameter {name!r}")
    for value in list(values_a) + list(values_b):
        if not 0.0 < value < 0.5:
            raise ValueError(f"sweep values must lie strictly inside (0, 0.5), got {value}")
    rows = []
    for a in values_a:
        for b in values_b:
            alpha = dict(spec.alpha)
            alpha[param_a] = a
            alpha[param_b] = b
            cls, t_f, culprit = classify_run(model, program, spec, alpha)
            rows.append(
                (format(a, ".12g"), format(b, ".12g"), cls, t_f, culprit)
            )
    return rows


def write_csv(rows, stream):
    writer = csv.writer(stream)
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
