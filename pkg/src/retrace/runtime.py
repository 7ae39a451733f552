"""Execution engine for task programs.

Each action statement runs in three steps: ground the call against the
current belief (omitted arguments resolve to the unique most-likely
candidates and stay frozen from then on), check the precondition's
most-likely value, and dispatch to the environment port.  A precondition
that already reads false predicts the failure before acting; the run aborts
rather than dispatching a doomed action.  A confirmed dispatch advances the
belief one step and appends the action to the time-indexed network.  A
cannot/timeout report triggers diagnosis over the network and, for
postcondition failures, minimal perforated-trace recovery: the repair
replays chosen past actions (regrounded against the revised belief), then
resumes the program at the statement after the failed one.  Repeated
failures inside one recovery episode re-diagnose with accumulated evidence,
still aiming to complete the original failed attempt, up to the retry
limit.  Prompts go straight to the operator and never enter the history.

Exit codes: 0 done, 2 unrecoverable (predicted failure, unintended effect,
no valid trace, or contradictory evidence), 3 retry limit, 4 configuration
error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .belief import BeliefState
from .diagnose import EvidenceError, diagnose, evidence_nodes
from .model import GroundingError, ground_action, reground
from .net import TraceNet, ZeroEvidence
from .recover import plan_recovery
from .task import Assign, PromptExpr, TaskError, eval_arg

EXIT_DONE = 0
EXIT_UNRECOVERABLE = 2
EXIT_RETRY_LIMIT = 3
EXIT_CONFIG = 4


class EnvError(Exception):
    """The environment port cannot serve a request (configuration problem)."""


@dataclass(frozen=True)
class Outcome:
    """Environment's reply to a dispatch: ok, cannot, or timeout."""

    kind: str
    label: str | None = None

    def __post_init__(self):
        if self.kind not in ("ok", "cannot", "timeout"):
            raise ValueError(f"bad outcome kind {self.kind!r}")


@dataclass(frozen=True)
class Event:
    kind: str
    line: str | None
    data: dict = field(default_factory=dict)


class LogWriter:
    """Event sink that appends log lines to a stream."""

    def __init__(self, stream):
        self.stream = stream

    def __call__(self, event):
        if event.line is not None:
            self.stream.write(event.line + "\n")


def tee(*sinks):
    sinks = [s for s in sinks if s is not None]

    def emit(event):
        for s in sinks:
            s(event)

    return emit


class Session:
    """One run of a task program against an environment port."""

    def __init__(
        self,
        model,
        program,
        env,
        *,
        labels=("-", "-", "-"),
        alpha=None,
        retry_limit=3,
        emit=None,
    ):
        self.model = model
        self.program = program
        self.env = env
        self.labels = tuple(labels)
        self.alpha = dict(alpha or {})
        self.retry_limit = int(retry_limit)
        self.belief = BeliefState()
        self.net = TraceNet()
        self.evidence = {}
        self.vars = {}
        self._emit_cb = emit
        self.first_diagnosis = None
        self.failure_class = None  # None, "PF", "RV", or "IF"

    # -- plumbing ------------------------------------------------------------

    def _emit(self, kind, line=None, **data):
        if self._emit_cb is not None:
            self._emit_cb(Event(kind, line, data))

    def _abort(self, reason, code, detail=None):
        self._emit("abort", f"ABORT reason={reason}", reason=reason, detail=detail)
        return code

    def _confirm(self, action):
        t = self.net.t + 1
        self.belief = self.belief.forward_update(action)
        self.net.extend(action)
        self._emit("ok", f"OK t={t} action={action.render()}", t=t, action=action.render())
        self._emit(
            "belief",
            None,
            t=t,
            belief=[[lit.render(), p] for lit, p in self.belief.items()],
        )

    def _add_evidence(self, action, label):
        self.evidence.update(evidence_nodes(self.net, action, label))

    def _revise_belief(self, posterior):
        self.belief = BeliefState(
            {lit: posterior[nid] for lit, nid in self.net.last_def.items()}
        )

    # -- main loop -----------------------------------------------------------

    def run(self):
        model_label, task_label, scen_label = self.labels
        self._emit(
            "run",
            f"RUN model={model_label} task={task_label} scenario={scen_label} "
            f"retry_limit={self.retry_limit}",
            model=model_label,
            task=task_label,
            scenario=scen_label,
            retry_limit=self.retry_limit,
        )
        try:
            code = self._execute()
        except EnvError as exc:
            code = self._abort("config-error", EXIT_CONFIG, detail=str(exc))
        self._emit("end", f"END exit={code}", exit=code)
        return code

    def _execute(self):
        steps = self.program.steps
        i = 0
        while i < len(steps):
            step = steps[i]
            stmt = step.stmt
            if isinstance(stmt, Assign):
                if isinstance(stmt.expr, PromptExpr):
                    question = eval_arg(stmt.expr.question, self.vars, step.loop_env)
                    self._emit(
                        "prompt",
                        f"PROMPT stmt={step.index} text={question}",
                        stmt=step.index,
                        text=question,
                    )
                    value = str(self.env.answer(question))
                    self._emit(
                        "answer",
                        f"ANSWER stmt={step.index} value={value}",
                        stmt=step.index,
                        value=value,
                    )
                else:
                    try:
                        value = eval_arg(stmt.expr, self.vars, step.loop_env)
                    except TaskError as exc:
                        return self._abort("config-error", EXIT_CONFIG, detail=str(exc))
                self.vars[stmt.name] = value
                i += 1
                continue
            try:
                args = [str(eval_arg(a, self.vars, step.loop_env)) for a in stmt.args]
                action = ground_action(self.model, stmt.name, args, self.belief, self.alpha)
            except (TaskError, GroundingError) as exc:
                return self._abort("config-error", EXIT_CONFIG, detail=str(exc))
            unsatisfied = self.belief.failed_conjuncts(action.precondition)
            if unsatisfied:
                rendered = "{" + ", ".join(c.render() for c in unsatisfied) + "}"
                self._emit(
                    "precondfail",
                    f"PRECONDFAIL t={self.net.t + 1} action={action.render()} "
                    f"unsatisfied={rendered}",
                    t=self.net.t + 1,
                    action=action.render(),
                    unsatisfied=[c.render() for c in unsatisfied],
                )
                if self.failure_class is None:
                    self.failure_class = "PF"
                return self._abort("predicted-failure", EXIT_UNRECOVERABLE)
            self._emit(
                "start",
                f"START t={self.net.t + 1} stmt={step.index} action={action.render()}",
                t=self.net.t + 1,
                stmt=step.index,
                action=action.render(),
            )
            outcome = self.env.dispatch(action)
            if outcome.kind == "ok":
                self._confirm(action)
                i += 1
                continue
            code = self._handle_failure(action, outcome, resume=step.index + 1)
            if code is not None:
                return code
            i += 1
        return EXIT_DONE

    # -- failure handling ----------------------------------------------------

    def _report_cannot(self, action, outcome):
        label = outcome.label or action.timeout_label
        self._emit(
            "cannot",
            f"CANNOT t={self.net.t + 1} action={action.render()} label={label or '-'}",
            t=self.net.t + 1,
            action=action.render(),
            label=label,
            timeout=outcome.kind == "timeout",
        )
        return label

    def _handle_failure(self, detection, outcome, resume):
        """Diagnose and repair; None means recovered, else an exit code."""
        label = self._report_cannot(detection, outcome)
        try:
            self._add_evidence(detection, label)
        except EvidenceError as exc:
            return self._abort("config-error", EXIT_CONFIG, detail=str(exc))
        rounds = 0
        while True:
            rounds += 1
            if rounds > self.retry_limit:
                return self._abort("retry-limit", EXIT_RETRY_LIMIT)
            try:
                diag = diagnose(self.net, self.evidence, detection)
            except ZeroEvidence:
                return self._abort("zero-evidence", EXIT_UNRECOVERABLE)
            r_f = "{" + ", ".join(lit.render() for lit in diag.r_f) + "}"
            self._emit(
                "diag",
                f"DIAG t_f={diag.t_f} r_f={r_f} class={diag.class_token} "
                f"culprit={diag.culprit.render()}",
                t_f=diag.t_f,
                r_f=[lit.render() for lit in diag.r_f],
                class_token=diag.class_token,
                culprit=diag.culprit.render(),
            )
            if self.first_diagnosis is None:
                self.first_diagnosis = diag
                self.failure_class = "RV" if diag.kind == "postcondition-failure" else "IF"
            if diag.kind == "unintended-effect":
                return self._abort("unintended-effect", EXIT_UNRECOVERABLE)
            self._revise_belief(diag.posterior)
            plan = plan_recovery(self.net, detection, self.belief.ml_world())
            if plan is None:
                return self._abort("no-valid-trace", EXIT_UNRECOVERABLE)
            self._emit(
                "recover",
                f"RECOVER include=[{','.join(str(j) for j in plan.include)}] "
                f"len={plan.length}",
                include=list(plan.include),
                length=plan.length,
            )
            failed_again = False
            for j, original in enumerate(plan.actions, start=1):
                try:
                    action = reground(original, self.belief)
                except GroundingError as exc:
                    return self._abort("no-valid-trace", EXIT_UNRECOVERABLE, detail=str(exc))
                unsatisfied = self.belief.failed_conjuncts(action.precondition)
                if unsatisfied:
                    rendered = "{" + ", ".join(c.render() for c in unsatisfied) + "}"
                    self._emit(
                        "precondfail",
                        f"PRECONDFAIL t={self.net.t + 1} action={action.render()} "
                        f"unsatisfied={rendered}",
                        t=self.net.t + 1,
                        action=action.render(),
                        unsatisfied=[c.render() for c in unsatisfied],
                    )
                    return self._abort("predicted-failure", EXIT_UNRECOVERABLE)
                self._emit(
                    "start",
                    f"START t={self.net.t + 1} stmt=r{j} action={action.render()}",
                    t=self.net.t + 1,
                    stmt=f"r{j}",
                    action=action.render(),
                )
                outcome = self.env.dispatch(action)
                if outcome.kind == "ok":
                    self._confirm(action)
                    continue
                new_label = self._report_cannot(action, outcome)
                try:
                    self._add_evidence(action, new_label)
                except EvidenceError as exc:
                    return self._abort("config-error", EXIT_CONFIG, detail=str(exc))
                failed_again = True
                break
            if failed_again:
                continue
            self._emit("resume", f"RESUME stmt={resume}", stmt=resume)
            return None
