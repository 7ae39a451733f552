"""Exact posterior failure diagnosis over the execution history.

When the environment reports that an action cannot run (or times out), the
schema's failure label names evidence: literal values observed at detection
time.  Each observation attaches to the latest network node that assigned
the literal; observing false for a literal no node ever assigned is vacuous
(it already held probability zero) and is dropped, while observing true for
such a literal contradicts the closed belief and is an error.

Localization compares, per literal node, the most-likely value under the
evidence posterior with the evidence-free forward marginal.  The failure
step t_f is the earliest timestep holding a diverged node, and r_f collects
the diverged literals at that step.  Classification: if every literal in
r_f appears (ignoring polarity) in the culprit action's postcondition and
the culprit's success variable is most likely false, the action simply
failed its contract (a postcondition failure, which is recoverable by
re-running work); otherwise the history contains an effect the contract
never promised to manage (an unintended effect, not recoverable by
re-running).  If no node diverges, the history is innocent and the failed
action itself is classified against its own postcondition.
"""

from __future__ import annotations

from dataclasses import dataclass


class EvidenceError(Exception):
    """Failure evidence contradicts the closed-world belief."""


@dataclass(frozen=True)
class Diagnosis:
    kind: str  # "postcondition-failure" or "unintended-effect"
    t_f: int
    r_f: tuple  # diverged literals at t_f, sorted
    culprit: object  # GroundAction
    posterior: dict  # node id -> P(true | evidence)

    @property
    def class_token(self):
        return (
            "PostconditionFailure"
            if self.kind == "postcondition-failure"
            else "UnintendedEffect"
        )


def evidence_nodes(net, action, label):
    """Map a failure label on an attempted action to network evidence.

    Returns {node_id: bool}.  Falls back to negating the action's
    postcondition when the schema declares no evidence for the label.
    """
    assigns = None
    if label is not None:
        for name, pairs in action.failure_evidence:
            if name == label:
                assigns = pairs
                break
    if assigns is None:
        assigns = tuple((c.literal, not c.positive) for c in action.postcondition)
    out = {}
    for lit, val in assigns:
        node = net.latest_node(lit)
        if node is None:
            if val:
                raise EvidenceError(
                    f"evidence asserts {lit.render()} is true but nothing ever set it"
                )
            continue
        out[node] = val
    return out


def diagnose(net, evidence, detection):
    """Localize and classify a reported failure.  May raise ZeroEvidence."""
    posterior = net.posterior(evidence)
    forward = net.forward()
    diverged = [
        nid
        for nid in net.lit_nodes()
        if (posterior[nid] > 0.5) != (forward[nid] > 0.5)
    ]
    if diverged:
        t_f = min(nid[1] for nid in diverged)
        r_f = tuple(sorted({nid[2] for nid in diverged if nid[1] == t_f}))
        culprit = net.actions[t_f - 1]
        post_atoms = {c.literal for c in culprit.postcondition}
        success_p = posterior[("act", t_f, culprit.success_var.name)]
        if all(lit in post_atoms for lit in r_f) and success_p <= 0.5:
            kind = "postcondition-failure"
        else:
            kind = "unintended-effect"
    else:
        # nothing in the history explains the report: the attempt itself failed
        t_f = net.t + 1
        culprit = detection
        r_f = tuple(sorted({nid[2] for nid in evidence if nid[0] == "lit"}))
        post_atoms = {c.literal for c in detection.postcondition}
        if all(lit in post_atoms for lit in r_f):
            kind = "postcondition-failure"
        else:
            kind = "unintended-effect"
    return Diagnosis(kind, t_f, r_f, culprit, posterior)
