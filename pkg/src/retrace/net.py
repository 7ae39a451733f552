"""Incremental time-indexed Bayesian network mirroring an execution history.

Every confirmed action appends one timestep: a root Bernoulli node per
action variable (prior = probability the variable comes out true, i.e. one
minus its failure parameter) and one deterministic node per update statement
whose CPT is the statement's truth table.  Literal nodes persist by
reference rather than copying: a statement that reads a literal's prior
value points at the latest node that assigned it, whatever timestep that
was, and a literal never assigned so far is a constant false folded into the
reading node's table.

Posteriors are exact.  Queries run variable elimination over the factor
graph: evidence slices factors, hidden variables are summed out greedily
(smallest resulting factor first), and every elimination renormalizes to
keep products well scaled.  Evidence with zero probability raises
ZeroEvidence.  A brute-force path enumerates the full joint for small
networks and is used to cross-check elimination in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .model import gexpr_atoms, eval_gexpr


class ZeroEvidence(ValueError):
    """The supplied evidence has probability zero under the network."""


@dataclass(frozen=True)
class Node:
    id: tuple  # ("act", t, var) or ("lit", t, Literal)
    parents: tuple  # node ids
    table: tuple  # P(node=True) per parent assignment; index bit j = parent j


def node_name(node_id):
    kind, t, payload = node_id
    if kind == "act":
        return f"act:{t}:{payload}"
    return f"lit:{t}:{payload.render()}"


class TraceNet:
    """Grow-only network over the confirmed action history."""

    def __init__(self):
        self.nodes = {}  # id -> Node, insertion order is topological
        self.last_def = {}  # Literal -> id of its latest defining node
        self.t = 0
        self.actions = []  # GroundAction per timestep, 1-based (index t-1)
        self._forward = None

    def extend(self, action):
        """Append one confirmed action as timestep t+1."""
        self.t += 1
        t = self.t
        self.actions.append(action)
        for v in action.variables:
            nid = ("act", t, v.name)
            self.nodes[nid] = Node(nid, (), (1.0 - v.alpha,))
        new_defs = {}
        for st in action.statements:
            atoms = gexpr_atoms(st.expr)
            live = []
            parent_of = {}
            for atom in atoms:
                if atom[0] == "var":
                    parent_of[atom] = ("act", t, atom[1])
                elif atom[0] == "new":
                    parent_of[atom] = new_defs[atom[1]]
                else:
                    parent_of[atom] = self.last_def.get(atom[1])
                if parent_of[atom] is not None:
                    live.append(atom)
            table = []
            for idx in range(1 << len(live)):
                values = {a: False for a in atoms}
                for j, atom in enumerate(live):
                    values[atom] = bool((idx >> j) & 1)
                table.append(1.0 if eval_gexpr(st.expr, values) else 0.0)
            nid = ("lit", t, st.target)
            self.nodes[nid] = Node(nid, tuple(parent_of[a] for a in live), tuple(table))
            new_defs[st.target] = nid
        self.last_def.update(new_defs)
        self._forward = None

    def latest_node(self, literal):
        return self.last_def.get(literal)

    def lit_nodes(self):
        return [nid for nid in self.nodes if nid[0] == "lit"]

    def act_nodes(self):
        return [nid for nid in self.nodes if nid[0] == "act"]

    def success_node(self, t):
        return ("act", t, self.actions[t - 1].success_var.name)

    # -- exact inference ----------------------------------------------------

    def _factor(self, node):
        k = len(node.parents)
        arr = np.empty((2,) * (k + 1))
        for idx in range(1 << k):
            sel = tuple((idx >> j) & 1 for j in range(k))
            p = node.table[idx]
            arr[sel + (1,)] = p
            arr[sel + (0,)] = 1.0 - p
        return list(node.parents) + [node.id], arr

    @staticmethod
    def _expand(vars_, arr, union):
        present = [u for u in union if u in vars_]
        arr = np.transpose(arr, [vars_.index(u) for u in present])
        shape = [2 if u in vars_ else 1 for u in union]
        return arr.reshape(shape)

    def _eliminate(self, evidence, query):
        factors = []
        for node in self.nodes.values():
            vars_, arr = self._factor(node)
            for ev_id, ev_val in evidence.items():
                if ev_id in vars_:
                    axis = vars_.index(ev_id)
                    arr = np.take(arr, 1 if ev_val else 0, axis=axis)
                    vars_.pop(axis)
            factors.append((vars_, arr))
        hidden = {v for vars_, _ in factors for v in vars_}
        hidden.discard(query)
        while hidden:
            best = None
            for v in hidden:
                scope = set()
                for vars_, _ in factors:
                    if v in vars_:
                        scope.update(vars_)
                scope.discard(v)
                if best is None or len(scope) < best[1]:
                    best = (v, len(scope))
            v = best[0]
            hidden.discard(v)
            touched = [f for f in factors if v in f[0]]
            factors = [f for f in factors if v not in f[0]]
            union = list(dict.fromkeys(u for vars_, _ in touched for u in vars_))
            prod = np.ones([2] * len(union)) if union else np.ones(())
            for vars_, arr in touched:
                prod = prod * self._expand(vars_, arr, union)
            axis = union.index(v)
            summed = prod.sum(axis=axis)
            union.pop(axis)
            total = float(summed.sum())
            if total <= 0.0:
                raise ZeroEvidence("evidence has zero probability")
            factors.append((union, summed / total))
        # all hidden variables are gone, so only query factors and scalars remain
        result = np.ones((2,))
        for vars_, arr in factors:
            if vars_:
                result = result * arr
            else:
                result = result * float(arr)
        total = float(result.sum())
        if total <= 0.0:
            raise ZeroEvidence("evidence has zero probability")
        return float(result[1]) / total

    def posterior(self, evidence=None, queries=None):
        """Exact P(node=True | evidence) for each query node."""
        evidence = dict(evidence or {})
        for nid in evidence:
            if nid not in self.nodes:
                raise KeyError(f"unknown node {nid!r}")
        if queries is None:
            queries = list(self.nodes)
        out = {}
        for q in queries:
            if q not in self.nodes:
                raise KeyError(f"unknown node {q!r}")
            if q in evidence:
                out[q] = 1.0 if evidence[q] else 0.0
            else:
                out[q] = self._eliminate(evidence, q)
        return out

    def forward(self):
        """Evidence-free marginals for every node, cached until next extend."""
        if self._forward is None:
            self._forward = self.posterior({}, None)
        return self._forward

    # -- rendering ----------------------------------------------------------

    def dump(self):
        lines = []
        marginals = self.forward()
        for nid, node in self.nodes.items():
            parents = ",".join(node_name(p) for p in node.parents) or "-"
            rows = []
            k = len(node.parents)
            for idx, p in enumerate(node.table):
                bits = "".join(str((idx >> j) & 1) for j in range(k))
                rows.append(f"{bits}->{format(p, '.12g')}")
            lines.append(
                f"{node_name(nid)} | {parents} | {';'.join(rows)} | "
                f"{format(marginals[nid], '.12g')}"
            )
        return "\n".join(lines)

    def to_dot(self):
        out = ["digraph trace {", "  rankdir=LR;"]
        for nid in self.nodes:
            shape = "box" if nid[0] == "act" else "ellipse"
            out.append(f'  "{node_name(nid)}" [shape={shape}];')
        for nid, node in self.nodes.items():
            for p in node.parents:
                out.append(f'  "{node_name(p)}" -> "{node_name(nid)}";')
        out.append("}")
        return "\n".join(out) + "\n"


def brute_force_posterior(net, evidence=None, queries=None):
    """Posterior by full joint enumeration; networks up to 24 nodes only."""
    order = list(net.nodes)
    if len(order) > 24:
        raise ValueError(f"network has {len(order)} nodes, enumeration caps at 24")
    index = {nid: i for i, nid in enumerate(order)}
    parents = [[index[p] for p in net.nodes[nid].parents] for nid in order]
    tables = [list(net.nodes[nid].table) for nid in order]
    evidence = dict(evidence or {})
    ev = sorted((index[nid], bool(val)) for nid, val in evidence.items())
    if queries is None:
        queries = list(order)
    qidx = [index[q] for q in queries]
    total, masses = _core.enumerate_posterior(parents, tables, ev, qidx)
    if total <= 0.0:
        raise ZeroEvidence("evidence has zero probability")
    out = {}
    for q, mass in zip(queries, masses):
        if q in evidence:
            out[q] = 1.0 if evidence[q] else 0.0
        else:
            out[q] = mass / total
    return out
