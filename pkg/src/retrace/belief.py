"""Factored belief over ground literals.

The belief maps each ground literal to the probability that it holds; absent
literals have probability zero, so the initial belief is the empty map.  The
most-likely reading of a literal is strict: it counts as true only when its
probability exceeds one half.  A condition (conjunction of possibly negated
literals) holds when every conjunct's most-likely value matches its
polarity; the empty conjunction is vacuously true.

Applying an action advances the belief one step.  Each ground statement
``target := expr`` gets an exact marginal: references to targets assigned
earlier in the same program are replaced by their defining expressions, so
the result ranges only over the action's Bernoulli variables and literal
values from before the action.  Those atoms are mutually independent (the
belief is factored and fresh variables are independent of everything), so
enumerating their joint support gives the exact new marginal.  Correlations
between distinct literals created by a shared variable are deliberately
dropped when the marginals are stored back into the map; the time-indexed
network kept by the runtime retains them for diagnosis.
"""

from __future__ import annotations

from itertools import product

from .model import gexpr_atoms, eval_gexpr


def _subst_new(expr, defined):
    kind = expr[0]
    if kind == "new":
        return defined[expr[1]]
    if kind == "not":
        return ("not", _subst_new(expr[1], defined))
    if kind in ("and", "or"):
        return (kind, tuple(_subst_new(e, defined) for e in expr[1]))
    return expr


def _marginal(expr, prob_of):
    atoms = gexpr_atoms(expr)
    total = 0.0
    for bits in product((False, True), repeat=len(atoms)):
        weight = 1.0
        for atom, bit in zip(atoms, bits):
            p = prob_of(atom)
            weight *= p if bit else 1.0 - p
            if weight == 0.0:
                break
        if weight == 0.0:
            continue
        if eval_gexpr(expr, dict(zip(atoms, bits))):
            total += weight
    return total


class BeliefState:
    """Immutable map from ground literal to probability of holding."""

    __slots__ = ("probs",)

    def __init__(self, probs=None):
        cleaned = {}
        for lit, p in (probs or {}).items():
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} for {lit.render()} outside [0, 1]")
            if p > 0.0:
                cleaned[lit] = p
        self.probs = cleaned

    def prob(self, literal):
        return self.probs.get(literal, 0.0)

    def ml(self, literal):
        return self.prob(literal) > 0.5

    # world protocol used by grounding
    ml_true = ml

    def ml_world(self):
        return frozenset(lit for lit, p in self.probs.items() if p > 0.5)

    def holds(self, condition):
        """Most-likely evaluation of a conjunction of GroundCond entries."""
        return all(self.ml(c.literal) == c.positive for c in condition)

    def failed_conjuncts(self, condition):
        return tuple(c for c in condition if self.ml(c.literal) != c.positive)

    def forward_update(self, action):
        """Advance the belief through one ground action's update program."""
        var_prob = {("var", v.name): 1.0 - v.alpha for v in action.variables}

        def prob_of(atom):
            if atom[0] == "var":
                return var_prob[atom]
            return self.probs.get(atom[1], 0.0)

        defined = {}
        staged = {}
        for st in action.statements:
            expr = _subst_new(st.expr, defined)
            staged[st.target] = _marginal(expr, prob_of)
            defined[st.target] = expr
        merged = dict(self.probs)
        for lit, p in staged.items():
            if p <= 0.0:
                merged.pop(lit, None)
            else:
                merged[lit] = p
        return BeliefState(merged)

    def items(self):
        return sorted(self.probs.items())

    def dump(self):
        lines = [f"{lit.render()}={format(p, '.12g')}" for lit, p in self.items()]
        return "\n".join(lines)

    def __eq__(self, other):
        return isinstance(other, BeliefState) and self.probs == other.probs

    def __repr__(self):
        return f"BeliefState({self.probs!r})"
