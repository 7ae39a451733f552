"""Minimal perforated-trace recovery.

After a postcondition failure is diagnosed, the runtime repairs the plan by
re-running a subsequence of the past: the window spans every confirmed
action plus the failed attempt itself, which is always included last so the
original intent is re-achieved.  A subsequence (a perforated trace) is
valid when, simulating from the posterior most-likely world with every
action variable assumed true, each included action regrounds (``:locals``
resolve against the simulated world; arguments stay frozen), its
precondition holds when reached, and the final attempt's postcondition
holds afterwards.  The planner returns a valid trace of minimum length,
breaking ties toward re-running later actions (the numerically largest
inclusion mask, reading bit j as window position j).

Two independent searchers: a depth-first search over (position, world)
states with memoization, used by the runtime, and a brute-force enumeration
of all inclusion masks used as the oracle in tests.  The brute-force path
compiles to the bitmask kernel when every window action regrounds
identically in every world (no locals and no quantified update blocks) and
the literal universe fits in 64 bits; otherwise it simulates in Python.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _core
from .model import (
    ForallBlock,
    GroundingError,
    LiteralSetWorld,
    eval_gexpr,
    gexpr_atoms,
    ml_apply,
    precondition_holds,
    reground,
)


@dataclass(frozen=True)
class RecoveryPlan:
    include: tuple  # 1-based window positions, detection last
    actions: tuple  # the original ground actions at those positions

    @property
    def length(self):
        return len(self.include)


def _better(cand, best):
    """Prefer fewer included actions, then the larger inclusion mask."""
    if best is None:
        return True
    if cand[0] != best[0]:
        return cand[0] < best[0]
    return cand[1] > best[1]


def search_min_trace(window, start_world):
    """Minimum valid perforated trace by memoized include/skip search.

    Returns (size, mask) with bit j of mask = window position j included,
    or None when no valid trace exists.  The last window position is the
    detection action and is always included.
    """
    m = len(window)
    last = m - 1
    memo = {}

    def attempt(pos, world):
        """Try to run window[pos] in world; new world or None if impossible."""
        try:
            action = reground(window[pos], LiteralSetWorld(world))
        except GroundingError:
            return None
        if not precondition_holds(action, world):
            return None
        applied = ml_apply(action, world)
        if pos == last and not all(
            (c.literal in applied) == c.positive for c in action.postcondition
        ):
            return None
        return applied

    def go(pos, world):
        if pos == last:
            applied = attempt(pos, world)
            if applied is None:
                return None
            return (1, 1 << pos)
        key = (pos, world)
        if key in memo:
            return memo[key]
        best = go(pos + 1, world)  # skip this position
        applied = attempt(pos, world)
        if applied is not None:
            sub = go(pos + 1, applied)
            if sub is not None:
                cand = (sub[0] + 1, sub[1] | (1 << pos))
                if _better(cand, best):
                    best = cand
        memo[key] = best
        return best

    return go(0, frozenset(start_world))


def plan_recovery(net, detection, start_world):
    """Plan the minimal repair for the failed attempt, or None."""
    window = tuple(net.actions) + (detection,)
    found = search_min_trace(window, start_world)
    if found is None:
        return None
    _, mask = found
    include = tuple(j + 1 for j in range(len(window)) if (mask >> j) & 1)
    return RecoveryPlan(include, tuple(window[j - 1] for j in include))


# -- brute-force oracle -------------------------------------------------------


def _is_static(action):
    """True when regrounding cannot change the action's ground statements."""
    schema = action.schema
    if schema.locals:
        return False
    return not any(isinstance(item, ForallBlock) for item in schema.update)


def _compile_window(window, start_world):
    """Compile a static window for the bitmask kernel, or None if it won't fit."""
    universe = set(start_world)
    for action in window:
        for st in action.statements:
            universe.add(st.target)
            for atom in gexpr_atoms(st.expr):
                if atom[0] != "var":
                    universe.add(atom[1])
        for cond in action.precondition + action.postcondition:
            universe.add(cond.literal)
    if len(universe) > 64:
        return None
    bit_of = {lit: i for i, lit in enumerate(sorted(universe))}
    init = 0
    for lit in start_world:
        init |= 1 << bit_of[lit]
    pre_pos, pre_neg, ops = [], [], []
    for action in window:
        pos = neg = 0
        for cond in action.precondition:
            if cond.positive:
                pos |= 1 << bit_of[cond.literal]
            else:
                neg |= 1 << bit_of[cond.literal]
        pre_pos.append(pos)
        pre_neg.append(neg)
        action_ops = []
        for st in action.statements:
            atoms = [a for a in gexpr_atoms(st.expr) if a[0] != "var"]
            if len(atoms) > 6:
                return None
            table = 0
            for idx in range(1 << len(atoms)):
                values = {a: True for a in gexpr_atoms(st.expr) if a[0] == "var"}
                for j, a in enumerate(atoms):
                    values[a] = bool((idx >> j) & 1)
                if eval_gexpr(st.expr, values):
                    table |= 1 << idx
            action_ops.append((bit_of[st.target], tuple(bit_of[a[1]] for a in atoms), table))
        ops.append(action_ops)
    post_pos = post_neg = 0
    for cond in window[-1].postcondition:
        if cond.positive:
            post_pos |= 1 << bit_of[cond.literal]
        else:
            post_neg |= 1 << bit_of[cond.literal]
    return init, pre_pos, pre_neg, ops, post_pos, post_neg


def brute_force_trace(window, start_world, force_pure=False):
    """Exhaustive minimal-trace search; returns (size, mask) or None."""
    m = len(window)
    last = m - 1
    if m - 1 > 24:
        raise ValueError("window too large to enumerate")
    if not force_pure and all(_is_static(a) for a in window):
        compiled = _compile_window(window, start_world)
        if compiled is not None:
            size, mask = _core.enumerate_traces(*compiled)
            if size < 0:
                return None
            return size, mask | (1 << last)
    best = None
    for mask in range(1 << last):
        world = frozenset(start_world)
        ok = True
        final = None
        for j in range(m):
            if j < last and not (mask >> j) & 1:
                continue
            try:
                action = reground(window[j], LiteralSetWorld(world))
            except GroundingError:
                ok = False
                break
            if not precondition_holds(action, world):
                ok = False
                break
            world = ml_apply(action, world)
            final = action
        if not ok:
            continue
        if not all((c.literal in world) == c.positive for c in final.postcondition):
            continue
        size = bin(mask).count("1") + 1
        cand = (size, mask | (1 << last))
        if _better(cand, best):
            best = cand
    return best
