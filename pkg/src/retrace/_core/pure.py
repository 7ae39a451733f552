"""Vectorized NumPy implementations of the enumeration kernels.

Joint enumeration builds the full (2,)*n probability tensor by broadcasting
one conditional factor per node, zeroes out assignments that contradict the
evidence, and reads query masses off axis slices.  Trace enumeration lays
all inclusion masks along one axis and advances every candidate world in
lockstep with bitwise arithmetic on uint64 lattices.
"""

from __future__ import annotations

import numpy as np

_ONE = np.uint64(1)


def enumerate_posterior(parents, tables, evidence, queries):
    """Total evidence mass and per-query true mass by full enumeration.

    Nodes are indexed topologically (parents before children).  tables[i]
    lists P(node i = True) per parent assignment, where bit j of the index
    is the value of parents[i][j].
    """
    n = len(parents)
    if n > 24:
        raise ValueError("joint enumeration caps at 24 nodes")
    joint = np.ones((2,) * n)
    for i, (ps, tab) in enumerate(zip(parents, tables)):
        k = len(ps)
        # reshape puts parent k-1 on the first axis; flip to parent order
        p_true = np.asarray(tab, dtype=float).reshape((2,) * k)
        if k:
            p_true = p_true.transpose(range(k - 1, -1, -1))
        factor = np.stack([1.0 - p_true, p_true], axis=-1)
        vars_ = list(ps) + [i]
        order = sorted(range(len(vars_)), key=lambda j: vars_[j])
        factor = factor.transpose(order)
        shape = [2 if v in set(vars_) else 1 for v in range(n)]
        joint *= factor.reshape(shape)
    for idx, val in evidence:
        indicator = np.array([0.0, 1.0] if val else [1.0, 0.0])
        shape = [1] * n
        shape[idx] = 2
        joint *= indicator.reshape(shape)
    total = float(joint.sum())
    masses = [float(np.take(joint, 1, axis=q).sum()) for q in queries]
    return total, masses


def _popcount(a):
    a = a - ((a >> np.uint64(1)) & np.uint64(0x5555555555555555))
    a = (a & np.uint64(0x3333333333333333)) + ((a >> np.uint64(2)) & np.uint64(0x3333333333333333))
    a = (a + (a >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (a * np.uint64(0x0101010101010101)) >> np.uint64(56)


def enumerate_traces(init_world, pre_pos, pre_neg, ops, post_pos, post_neg):
    """Smallest valid inclusion mask over a window of precompiled actions.

    Positions run oldest to newest; the last position is the detection
    action and is always included, so masks range over the first m-1
    positions (bit j = position j included).  A mask is valid when every
    included action's precondition holds in the simulated world right
    before it applies and the detection action's postcondition holds at the
    end.  Returns (size, mask) with size counting the detection action;
    ties prefer the numerically largest mask.  (-1, 0) when no mask is valid.
    """
    m = len(pre_pos)
    free = m - 1
    if free > 24:
        raise ValueError("trace enumeration caps at 24 free positions")
    count = 1 << free
    masks = np.arange(count, dtype=np.uint64)
    worlds = np.full(count, np.uint64(init_world), dtype=np.uint64)
    valid = np.ones(count, dtype=bool)
    for j in range(m):
        if j < free:
            included = ((masks >> np.uint64(j)) & _ONE).astype(bool)
        else:
            included = np.ones(count, dtype=bool)
        pos = np.uint64(pre_pos[j])
        neg = np.uint64(pre_neg[j])
        ok = ((worlds & pos) == pos) & ((worlds & neg) == np.uint64(0))
        valid &= ~included | ok
        stepped = worlds
        for target_bit, atom_bits, table_int in ops[j]:
            idx = np.zeros(count, dtype=np.uint64)
            for k, bit in enumerate(atom_bits):
                idx |= ((stepped >> np.uint64(bit)) & _ONE) << np.uint64(k)
            value = ((np.uint64(table_int) >> idx) & _ONE).astype(bool)
            tmask = np.uint64(1 << target_bit)
            stepped = np.where(value, stepped | tmask, stepped & ~tmask)
        worlds = np.where(included, stepped, worlds)
    pos = np.uint64(post_pos)
    neg = np.uint64(post_neg)
    valid &= ((worlds & pos) == pos) & ((worlds & neg) == np.uint64(0))
    if not valid.any():
        return -1, 0
    sizes = _popcount(masks) + _ONE
    big = np.uint64(1 << 62)
    sizes = np.where(valid, sizes, big)
    best_size = int(sizes.min())
    best_mask = int(np.nonzero(sizes == np.uint64(best_size))[0].max())
    return best_size, best_mask
