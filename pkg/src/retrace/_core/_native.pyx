# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels.

Same contracts as the pure module: full-joint enumeration over a small
network, and inclusion-mask enumeration over a window of precompiled
actions with worlds held in one uint64.  Both run as tight C loops.
"""

import numpy as np

from libc.stdint cimport uint64_t, int32_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def enumerate_posterior(parents, tables, evidence, queries):
    """Total evidence mass and per-query true mass by full enumeration."""
    cdef int n = len(parents)
    if n > 24:
        raise ValueError("joint enumeration caps at 24 nodes")
    par_off_l = [0]
    par_l = []
    tab_off_l = [0]
    tab_l = []
    for ps, tb in zip(parents, tables):
        par_l.extend(ps)
        par_off_l.append(len(par_l))
        tab_l.extend(tb)
        tab_off_l.append(len(tab_l))
    cdef int32_t[::1] par_off = np.asarray(par_off_l, dtype=np.int32)
    cdef int32_t[::1] par = np.asarray(par_l or [0], dtype=np.int32)
    cdef int32_t[::1] tab_off = np.asarray(tab_off_l, dtype=np.int32)
    cdef double[::1] tab = np.asarray(tab_l, dtype=np.float64)
    cdef uint64_t ev_mask = 0, ev_want = 0
    for idx, val in evidence:
        ev_mask |= <uint64_t> 1 << <int> idx
        if val:
            ev_want |= <uint64_t> 1 << <int> idx
    cdef int nq = len(queries)
    cdef int32_t[::1] q = np.asarray(list(queries) or [0], dtype=np.int32)
    cdef double[::1] qmass = np.zeros(max(nq, 1), dtype=np.float64)
    cdef uint64_t a, limit = <uint64_t> 1 << n
    cdef double w, p, total = 0.0
    cdef int i, k, pidx
    with nogil:
        for a in range(limit):
            if (a & ev_mask) != ev_want:
                continue
            w = 1.0
            for i in range(n):
                pidx = 0
                for k in range(par_off[i], par_off[i + 1]):
                    pidx |= (<int> ((a >> par[k]) & 1)) << (k - par_off[i])
                p = tab[tab_off[i] + pidx]
                if (a >> i) & 1:
                    w *= p
                else:
                    w *= 1.0 - p
                if w == 0.0:
                    break
            if w == 0.0:
                continue
            total += w
            for k in range(nq):
                if (a >> q[k]) & 1:
                    qmass[k] += w
    return total, [qmass[k] for k in range(nq)]


def enumerate_traces(init_world, pre_pos, pre_neg, ops, post_pos, post_neg):
    """Smallest valid inclusion mask (size incl. detection, then max mask)."""
    cdef int m = len(pre_pos)
    cdef int free = m - 1
    if free > 24:
        raise ValueError("trace enumeration caps at 24 free positions")
    op_off_l = [0]
    targets_l = []
    at_off_l = [0]
    at_bits_l = []
    tabs_l = []
    for position_ops in ops:
        for tgt, bits, table in position_ops:
            targets_l.append(tgt)
            at_bits_l.extend(bits)
            at_off_l.append(len(at_bits_l))
            tabs_l.append(table)
        op_off_l.append(len(targets_l))
    cdef int32_t[::1] op_off = np.asarray(op_off_l, dtype=np.int32)
    cdef int32_t[::1] targets = np.asarray(targets_l or [0], dtype=np.int32)
    cdef int32_t[::1] at_off = np.asarray(at_off_l, dtype=np.int32)
    cdef int32_t[::1] at_bits = np.asarray(at_bits_l or [0], dtype=np.int32)
    cdef uint64_t[::1] tabs = np.asarray(tabs_l or [0], dtype=np.uint64)
    cdef uint64_t[::1] cpre_pos = np.asarray([int(x) for x in pre_pos], dtype=np.uint64)
    cdef uint64_t[::1] cpre_neg = np.asarray([int(x) for x in pre_neg], dtype=np.uint64)
    cdef uint64_t cpost_pos = <uint64_t> int(post_pos)
    cdef uint64_t cpost_neg = <uint64_t> int(post_neg)
    cdef uint64_t init = <uint64_t> int(init_world)
    cdef uint64_t mask, world, idx, tm
    cdef uint64_t count = <uint64_t> 1 << free
    cdef int j, o, k, size
    cdef int best_size = -1
    cdef uint64_t best_mask = 0
    cdef bint good
    with nogil:
        for mask in range(count):
            world = init
            good = True
            for j in range(m):
                if j < free and not ((mask >> j) & 1):
                    continue
                if (world & cpre_pos[j]) != cpre_pos[j] or (world & cpre_neg[j]) != 0:
                    good = False
                    break
                for o in range(op_off[j], op_off[j + 1]):
                    idx = 0
                    for k in range(at_off[o], at_off[o + 1]):
                        idx |= ((world >> at_bits[k]) & 1) << (k - at_off[o])
                    tm = <uint64_t> 1 << targets[o]
                    if (tabs[o] >> idx) & 1:
                        world |= tm
                    else:
                        world &= ~tm
            if not good:
                continue
            if (world & cpost_pos) != cpost_pos or (world & cpost_neg) != 0:
                continue
            size = __builtin_popcountll(mask) + 1
            if best_size < 0 or size < best_size or (size == best_size and mask > best_mask):
                best_size = size
                best_mask = mask
    return best_size, int(best_mask)
