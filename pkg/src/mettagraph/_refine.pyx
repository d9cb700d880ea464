# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled signature-based partition refinement.

Same contract and canonical numbering as ``_refine_py.refine_history``.
Signatures are hashed to 64 bits; groups with equal hashes are verified
against their stored code vectors, so collisions never merge blocks.
"""

from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport int64_t, uint64_t
from cpython.array cimport array


cdef int _cmp_i64(const void *a, const void *b) noexcept nogil:
    cdef int64_t x = (<int64_t *> a)[0]
    cdef int64_t y = (<int64_t *> b)[0]
    return (x > y) - (x < y)


cdef struct Key:
    int64_t block
    uint64_t h
    int64_t state


cdef int _cmp_key(const void *a, const void *b) noexcept nogil:
    cdef Key *x = <Key *> a
    cdef Key *y = <Key *> b
    if x.block != y.block:
        return (x.block > y.block) - (x.block < y.block)
    if x.h != y.h:
        return (x.h > y.h) - (x.h < y.h)
    return (x.state > y.state) - (x.state < y.state)


cdef inline uint64_t _mix(uint64_t h, uint64_t v) noexcept nogil:
    h ^= v + <uint64_t>0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)
    h *= <uint64_t>0xff51afd7ed558ccdULL
    h ^= h >> 33
    return h


cdef bint _same(int64_t *codes, int64_t *start, int64_t *length, int64_t s, int64_t t) noexcept nogil:
    cdef int64_t i
    if length[s] != length[t]:
        return False
    for i in range(length[s]):
        if codes[start[s] + i] != codes[start[t] + i]:
            return False
    return True


def refine_history(Py_ssize_t n, src, act, dst, init=None):
    cdef Py_ssize_t m = len(src)
    cdef array a_src = array('q', src)
    cdef array a_act = array('q', act)
    cdef array a_dst = array('q', dst)
    cdef int64_t[:] vsrc = a_src
    cdef int64_t[:] vact = a_act
    cdef int64_t[:] vdst = a_dst
    cdef int64_t *rowptr = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *col_t = <int64_t *> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t *col_a = <int64_t *> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t *codes = <int64_t *> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t *length = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *block = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *newb = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *remap = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *reps = <int64_t *> malloc((n + 1) * sizeof(int64_t))
    cdef Key *keys = <Key *> malloc((n + 1) * sizeof(Key))
    cdef Py_ssize_t i, j, s, e, k, nb, nb_new, grp_start, nreps, r
    cdef int64_t maxact = 0, c, prev
    cdef uint64_t h
    cdef bint found
    if not (rowptr and col_t and col_a and codes and length and block and newb and remap and reps and keys):
        raise MemoryError()
    try:
        for i in range(n + 1):
            rowptr[i] = 0
        for e in range(m):
            rowptr[vsrc[e] + 1] += 1
            if vact[e] > maxact:
                maxact = vact[e]
        for i in range(n):
            rowptr[i + 1] += rowptr[i]
        for i in range(n):
            length[i] = rowptr[i]          # fill cursor
        for e in range(m):
            s = vsrc[e]
            col_t[length[s]] = vdst[e]
            col_a[length[s]] = vact[e]
            length[s] += 1

        # canonical initial blocks
        init_l = list(init) if init is not None else [0] * n
        seen = {}
        for i in range(n):
            block[i] = seen.setdefault(init_l[i], len(seen))
        nb = len(seen)
        history = [[block[i] for i in range(n)]]

        while True:
            with nogil:
                for s in range(n):
                    k = 0
                    for e in range(rowptr[s], rowptr[s + 1]):
                        codes[rowptr[s] + k] = block[col_t[e]] * (maxact + 1) + col_a[e]
                        k += 1
                    if k > 1:
                        qsort(&codes[rowptr[s]], k, sizeof(int64_t), _cmp_i64)
                    # dedupe in place
                    j = 0
                    prev = -1
                    for e in range(k):
                        c = codes[rowptr[s] + e]
                        if e == 0 or c != prev:
                            codes[rowptr[s] + j] = c
                            j += 1
                        prev = c
                    length[s] = j
                    h = <uint64_t>0x84222325
                    for e in range(j):
                        h = _mix(h, <uint64_t>codes[rowptr[s] + e])
                    keys[s].block = block[s]
                    keys[s].h = h
                    keys[s].state = s
                qsort(keys, n, sizeof(Key), _cmp_key)

                # assign provisional ids; verify codes inside equal-hash groups
                nb_new = 0
                i = 0
                while i < n:
                    grp_start = i
                    while i < n and keys[i].block == keys[grp_start].block and keys[i].h == keys[grp_start].h:
                        i += 1
                    nreps = 0
                    for j in range(grp_start, i):
                        s = keys[j].state
                        found = False
                        for r in range(nreps):
                            if _same(codes, rowptr, length, s, keys[reps[r]].state):
                                newb[s] = newb[keys[reps[r]].state]
                                found = True
                                break
                        if not found:
                            reps[nreps] = j
                            nreps += 1
                            newb[s] = nb_new
                            nb_new += 1

                # canonical renumbering by first occurrence in state order
                for i in range(nb_new):
                    remap[i] = -1
                k = 0
                for s in range(n):
                    if remap[newb[s]] < 0:
                        remap[newb[s]] = k
                        k += 1
                    newb[s] = remap[newb[s]]

            history.append([newb[i] for i in range(n)])
            if nb_new == nb:
                return history
            nb = nb_new
            for i in range(n):
                block[i] = newb[i]
    finally:
        free(rowptr); free(col_t); free(col_a); free(codes); free(length)
        free(block); free(newb); free(remap); free(reps); free(keys)
