# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gauss-Jordan elimination over F_p on int64 arrays."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef int64_t _inv_mod(int64_t a, int64_t p):
    cdef int64_t t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_mod(cnp.int64_t[:, ::1] a, int64_t p):
    """Reduce ``a`` in place to reduced row echelon form mod ``p``.

    Entries must already lie in ``[0, p)`` and ``p < 2**31``.
    Returns the list of pivot columns; the first ``len(pivots)`` rows of
    ``a`` hold the RREF and the rest are zero.
    """
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, k, sel, nnz
    cdef int64_t inv, f, t
    cdef cnp.ndarray[cnp.intp_t, ndim=1] support = np.empty(cols, dtype=np.intp)
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        sel = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(c, cols):
                t = a[r, j]
                a[r, j] = a[sel, j]
                a[sel, j] = t
        inv = _inv_mod(a[r, c], p)
        nnz = 0
        for j in range(c, cols):
            if a[r, j] != 0:
                if inv != 1:
                    a[r, j] = a[r, j] * inv % p
                support[nnz] = j
                nnz += 1
        for i in range(rows):
            if i == r:
                continue
            f = a[i, c]
            if f == 0:
                continue
            for k in range(nnz):
                j = support[k]
                t = (a[i, j] - f * a[r, j]) % p
                if t < 0:
                    t += p
                a[i, j] = t
        pivots.append(c)
        r += 1
    return pivots
