# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: word-tree displacements, discrete Frechet DP,
bounding-box sweep.  Mirrors ``_slow`` exactly."""

from libc.math cimport acosh, sqrt, fmax, fmin
from libc.stdlib cimport malloc, free

import numpy as np

BACKEND = "compiled"


def shell_displacements(letters, int depth):
    """See ``_slow.shell_displacements``."""
    cdef double complex[:, :, ::1] gens = np.ascontiguousarray(
        letters, dtype=np.complex128)
    cdef Py_ssize_t n_letters = gens.shape[0]
    cdef Py_ssize_t g = n_letters // 2
    cdef Py_ssize_t level, n_par, n_child, ip, m, slot, inv_last, k
    cdef double complex a, b, c, d, la, lb, lc, ld
    cdef double s

    offsets = np.zeros(depth + 1, dtype=np.int64)
    cdef Py_ssize_t count = n_letters
    cdef Py_ssize_t total = 0
    for level in range(1, depth + 1):
        total += count
        offsets[level] = total
        count *= (n_letters - 1)
    disp = np.empty(total, dtype=np.float64)
    cdef double[::1] dv = disp
    cdef long long[::1] off = offsets

    # Level buffers: matrices stored as 4 contiguous complex entries.
    cdef Py_ssize_t cap = 1
    for level in range(depth - 1):
        cap *= (n_letters - 1)
    cap *= n_letters  # size of the deepest level
    if depth == 0:
        return disp, offsets
    cdef double complex *cur = <double complex *> malloc(4 * cap * sizeof(double complex))
    cdef double complex *nxt = <double complex *> malloc(4 * cap * sizeof(double complex))
    cdef signed char *cur_last = <signed char *> malloc(cap)
    cdef signed char *nxt_last = <signed char *> malloc(cap)
    cdef double complex *tmp_m
    cdef signed char *tmp_l
    if cur == NULL or nxt == NULL or cur_last == NULL or nxt_last == NULL:
        if cur != NULL: free(cur)
        if nxt != NULL: free(nxt)
        if cur_last != NULL: free(cur_last)
        if nxt_last != NULL: free(nxt_last)
        raise MemoryError()

    cdef Py_ssize_t pos = 0
    with nogil:
        n_par = n_letters
        for ip in range(n_letters):
            cur[4 * ip] = gens[ip, 0, 0]
            cur[4 * ip + 1] = gens[ip, 0, 1]
            cur[4 * ip + 2] = gens[ip, 1, 0]
            cur[4 * ip + 3] = gens[ip, 1, 1]
            cur_last[ip] = <signed char> ip
        for level in range(1, depth + 1):
            for ip in range(n_par):
                a = cur[4 * ip]; b = cur[4 * ip + 1]
                c = cur[4 * ip + 2]; d = cur[4 * ip + 3]
                s = (a.real * a.real + a.imag * a.imag
                     + b.real * b.real + b.imag * b.imag
                     + c.real * c.real + c.imag * c.imag
                     + d.real * d.real + d.imag * d.imag)
                dv[pos] = acosh(fmax(1.0, 0.5 * s))
                pos += 1
            if level == depth:
                break
            n_child = 0
            for ip in range(n_par):
                inv_last = (cur_last[ip] + g) % n_letters
                a = cur[4 * ip]; b = cur[4 * ip + 1]
                c = cur[4 * ip + 2]; d = cur[4 * ip + 3]
                for m in range(n_letters):
                    if m == inv_last:
                        continue
                    la = gens[m, 0, 0]; lb = gens[m, 0, 1]
                    lc = gens[m, 1, 0]; ld = gens[m, 1, 1]
                    nxt[4 * n_child] = a * la + b * lc
                    nxt[4 * n_child + 1] = a * lb + b * ld
                    nxt[4 * n_child + 2] = c * la + d * lc
                    nxt[4 * n_child + 3] = c * lb + d * ld
                    nxt_last[n_child] = <signed char> m
                    n_child += 1
            tmp_m = cur; cur = nxt; nxt = tmp_m
            tmp_l = cur_last; cur_last = nxt_last; nxt_last = tmp_l
            n_par = n_child
    free(cur); free(nxt); free(cur_last); free(nxt_last)
    return disp, offsets


def dfd(p, q, double bound=float("inf")):
    """See ``_slow.dfd``."""
    cdef double complex[::1] pv = np.ascontiguousarray(p, dtype=np.complex128)
    cdef double complex[::1] qv = np.ascontiguousarray(q, dtype=np.complex128)
    cdef Py_ssize_t n = pv.shape[0], m = qv.shape[0]
    cdef Py_ssize_t i, j
    cdef double complex diff
    cdef double dij, best, rowmin, out
    prev_arr = np.empty(m, dtype=np.float64)
    cur_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    with nogil:
        diff = pv[0] - qv[0]
        prev[0] = sqrt(diff.real * diff.real + diff.imag * diff.imag)
        for j in range(1, m):
            diff = pv[0] - qv[j]
            dij = sqrt(diff.real * diff.real + diff.imag * diff.imag)
            prev[j] = fmax(prev[j - 1], dij)
        for i in range(1, n):
            diff = pv[i] - qv[0]
            dij = sqrt(diff.real * diff.real + diff.imag * diff.imag)
            cur[0] = fmax(prev[0], dij)
            rowmin = cur[0]
            for j in range(1, m):
                diff = pv[i] - qv[j]
                dij = sqrt(diff.real * diff.real + diff.imag * diff.imag)
                best = fmin(fmin(prev[j], prev[j - 1]), cur[j - 1])
                cur[j] = fmax(best, dij)
                if cur[j] < rowmin:
                    rowmin = cur[j]
            tmp = prev; prev = cur; cur = tmp
            if rowmin > bound:
                out = rowmin
                break
        else:
            out = prev[m - 1]
    return out


def bbox_pairs(minx, miny, maxx, maxy):
    """See ``_slow.bbox_pairs``."""
    cdef double[::1] mnx = np.ascontiguousarray(minx, dtype=np.float64)
    cdef double[::1] mny = np.ascontiguousarray(miny, dtype=np.float64)
    cdef double[::1] mxx = np.ascontiguousarray(maxx, dtype=np.float64)
    cdef double[::1] mxy = np.ascontiguousarray(maxy, dtype=np.float64)
    cdef Py_ssize_t n = mnx.shape[0]
    order_arr = np.argsort(np.asarray(minx), kind="stable").astype(np.int64)
    cdef long long[::1] order = order_arr
    out_i = []
    out_j = []
    cdef Py_ssize_t pos, pos2, i, j
    cdef double hi
    for pos in range(n):
        i = order[pos]
        hi = mxx[i]
        for pos2 in range(pos + 1, n):
            if mnx[order[pos2]] > hi:
                break
            j = order[pos2]
            if mny[i] <= mxy[j] and mny[j] <= mxy[i]:
                if i < j:
                    out_i.append(i)
                    out_j.append(j)
                else:
                    out_i.append(j)
                    out_j.append(i)
    return (
        np.asarray(out_i, dtype=np.int64),
        np.asarray(out_j, dtype=np.int64),
    )
