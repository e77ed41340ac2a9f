# cython: language_level=3
"""Compiled backend for the hot kernels.

Function-for-function mirror of ``_kernels_py`` (same arithmetic, same
order, so results agree bit-for-bit).  Built with -ffp-contract=off to keep
that guarantee.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double _PIVOT_RTOL = 1e-12
cdef double _DRAIN_EPS = 1e-9


# ---------------------------------------------------------------------------
# streaming 4-point moment reduction
# ---------------------------------------------------------------------------

cdef struct Reducer:
    double ys[5]
    double ws[5]
    int na
    int merges


cdef int _merge_closest(Reducer* red) nogil:
    cdef int na = red.na
    cdef int bi = 0, bj = 1, i, j, t
    cdef double best = fabs(red.ys[0] - red.ys[1])
    cdef double d, tot
    for i in range(na):
        for j in range(i + 1, na):
            d = fabs(red.ys[i] - red.ys[j])
            if d < best:
                best = d
                bi = i
                bj = j
    tot = red.ws[bi] + red.ws[bj]
    if tot > 0.0:
        red.ys[bi] = (red.ws[bi] * red.ys[bi] + red.ws[bj] * red.ys[bj]) / tot
    red.ws[bi] = tot
    for t in range(bj, na - 1):
        red.ys[t] = red.ys[t + 1]
        red.ws[t] = red.ws[t + 1]
    return na - 1


cdef void _reduce_five(Reducer* red) nogil:
    cdef double m[3][5]
    cdef double lam[5]
    cdef bint is_piv[5]
    cdef int piv_col[3]
    cdef int r, c, row, col, best, rank, free, i, drop
    cdef double a, p, f, scale, piv_tol, mx, t, ratio, w
    cdef bint pos

    for c in range(5):
        m[0][c] = 1.0
        m[1][c] = red.ys[c]
        m[2][c] = red.ys[c] * red.ys[c]

    scale = 1.0
    for r in range(3):
        for c in range(5):
            a = fabs(m[r][c])
            if a > scale:
                scale = a
    piv_tol = _PIVOT_RTOL * scale

    piv_col[0] = -1
    piv_col[1] = -1
    piv_col[2] = -1
    row = 0
    for col in range(5):
        if row == 3:
            break
        best = row
        for r in range(row + 1, 3):
            if fabs(m[r][col]) > fabs(m[best][col]):
                best = r
        if fabs(m[best][col]) <= piv_tol:
            continue
        if best != row:
            for c in range(5):
                p = m[best][c]
                m[best][c] = m[row][c]
                m[row][c] = p
        p = m[row][col]
        for c in range(col, 5):
            m[row][c] /= p
        for r in range(3):
            if r != row and m[r][col] != 0.0:
                f = m[r][col]
                for c in range(col, 5):
                    m[r][c] -= f * m[row][c]
        piv_col[row] = col
        row += 1

    rank = row
    if rank < 3:
        red.na = _merge_closest(red)
        red.merges += 1
        return

    for c in range(5):
        is_piv[c] = False
    for r in range(rank):
        is_piv[piv_col[r]] = True
    free = 0
    for c in range(5):
        if not is_piv[c]:
            free = c
            break

    for i in range(5):
        lam[i] = 0.0
    lam[free] = 1.0
    for r in range(rank):
        lam[piv_col[r]] = -m[r][free]

    mx = 0.0
    for i in range(5):
        a = fabs(lam[i])
        if a > mx:
            mx = a
    if mx <= 0.0:
        red.na = _merge_closest(red)
        red.merges += 1
        return
    pos = False
    for i in range(5):
        if lam[i] > 0.0:
            pos = True
            break
    if not pos:
        for i in range(5):
            lam[i] = -lam[i]

    t = -1.0
    drop = -1
    for i in range(5):
        if lam[i] > 0.0:
            ratio = red.ws[i] / lam[i]
            if drop < 0 or ratio < t:
                t = ratio
                drop = i
    for i in range(5):
        red.ws[i] -= t * lam[i]
    red.ws[drop] = 0.0

    red.na = 0
    for i in range(5):
        if i != drop:
            w = red.ws[i]
            if w < 0.0:
                w = 0.0
            red.ys[red.na] = red.ys[i]
            red.ws[red.na] = w
            red.na += 1


cdef inline void _admit(Reducer* red, double y, double w) nogil:
    cdef int i
    for i in range(red.na):
        if red.ys[i] == y:
            red.ws[i] += w
            return
    red.ys[red.na] = y
    red.ws[red.na] = w
    red.na += 1
    if red.na == 5:
        _reduce_five(red)


cdef _result(Reducer* red):
    labels = np.zeros(4)
    weights = np.zeros(4)
    cdef double[::1] lv = labels
    cdef double[::1] wv = weights
    cdef int i
    cdef double w
    for i in range(red.na):
        lv[i] = red.ys[i]
        w = red.ws[i]
        wv[i] = w if w > 0.0 else 0.0
    return labels, weights, red.na, red.merges


def reduce_stream(const double[::1] values, const double[::1] mults):
    cdef Reducer red
    red.na = 0
    red.merges = 0
    cdef Py_ssize_t i, n = values.shape[0]
    with nogil:
        for i in range(n):
            _admit(&red, values[i], mults[i])
    return _result(&red)


def compress_rect(const double[:, ::1] labels, Py_ssize_t r0, Py_ssize_t r1,
                  Py_ssize_t c0, Py_ssize_t c1):
    cdef Reducer red
    red.na = 0
    red.merges = 0
    cdef Py_ssize_t r, c
    with nogil:
        for r in range(r0, r1):
            for c in range(c0, c1):
                _admit(&red, labels[r, c], 1.0)
    return _result(&red)


# ---------------------------------------------------------------------------
# greedy slice partition
# ---------------------------------------------------------------------------

cdef inline double _opt1_box(const double[:, ::1] s1, const double[:, ::1] s2,
                             Py_ssize_t r0, Py_ssize_t r1,
                             Py_ssize_t c0, Py_ssize_t c1) nogil:
    cdef double area = <double>((r1 - r0) * (c1 - c0))
    cdef double box1, box2, v
    if area == 1.0:
        return 0.0
    box1 = s1[r1, c1] - s1[r0, c1] - s1[r1, c0] + s1[r0, c0]
    box2 = s2[r1, c1] - s2[r0, c1] - s2[r1, c0] + s2[r0, c0]
    v = box2 - box1 * box1 / area
    return v if v > 0.0 else 0.0


def slice_partition(const double[:, ::1] s1, const double[:, ::1] s2,
                    Py_ssize_t r0, Py_ssize_t r1,
                    Py_ssize_t c0, Py_ssize_t c1, double sigma):
    cdef Py_ssize_t cap = (r1 - r0) * (c1 - c0)
    out = np.empty((cap, 4), dtype=np.int64)
    cdef long long[:, ::1] ov = out
    cdef Py_ssize_t cnt = 0
    cdef Py_ssize_t cb = c0, ce, rb, re
    with nogil:
        while cb < c1:
            if _opt1_box(s1, s2, r0, r1, cb, cb + 1) > sigma:
                rb = r0
                while rb < r1:
                    re = rb + 1
                    while re < r1 and _opt1_box(s1, s2, rb, re + 1, cb, cb + 1) <= sigma:
                        re += 1
                    ov[cnt, 0] = rb
                    ov[cnt, 1] = re
                    ov[cnt, 2] = cb
                    ov[cnt, 3] = cb + 1
                    cnt += 1
                    rb = re
                cb += 1
            else:
                ce = cb + 1
                while ce < c1 and _opt1_box(s1, s2, r0, r1, cb, ce + 1) <= sigma:
                    ce += 1
                ov[cnt, 0] = r0
                ov[cnt, 1] = r1
                ov[cnt, 2] = cb
                ov[cnt, 3] = ce
                cnt += 1
                cb = ce
    return out[:cnt]


# ---------------------------------------------------------------------------
# guillotine-tree dynamic program
# ---------------------------------------------------------------------------

cdef inline Py_ssize_t _tri_id(Py_ssize_t a, Py_ssize_t b, Py_ssize_t n) nogil:
    return a * (2 * n - a + 1) // 2 + (b - a - 1)


def dp_table(const double[:, ::1] s1, const double[:, ::1] s2, int kmax):
    cdef Py_ssize_t n = s1.shape[0] - 1
    cdef Py_ssize_t m = s1.shape[1] - 1
    cdef Py_ssize_t tr = n * (n + 1) // 2
    cdef Py_ssize_t tc = m * (m + 1) // 2
    dp_arr = np.empty((kmax, tr * tc))
    cdef double[:, ::1] dp = dp_arr
    cdef Py_ssize_t a, b, c, d, t, rid, row_id, cid, lo, hi
    cdef int i, j
    cdef double best, cand

    with nogil:
        for a in range(n):
            for b in range(a + 1, n + 1):
                row_id = _tri_id(a, b, n) * tc
                for c in range(m):
                    for d in range(c + 1, m + 1):
                        dp[0, row_id + _tri_id(c, d, m)] = _opt1_box(s1, s2, a, b, c, d)

        for j in range(2, kmax + 1):
            for a in range(n):
                for b in range(a + 1, n + 1):
                    row_id = _tri_id(a, b, n) * tc
                    for c in range(m):
                        for d in range(c + 1, m + 1):
                            rid = row_id + _tri_id(c, d, m)
                            best = dp[j - 2, rid]
                            if best > 0.0:
                                cid = _tri_id(c, d, m)
                                for t in range(a + 1, b):
                                    lo = _tri_id(a, t, n) * tc + cid
                                    hi = _tri_id(t, b, n) * tc + cid
                                    for i in range(1, j):
                                        cand = dp[i - 1, lo] + dp[j - i - 1, hi]
                                        if cand < best:
                                            best = cand
                                for t in range(c + 1, d):
                                    lo = row_id + _tri_id(c, t, m)
                                    hi = row_id + _tri_id(t, d, m)
                                    for i in range(1, j):
                                        cand = dp[i - 1, lo] + dp[j - i - 1, hi]
                                        if cand < best:
                                            best = cand
                            dp[j - 1, rid] = best
    return dp_arr


# ---------------------------------------------------------------------------
# coreset query (weight-draining loss estimate)
# ---------------------------------------------------------------------------

def fitting_loss(const long long[:, ::1] block_rects, const double[:, ::1] block_labels,
                 const double[:, ::1] block_weights, const long long[:, ::1] cell_rects,
                 const double[::1] cell_labels):
    cdef Py_ssize_t nb = block_rects.shape[0]
    cdef Py_ssize_t nk = cell_rects.shape[0]
    cdef double loss = 0.0
    cdef long intersected = 0
    cdef double worst_deficit = 0.0
    cdef Py_ssize_t b, k
    cdef long long br0, br1, bc0, bc1, dr, dc
    cdef int z, i
    cdef double first, v, d, ov, lab, take, deficit
    cdef double wl[4]

    with nogil:
        for b in range(nb):
            br0 = block_rects[b, 0]
            br1 = block_rects[b, 1]
            bc0 = block_rects[b, 2]
            bc1 = block_rects[b, 3]

            first = 0.0
            z = 0
            for k in range(nk):
                dr = (br1 if br1 < cell_rects[k, 1] else cell_rects[k, 1]) - \
                     (br0 if br0 > cell_rects[k, 0] else cell_rects[k, 0])
                if dr <= 0:
                    continue
                dc = (bc1 if bc1 < cell_rects[k, 3] else cell_rects[k, 3]) - \
                     (bc0 if bc0 > cell_rects[k, 2] else cell_rects[k, 2])
                if dc <= 0:
                    continue
                v = cell_labels[k]
                if z == 0:
                    first = v
                    z = 1
                elif v != first:
                    z = 2
                    break

            if z <= 1:
                for i in range(4):
                    d = block_labels[b, i] - first
                    loss += block_weights[b, i] * d * d
                continue

            intersected += 1
            wl[0] = block_weights[b, 0]
            wl[1] = block_weights[b, 1]
            wl[2] = block_weights[b, 2]
            wl[3] = block_weights[b, 3]
            i = 0
            deficit = 0.0
            for k in range(nk):
                dr = (br1 if br1 < cell_rects[k, 1] else cell_rects[k, 1]) - \
                     (br0 if br0 > cell_rects[k, 0] else cell_rects[k, 0])
                if dr <= 0:
                    continue
                dc = (bc1 if bc1 < cell_rects[k, 3] else cell_rects[k, 3]) - \
                     (bc0 if bc0 > cell_rects[k, 2] else cell_rects[k, 2])
                if dc <= 0:
                    continue
                ov = <double>(dr * dc)
                lab = cell_labels[k]
                while ov > _DRAIN_EPS:
                    if i >= 4:
                        deficit += ov
                        break
                    take = wl[i] if wl[i] < ov else ov
                    if take > 0.0:
                        d = lab - block_labels[b, i]
                        loss += take * d * d
                        wl[i] -= take
                        ov -= take
                    if wl[i] <= _DRAIN_EPS:
                        i += 1
            if deficit > worst_deficit:
                worst_deficit = deficit

    return loss, intersected, worst_deficit
