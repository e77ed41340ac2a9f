"""Pure-Python backend for the hot kernels.

Mirrors the compiled extension (``_kernels``) function for function, with
the same arithmetic in the same order, so results agree bit-for-bit.  This
backend is selected automatically when the extension is unavailable; it is
correct but one to two orders of magnitude slower on large inputs.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_PIVOT_RTOL = 1e-12  # relative pivot threshold for the dependence solve
_DRAIN_EPS = 1e-9


# ---------------------------------------------------------------------------
# streaming 4-point moment reduction
# ---------------------------------------------------------------------------


def _merge_closest(ys, ws, na):
    """Degenerate-solve fallback: weighted-average the two closest labels.

    Exact for moments 0 and 1; the moment-2 error is bounded by the merged
    pair's internal variance, which is tiny because the pair is closest.
    """
    bi, bj = 0, 1
    best = abs(ys[0] - ys[1])
    for i in range(na):
        for j in range(i + 1, na):
            d = abs(ys[i] - ys[j])
            if d < best:
                best = d
                bi, bj = i, j
    tot = ws[bi] + ws[bj]
    if tot > 0.0:
        ys[bi] = (ws[bi] * ys[bi] + ws[bj] * ys[bj]) / tot
    ws[bi] = tot
    for t in range(bj, na - 1):
        ys[t] = ys[t + 1]
        ws[t] = ws[t + 1]
    return na - 1


def _reduce_five(ys, ws):
    """Drop one of five active lifted points along an affine dependence.

    Solves for lambda with sum(l) = 0, sum(l*y) = 0, sum(l*y^2) = 0, then
    shifts weights along it until the first weight reaches zero.  Returns
    (new_count, merged_flag).
    """
    m = [[1.0] * 5, [ys[i] for i in range(5)], [ys[i] * ys[i] for i in range(5)]]
    scale = 1.0
    for r in range(3):
        for c in range(5):
            a = abs(m[r][c])
            if a > scale:
                scale = a
    piv_tol = _PIVOT_RTOL * scale

    piv_col = [-1, -1, -1]
    row = 0
    for col in range(5):
        if row == 3:
            break
        best = row
        for r in range(row + 1, 3):
            if abs(m[r][col]) > abs(m[best][col]):
                best = r
        if abs(m[best][col]) <= piv_tol:
            continue
        if best != row:
            m[best], m[row] = m[row], m[best]
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
        return _merge_closest(ys, ws, 5), True

    free = 0
    is_piv = [False] * 5
    for r in range(rank):
        is_piv[piv_col[r]] = True
    for c in range(5):
        if not is_piv[c]:
            free = c
            break

    lam = [0.0] * 5
    lam[free] = 1.0
    for r in range(rank):
        lam[piv_col[r]] = -m[r][free]

    mx = 0.0
    for i in range(5):
        a = lam[i] if lam[i] > 0.0 else -lam[i]
        if a > mx:
            mx = a
    if mx <= 0.0:
        return _merge_closest(ys, ws, 5), True
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
            r = ws[i] / lam[i]
            if drop < 0 or r < t:
                t = r
                drop = i
    for i in range(5):
        ws[i] -= t * lam[i]
    ws[drop] = 0.0

    na = 0
    for i in range(5):
        if i != drop:
            w = ws[i]
            if w < 0.0:
                w = 0.0
            ys[na] = ys[i]
            ws[na] = w
            na += 1
    return na, False


class _Reducer:
    __slots__ = ("ys", "ws", "na", "merges")

    def __init__(self):
        self.ys = [0.0] * 5
        self.ws = [0.0] * 5
        self.na = 0
        self.merges = 0

    def admit(self, y, w):
        ys = self.ys
        for i in range(self.na):
            if ys[i] == y:
                self.ws[i] += w
                return
        ys[self.na] = y
        self.ws[self.na] = w
        self.na += 1
        if self.na == 5:
            self.na, merged = _reduce_five(ys, self.ws)
            if merged:
                self.merges += 1

    def result(self):
        labels = np.zeros(4)
        weights = np.zeros(4)
        for i in range(self.na):
            labels[i] = self.ys[i]
            w = self.ws[i]
            weights[i] = w if w > 0.0 else 0.0
        return labels, weights, self.na, self.merges


def reduce_stream(values, mults):
    """Reduce a weighted label stream to <= 4 moment-preserving points."""
    red = _Reducer()
    for i in range(len(values)):
        red.admit(float(values[i]), float(mults[i]))
    return red.result()


def compress_rect(labels, r0, r1, c0, c1):
    """Reduce one rectangle of a label grid, admitting cells in row-major order."""
    red = _Reducer()
    for r in range(r0, r1):
        row = labels[r]
        for c in range(c0, c1):
            red.admit(float(row[c]), 1.0)
    return red.result()


# ---------------------------------------------------------------------------
# greedy slice partition
# ---------------------------------------------------------------------------


def _opt1_box(s1, s2, r0, r1, c0, c1):
    area = (r1 - r0) * (c1 - c0)
    if area == 1:
        return 0.0
    box1 = s1[r1, c1] - s1[r0, c1] - s1[r1, c0] + s1[r0, c0]
    box2 = s2[r1, c1] - s2[r0, c1] - s2[r1, c0] + s2[r0, c0]
    v = box2 - box1 * box1 / area
    return v if v > 0.0 else 0.0


def slice_partition(s1, s2, r0, r1, c0, c1, sigma):
    """Greedy left-to-right column sweep holding opt1 <= sigma per piece.

    A single column that alone exceeds sigma is swept by rows instead
    (the transposed recursion, done in place).  Always covers the view.
    """
    out = []
    cb = c0
    while cb < c1:
        if _opt1_box(s1, s2, r0, r1, cb, cb + 1) > sigma:
            rb = r0
            while rb < r1:
                re = rb + 1
                while re < r1 and _opt1_box(s1, s2, rb, re + 1, cb, cb + 1) <= sigma:
                    re += 1
                out.append((rb, re, cb, cb + 1))
                rb = re
            cb += 1
        else:
            ce = cb + 1
            while ce < c1 and _opt1_box(s1, s2, r0, r1, cb, ce + 1) <= sigma:
                ce += 1
            out.append((r0, r1, cb, ce))
            cb = ce
    return np.array(out, dtype=np.int64).reshape(len(out), 4)


# ---------------------------------------------------------------------------
# guillotine-tree dynamic program
# ---------------------------------------------------------------------------


def _tri_id(a, b, n):
    # pairs (a, b) with 0 <= a < b <= n, lexicographic
    return a * (2 * n - a + 1) // 2 + (b - a - 1)


def dp_table(s1, s2, kmax):
    """Fill dp[j-1][rect] = optimal loss of a j-leaf guillotine tree on rect.

    Rects are indexed by triangular (row-pair, col-pair) ids.  Budget levels
    are seeded from the previous level, so entries are non-increasing in j.
    """
    n = s1.shape[0] - 1
    m = s1.shape[1] - 1
    tr = n * (n + 1) // 2
    tc = m * (m + 1) // 2
    dp = np.empty((kmax, tr * tc))

    lvl0 = dp[0]
    for a in range(n):
        for b in range(a + 1, n + 1):
            rid = _tri_id(a, b, n) * tc
            for c in range(m):
                for d in range(c + 1, m + 1):
                    lvl0[rid + _tri_id(c, d, m)] = _opt1_box(s1, s2, a, b, c, d)

    for j in range(2, kmax + 1):
        cur = dp[j - 1]
        prev = dp[j - 2]
        for a in range(n):
            for b in range(a + 1, n + 1):
                row_id = _tri_id(a, b, n) * tc
                for c in range(m):
                    for d in range(c + 1, m + 1):
                        rid = row_id + _tri_id(c, d, m)
                        best = prev[rid]
                        if best > 0.0:
                            cid = _tri_id(c, d, m)
                            for t in range(a + 1, b):
                                lo = _tri_id(a, t, n) * tc + cid
                                hi = _tri_id(t, b, n) * tc + cid
                                for i in range(1, j):
                                    cand = dp[i - 1][lo] + dp[j - i - 1][hi]
                                    if cand < best:
                                        best = cand
                            for t in range(c + 1, d):
                                lo = row_id + _tri_id(c, t, m)
                                hi = row_id + _tri_id(t, d, m)
                                for i in range(1, j):
                                    cand = dp[i - 1][lo] + dp[j - i - 1][hi]
                                    if cand < best:
                                        best = cand
                        cur[rid] = best
    return dp


# ---------------------------------------------------------------------------
# coreset query (weight-draining loss estimate)
# ---------------------------------------------------------------------------


def fitting_loss(block_rects, block_labels, block_weights, cell_rects, cell_labels):
    """Estimate a segmentation's loss from per-block 4-point summaries.

    Blocks on which the segmentation is constant take the exact moment
    branch; intersected blocks drain their (copied) weights against the
    segmentation cells in stored order.  Returns
    (loss, intersected_count, worst_drain_deficit).
    """
    nb = block_rects.shape[0]
    nk = cell_rects.shape[0]
    loss = 0.0
    intersected = 0
    worst_deficit = 0.0

    for b in range(nb):
        br0 = block_rects[b, 0]
        br1 = block_rects[b, 1]
        bc0 = block_rects[b, 2]
        bc1 = block_rects[b, 3]

        first = 0.0
        z = 0
        for k in range(nk):
            dr = min(br1, cell_rects[k, 1]) - max(br0, cell_rects[k, 0])
            if dr <= 0:
                continue
            dc = min(bc1, cell_rects[k, 3]) - max(bc0, cell_rects[k, 2])
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
        w0 = block_weights[b, 0]
        w1 = block_weights[b, 1]
        w2 = block_weights[b, 2]
        w3 = block_weights[b, 3]
        wl = [w0, w1, w2, w3]
        i = 0
        deficit = 0.0
        for k in range(nk):
            dr = min(br1, cell_rects[k, 1]) - max(br0, cell_rects[k, 0])
            if dr <= 0:
                continue
            dc = min(bc1, cell_rects[k, 3]) - max(bc0, cell_rects[k, 2])
            if dc <= 0:
                continue
            ov = float(dr * dc)
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
