"""Pure-Python/numpy fallback for the hot kernels.

Mirrors the compiled module ``_fast`` exactly; selected at import time by
the package ``__init__`` when the extension is unavailable or when
``SCHOTTKY_LAB_PURE`` is set.
"""

import numpy as np

BACKEND = "python"


def shell_displacements(letters, depth):
    """Base-point displacements of all reduced words of length 1..depth.

    ``letters`` is a (2g, 2, 2) complex array of det-one matrices ordered
    generators-then-inverses, so letter ``l`` has inverse ``(l+g) % 2g``.
    Returns ``(disp, offsets)`` with shell ``k`` (1-indexed) occupying
    ``disp[offsets[k-1]:offsets[k]]`` in lexicographic word order.
    """
    letters = np.ascontiguousarray(letters, dtype=np.complex128)
    n_letters = letters.shape[0]
    g = n_letters // 2
    shells = []
    mats = letters.copy()  # level 1, lex order = letter order
    last = np.arange(n_letters)
    for level in range(1, depth + 1):
        sq = np.abs(mats.reshape(len(mats), 4)) ** 2
        shells.append(np.arccosh(np.maximum(1.0, 0.5 * sq.sum(axis=1))))
        if level == depth:
            break
        n_par = len(mats)
        n_child = n_par * (n_letters - 1)
        children = np.empty((n_child, 2, 2), dtype=np.complex128)
        child_last = np.empty(n_child, dtype=np.int64)
        inv_last = (last + g) % n_letters
        parent_idx = np.arange(n_par)
        for m in range(n_letters):
            ok = inv_last != m
            # Lexicographic slot: parents are already lex-sorted, and the
            # rank of m among the parent's allowed letters is m minus one
            # when the forbidden letter precedes it.
            dest = parent_idx[ok] * (n_letters - 1) + (m - (inv_last[ok] < m))
            children[dest] = mats[ok] @ letters[m]
            child_last[dest] = m
        mats = children
        last = child_last
    offsets = np.zeros(depth + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(s) for s in shells])
    return np.concatenate(shells) if shells else np.zeros(0), offsets


def dfd(p, q, bound=np.inf):
    """Discrete Frechet distance between complex sample arrays.

    Early-abandons once every coupling must exceed ``bound``; the value
    returned in that case is some number >= bound.
    """
    p = np.asarray(p, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    n, m = len(p), len(q)
    prev = np.empty(m)
    cur = np.empty(m)
    d0 = np.abs(p[0] - q)
    prev[0] = d0[0]
    for j in range(1, m):
        prev[j] = max(prev[j - 1], d0[j])
    for i in range(1, n):
        di = np.abs(p[i] - q)
        cur[0] = max(prev[0], di[0])
        for j in range(1, m):
            best = min(prev[j], prev[j - 1], cur[j - 1])
            cur[j] = max(best, di[j])
        prev, cur = cur, prev
        if prev.min() > bound:
            return prev.min()
    return prev[m - 1]


def bbox_pairs(minx, miny, maxx, maxy):
    """Index pairs (i < j) of overlapping bounding boxes, sort-and-sweep
    with a vectorized per-anchor y filter."""
    minx = np.asarray(minx, dtype=np.float64)
    miny = np.asarray(miny, dtype=np.float64)
    maxx = np.asarray(maxx, dtype=np.float64)
    maxy = np.asarray(maxy, dtype=np.float64)
    n = len(minx)
    order = np.argsort(minx, kind="stable")
    sx = minx[order]
    s_miny = miny[order]
    s_maxy = maxy[order]
    ends = np.searchsorted(sx, maxx[order], side="right")
    chunks_i = []
    chunks_j = []
    for pos in range(n):
        end = ends[pos]
        if end <= pos + 1:
            continue
        sl = slice(pos + 1, end)
        mask = (s_miny[sl] <= s_maxy[pos]) & (s_maxy[sl] >= s_miny[pos])
        if not mask.any():
            continue
        js = order[sl][mask]
        ii = np.full(len(js), order[pos], dtype=np.int64)
        chunks_i.append(np.minimum(ii, js))
        chunks_j.append(np.maximum(ii, js))
    if not chunks_i:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    return np.concatenate(chunks_i), np.concatenate(chunks_j)
