"""Compiled CART growing and ensemble traversal.

Trees are stored as flat node arrays.  ``feature[k] < 0`` marks a leaf.
Numeric nodes send ``x <= threshold`` left; categorical nodes send
``x == threshold`` (a level index) left.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def _splitmix64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _below(state, k):
    return np.int64(_splitmix64(state) % np.uint64(k))


@njit(cache=True, nogil=True)
def _best_numeric(xs, order, start, end, f, yc, yr, n_classes, best, cls_l, cls_r):
    size = end - start
    vals = np.empty(size)
    for t in range(size):
        vals[t] = xs[order[start + t], f]
    srt = np.argsort(vals, kind="mergesort")
    if vals[srt[0]] == vals[srt[size - 1]]:
        return False, best, 0.0
    found = False
    thr = 0.0
    if n_classes > 0:
        for c in range(n_classes):
            cls_l[c] = 0.0
            cls_r[c] = 0.0
        for t in range(size):
            cls_r[yc[order[start + t]]] += 1.0
        sq_l = 0.0
        sq_r = 0.0
        for c in range(n_classes):
            sq_r += cls_r[c] * cls_r[c]
        for t in range(size - 1):
            c = yc[order[start + srt[t]]]
            sq_l += 2.0 * cls_l[c] + 1.0
            cls_l[c] += 1.0
            sq_r -= 2.0 * cls_r[c] - 1.0
            cls_r[c] -= 1.0
            a = vals[srt[t]]
            b = vals[srt[t + 1]]
            if a < b:
                n_l = t + 1.0
                crit = sq_l / n_l + sq_r / (size - n_l)
                if crit > best:
                    best = crit
                    mid = 0.5 * (a + b)
                    thr = a if mid >= b else mid
                    found = True
    else:
        s_r = 0.0
        for t in range(size):
            s_r += yr[order[start + t]]
        s_l = 0.0
        for t in range(size - 1):
            v = yr[order[start + srt[t]]]
            s_l += v
            s_r -= v
            a = vals[srt[t]]
            b = vals[srt[t + 1]]
            if a < b:
                n_l = t + 1.0
                crit = s_l * s_l / n_l + s_r * s_r / (size - n_l)
                if crit > best:
                    best = crit
                    mid = 0.5 * (a + b)
                    thr = a if mid >= b else mid
                    found = True
    return found, best, thr


@njit(cache=True, nogil=True)
def _best_categorical(xs, order, start, end, f, n_lev, yc, yr, n_classes, best):
    size = end - start
    k = max(n_classes, 1)
    cnt = np.zeros(n_lev)
    tab = np.zeros((n_lev, k))
    tot = np.zeros(k)
    for t in range(size):
        r = order[start + t]
        lv = np.int64(xs[r, f])
        cnt[lv] += 1.0
        if n_classes > 0:
            tab[lv, yc[r]] += 1.0
            tot[yc[r]] += 1.0
        else:
            tab[lv, 0] += yr[r]
            tot[0] += yr[r]
    found = False
    thr = 0.0
    for lv in range(n_lev):
        n_l = cnt[lv]
        if n_l == 0.0 or n_l == size:
            continue
        n_r = size - n_l
        if n_classes > 0:
            sq_l = 0.0
            sq_r = 0.0
            for c in range(n_classes):
                sq_l += tab[lv, c] * tab[lv, c]
                rc = tot[c] - tab[lv, c]
                sq_r += rc * rc
            crit = sq_l / n_l + sq_r / n_r
        else:
            s_l = tab[lv, 0]
            s_r = tot[0] - s_l
            crit = s_l * s_l / n_l + s_r * s_r / n_r
        if crit > best:
            best = crit
            thr = float(lv)
            found = True
    return found, best, thr


@njit(cache=True, nogil=True)
def grow_tree(xs, yc, yr, rows, is_cat, n_levels, n_classes, mtry, min_node_size, max_depth, seed):
    """Grow one CART tree on ``rows`` (duplicates allowed).

    ``n_classes > 0`` selects Gini classification on ``yc``; ``0`` selects
    variance-reduction regression on ``yr``.  ``max_depth < 0`` is
    unbounded.  Returns ``(feature, threshold, left, right, value)`` where
    ``value`` is ``(n_nodes, n_classes)`` class counts or ``(n_nodes, 1)``
    leaf means.
    """
    m = rows.shape[0]
    p = xs.shape[1]
    k = max(n_classes, 1)
    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, k))

    order = rows.copy()
    scratch = np.empty(m, dtype=rows.dtype)
    perm = np.arange(p)
    cls_l = np.zeros(k)
    cls_r = np.zeros(k)
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed

    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    top = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        size = end - start

        pure = True
        if n_classes > 0:
            for t in range(start, end):
                value[node, yc[order[t]]] += 1.0
            first = yc[order[start]]
            for t in range(start + 1, end):
                if yc[order[t]] != first:
                    pure = False
                    break
            sq = 0.0
            for c in range(n_classes):
                sq += value[node, c] * value[node, c]
            parent = sq / size
        else:
            s = 0.0
            for t in range(start, end):
                s += yr[order[t]]
            value[node, 0] = s / size
            first_r = yr[order[start]]
            for t in range(start + 1, end):
                if yr[order[t]] != first_r:
                    pure = False
                    break
            parent = s * s / size

        if pure or size <= min_node_size or depth == max_depth:
            continue

        best = parent + 1e-12 * max(1.0, abs(parent))
        best_f = -1
        best_thr = 0.0
        for t in range(mtry):
            r = t + _below(state, p - t)
            tmp = perm[t]
            perm[t] = perm[r]
            perm[r] = tmp
            f = perm[t]
            if is_cat[f]:
                found, best, thr = _best_categorical(
                    xs, order, start, end, f, n_levels[f], yc, yr, n_classes, best
                )
            else:
                found, best, thr = _best_numeric(
                    xs, order, start, end, f, yc, yr, n_classes, best, cls_l, cls_r
                )
            if found:
                best_f = f
                best_thr = thr
        if best_f < 0:
            continue

        # stable partition of order[start:end]
        n_l = 0
        for t in range(start, end):
            x = xs[order[t], best_f]
            go_left = (x == best_thr) if is_cat[best_f] else (x <= best_thr)
            if go_left:
                scratch[n_l] = order[t]
                n_l += 1
        n_r = n_l
        for t in range(start, end):
            x = xs[order[t], best_f]
            go_left = (x == best_thr) if is_cat[best_f] else (x <= best_thr)
            if not go_left:
                scratch[n_r] = order[t]
                n_r += 1
        for t in range(size):
            order[start + t] = scratch[t]

        feature[node] = best_f
        threshold[node] = best_thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # right pushed first so the left subtree is grown first
        st_node[top] = rnode
        st_start[top] = start + n_l
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lnode
        st_start[top] = start
        st_end[top] = start + n_l
        st_depth[top] = depth + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def _leaf(x, i, root, feature, threshold, left, right, is_cat):
    node = root
    while feature[node] >= 0:
        f = feature[node]
        v = x[i, f]
        if is_cat[f]:
            go_left = v == threshold[node]
        else:
            go_left = v <= threshold[node]
        node = left[node] if go_left else right[node]
    return node


@njit(cache=True, nogil=True)
def forest_votes(x, roots, feature, threshold, left, right, leaf_class, is_cat, n_classes):
    n = x.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int64)
    # tree-major loop keeps one tree's nodes hot in cache
    for t in range(roots.shape[0]):
        for i in range(n):
            node = _leaf(x, i, roots[t], feature, threshold, left, right, is_cat)
            votes[i, leaf_class[node]] += 1
    return votes


@njit(cache=True, nogil=True)
def forest_mean(x, roots, feature, threshold, left, right, leaf_value, is_cat):
    n = x.shape[0]
    n_trees = roots.shape[0]
    acc = np.zeros(n)
    for t in range(n_trees):
        for i in range(n):
            node = _leaf(x, i, roots[t], feature, threshold, left, right, is_cat)
            acc[i] += leaf_value[node]
    return acc / n_trees
