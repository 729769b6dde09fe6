"""Hot loops for tree induction and traversal.

Every kernel exists twice: an explicit-loop version compiled by numba
(``_nb_*``) and a vectorised numpy version (``_np_*``).  Both evaluate the
same floating point expressions in the same order, so they return identical
results; the public names dispatch on :data:`gsmemlab._accel.USE_NUMBA`.

Conventions shared by the split kernels:

* ``values`` is a feature column sorted ascending, ``y`` the 0/1 labels (or
  residuals) permuted the same way.
* A split at position ``k`` sends the first ``k`` samples left.  It is only
  valid where ``values[k - 1] < values[k]``.
* Weighted Gini of a node with ``n`` samples of which ``a`` are positive is
  ``n - (a*a + (n-a)*(n-a)) / n`` (i.e. ``n`` times the Gini index).
"""

import numpy as np

from ._accel import USE_NUMBA, jit

__all__ = [
    "best_gini_split",
    "best_lookahead_split",
    "best_sse_split",
    "tree_apply",
    "weighted_gini",
]


def weighted_gini(n, a):
    """``n`` times the Gini index of a node with ``a`` positives out of ``n``."""
    if n == 0:
        return 0.0
    n = float(n)
    a = float(a)
    b = n - a
    return n - (a * a + b * b) / n


# --------------------------------------------------------------------------
# single-level Gini split
# --------------------------------------------------------------------------

@jit
def _nb_best_gini_split(values, y):
    n = values.shape[0]
    total_pos = 0.0
    for i in range(n):
        total_pos += y[i]
    best = np.inf
    best_k = -1
    left_pos = 0.0
    for k in range(1, n):
        left_pos += y[k - 1]
        if values[k - 1] < values[k]:
            nl = float(k)
            nr = float(n - k)
            ar = total_pos - left_pos
            bl = nl - left_pos
            br = nr - ar
            imp = (nl - (left_pos * left_pos + bl * bl) / nl) + (nr - (ar * ar + br * br) / nr)
            if imp < best:
                best = imp
                best_k = k
    return best, best_k


def _np_best_gini_split(values, y):
    n = values.shape[0]
    if n < 2:
        return np.inf, -1
    cs = np.cumsum(y.astype(np.float64))
    left_pos = cs[:-1]
    total_pos = cs[-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    ar = total_pos - left_pos
    bl = nl - left_pos
    br = nr - ar
    imp = (nl - (left_pos * left_pos + bl * bl) / nl) + (nr - (ar * ar + br * br) / nr)
    imp = np.where(values[:-1] < values[1:], imp, np.inf)
    k = int(np.argmin(imp))
    if not np.isfinite(imp[k]):
        return np.inf, -1
    return float(imp[k]), k + 1


# --------------------------------------------------------------------------
# two-level (one step lookahead) Gini split
# --------------------------------------------------------------------------

@jit
def _nb_child_best(member, y_g, values_g, n_child, pos_child):
    # best weighted Gini reachable by one split (or none) of the member subset
    nc = float(n_child)
    ac = float(pos_child)
    bc = nc - ac
    best = nc - (ac * ac + bc * bc) / nc if n_child > 0 else 0.0
    n = member.shape[0]
    cl = 0.0
    al = 0.0
    for j in range(n - 1):
        if member[j]:
            cl += 1.0
            al += y_g[j]
        if values_g[j] < values_g[j + 1] and cl > 0.0 and cl < nc:
            cr = nc - cl
            ar = ac - al
            bl = cl - al
            br = cr - ar
            imp = (cl - (al * al + bl * bl) / cl) + (cr - (ar * ar + br * br) / cr)
            if imp < best:
                best = imp
    return best


@jit
def _nb_best_lookahead_split(x, y, features):
    n, d = x.shape
    orders = np.empty((d, n), dtype=np.int64)
    ranks = np.empty((d, n), dtype=np.int64)
    ys = np.empty((d, n), dtype=np.float64)
    vs = np.empty((d, n), dtype=np.float64)
    for g in range(d):
        o = np.argsort(x[:, g], kind="mergesort")
        orders[g] = o
        for r in range(n):
            ranks[g, o[r]] = r
            ys[g, r] = y[o[r]]
            vs[g, r] = x[o[r], g]
    total_pos = 0.0
    for i in range(n):
        total_pos += y[i]
    best = np.inf
    best_f = -1
    best_k = -1
    for fi in range(features.shape[0]):
        f = features[fi]
        of = orders[f]
        vf = vs[f]
        # membership of the left child, indexed by rank in each column's order
        ml = np.zeros((d, n), dtype=np.bool_)
        mr = np.ones((d, n), dtype=np.bool_)
        left_pos = 0.0
        for k in range(1, n):
            s = of[k - 1]
            left_pos += y[s]
            for g in range(d):
                ml[g, ranks[g, s]] = True
                mr[g, ranks[g, s]] = False
            if not (vf[k - 1] < vf[k]):
                continue
            lbest = np.inf
            rbest = np.inf
            for g in range(d):
                lb = _nb_child_best(ml[g], ys[g], vs[g], k, left_pos)
                rb = _nb_child_best(mr[g], ys[g], vs[g], n - k, total_pos - left_pos)
                if lb < lbest:
                    lbest = lb
                if rb < rbest:
                    rbest = rb
            total = lbest + rbest
            if total < best:
                best = total
                best_f = f
                best_k = k
    return best, best_f, best_k


def _np_child_best(member, y_g, values_g, n_child, pos_child):
    """Vectorised over rows: ``member`` is (m, n); counts are (m,)."""
    nc = n_child.astype(np.float64)
    ac = pos_child.astype(np.float64)
    bc = nc - ac
    with np.errstate(divide="ignore", invalid="ignore"):
        leaf = np.where(nc > 0, nc - (ac * ac + bc * bc) / nc, 0.0)
    mf = member[:, :-1].astype(np.float64)
    cl = np.cumsum(mf, axis=1)
    al = np.cumsum(mf * y_g[:-1].astype(np.float64), axis=1)
    ncol = nc[:, None]
    acol = ac[:, None]
    cr = ncol - cl
    ar = acol - al
    bl = cl - al
    br = cr - ar
    with np.errstate(divide="ignore", invalid="ignore"):
        imp = (cl - (al * al + bl * bl) / cl) + (cr - (ar * ar + br * br) / cr)
    ok = (values_g[:-1] < values_g[1:])[None, :] & (cl > 0.0) & (cl < ncol)
    imp = np.where(ok, imp, np.inf)
    if imp.shape[1] == 0:
        return leaf
    return np.minimum(leaf, imp.min(axis=1))


def _np_best_lookahead_split(x, y, features):
    n, d = x.shape
    yf = y.astype(np.float64)
    orders = [np.argsort(x[:, g], kind="mergesort") for g in range(d)]
    ranks = []
    for g in range(d):
        r = np.empty(n, dtype=np.int64)
        r[orders[g]] = np.arange(n)
        ranks.append(r)
    total_pos = np.cumsum(yf)[-1] if n else 0.0
    best, best_f, best_k = np.inf, -1, -1
    ks = np.arange(1, n)
    for f in features:
        f = int(f)
        of = orders[f]
        vf = x[of, f]
        valid = vf[:-1] < vf[1:]
        if not valid.any():
            continue
        kv = ks[valid]
        # left_pos[k] = positives among the first k samples in f-order
        left_pos = np.cumsum(yf[of])[kv - 1]
        lbest = np.full(kv.shape[0], np.inf)
        rbest = np.full(kv.shape[0], np.inf)
        for g in range(d):
            og = orders[g]
            # sample at g-rank j is left of cut k iff its f-rank < k
            frank_in_g = ranks[f][og]
            member = frank_in_g[None, :] < kv[:, None]
            yg = y[og]
            vg = x[og, g]
            lb = _np_child_best(member, yg, vg, kv, left_pos)
            rb = _np_child_best(~member, yg, vg, n - kv, total_pos - left_pos)
            lbest = np.minimum(lbest, lb)
            rbest = np.minimum(rbest, rb)
        total = lbest + rbest
        i = int(np.argmin(total))
        if total[i] < best:
            best, best_f, best_k = float(total[i]), f, int(kv[i])
    return best, best_f, best_k


# --------------------------------------------------------------------------
# squared-error split for regression trees
# --------------------------------------------------------------------------

@jit
def _nb_best_sse_split(values, r):
    # maximises sum_l^2/n_l + sum_r^2/n_r, i.e. minimises the child SSE
    n = values.shape[0]
    total = 0.0
    for i in range(n):
        total += r[i]
    best = -np.inf
    best_k = -1
    left = 0.0
    for k in range(1, n):
        left += r[k - 1]
        if values[k - 1] < values[k]:
            nl = float(k)
            nr = float(n - k)
            right = total - left
            gain = left * left / nl + right * right / nr
            if gain > best:
                best = gain
                best_k = k
    return best, best_k


def _np_best_sse_split(values, r):
    n = values.shape[0]
    if n < 2:
        return -np.inf, -1
    cs = np.cumsum(r)
    left = cs[:-1]
    total = cs[-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    right = total - left
    gain = left * left / nl + right * right / nr
    gain = np.where(values[:-1] < values[1:], gain, -np.inf)
    k = int(np.argmax(gain))
    if not np.isfinite(gain[k]):
        return -np.inf, -1
    return float(gain[k]), k + 1


# --------------------------------------------------------------------------
# traversal
# --------------------------------------------------------------------------

@jit
def _nb_tree_apply(x, feature, threshold, left, right, value):
    m = x.shape[0]
    out = np.empty(m, dtype=np.float64)
    for i in range(m):
        node = 0
        while feature[node] >= 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def _np_tree_apply(x, feature, threshold, left, right, value):
    m = x.shape[0]
    node = np.zeros(m, dtype=np.int64)
    rows = np.arange(m)
    while True:
        f = feature[node]
        active = f >= 0
        if not active.any():
            break
        fa = np.where(active, f, 0)
        go_left = x[rows, fa] <= threshold[node]
        nxt = np.where(go_left, left[node], right[node])
        node = np.where(active, nxt, node)
    return value[node].astype(np.float64)


if USE_NUMBA:
    _best_gini_split = _nb_best_gini_split
    _best_lookahead_split = _nb_best_lookahead_split
    _best_sse_split = _nb_best_sse_split
    _tree_apply = _nb_tree_apply
else:
    _best_gini_split = _np_best_gini_split
    _best_lookahead_split = _np_best_lookahead_split
    _best_sse_split = _np_best_sse_split
    _tree_apply = _np_tree_apply


def best_gini_split(values, y):
    """Best single split of a sorted column; returns ``(weighted_gini, k)``.

    ``k == -1`` (and ``inf``) when all values are equal.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    imp, k = _best_gini_split(values, y)
    return float(imp), int(k)


def best_lookahead_split(x, y, features):
    """Root split minimising the best achievable two-level weighted Gini.

    Children are scored with their best single split over every column of
    ``x`` (or as leaves when no split helps).  The root itself only
    considers ``features``.  Returns ``(weighted_gini, feature, k)`` where
    ``k`` counts samples left of the cut in the chosen feature's sort order.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    features = np.ascontiguousarray(features, dtype=np.int64)
    imp, f, k = _best_lookahead_split(x, y, features)
    return float(imp), int(f), int(k)


def best_sse_split(values, r):
    """Best squared-error split of a sorted column; ``(gain, k)``."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    gain, k = _best_sse_split(values, r)
    return float(gain), int(k)


def tree_apply(x, feature, threshold, left, right, value):
    """Leaf value reached by every row of ``x`` (``x <= threshold`` goes left)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _tree_apply(x, feature, threshold, left, right, value)
