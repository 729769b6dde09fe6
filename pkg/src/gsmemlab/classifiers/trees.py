"""CART classification trees, random forests and gradient-boosted trees.

Trees are stored as flat node arrays (preorder, left child first) so that
traversal can run in a compiled kernel.  A sample goes left when
``x[feature] <= threshold``.

Split search for classification trees minimises weighted Gini.  Thresholds
are midpoints between consecutive distinct sorted values; ties go to the
lowest feature index, then the smallest threshold.  At nodes exactly two
levels above the depth limit the split is chosen by one-step lookahead: each
candidate is scored by the best weighted Gini its children can reach with
one further split.  The bottom two levels of every tree are thus jointly
optimal, and so is any tree of depth <= 2, which a purely greedy search does
not guarantee (XOR-like layouts have no useful first split).
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .base import sigmoid

# a split must lower impurity by more than this to be kept
_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray    # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # attack fraction (classification) or leaf output
    n_samples: np.ndarray

    def apply(self, x):
        return kernels.tree_apply(x, self.feature, self.threshold,
                                  self.left, self.right, self.value)

    @property
    def n_nodes(self):
        return self.feature.size

    def depth(self):
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def leaves(self):
        return np.flatnonzero(self.feature < 0)

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in
                ("feature", "threshold", "left", "right", "value", "n_samples")}

    @classmethod
    def from_dict(cls, d):
        ints = ("feature", "left", "right", "n_samples")
        return cls(**{k: np.array(v, dtype=np.int64 if k in ints else np.float64)
                      for k, v in d.items()})


class _Builder:
    def __init__(self):
        self.feature, self.threshold = [], []
        self.left, self.right = [], []
        self.value, self.n_samples = [], []

    def add(self, value, n):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        self.n_samples.append(int(n))
        return len(self.feature) - 1

    def truncate(self, size):
        for lst in (self.feature, self.threshold, self.left, self.right,
                    self.value, self.n_samples):
            del lst[size:]

    def finish(self):
        return Tree(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=np.float64),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.array(self.value, dtype=np.float64),
            np.array(self.n_samples, dtype=np.int64),
        )


def _midpoint(lo, hi):
    t = 0.5 * (lo + hi)
    # adjacent floats: the midpoint may round up onto ``hi``
    return t if t < hi else lo


def _feature_subset(n_features, max_features, rng):
    if rng is None or max_features >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=max_features, replace=False))


def build_classification_tree(x, y, max_depth, max_features=None, rng=None,
                              lookahead=True):
    """Grow a CART tree on 0/1 labels.

    ``rng`` draws the ``max_features`` columns eligible at each node; with
    ``rng=None`` every column is eligible.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = x.shape[1]
    max_features = d if max_features is None else max_features
    b = _Builder()

    def grow(idx, depth):
        # returns (node id, weighted Gini of the subtree's leaves)
        n = idx.size
        a = float(y[idx].sum())
        node = b.add(a / n, n)
        leaf_imp = kernels.weighted_gini(n, a)
        if depth >= max_depth or a == 0.0 or a == n:
            return node, leaf_imp
        feats = _feature_subset(d, max_features, rng)
        xn, yn = x[idx], y[idx]
        if lookahead and max_depth - depth == 2:
            imp, f, k = kernels.best_lookahead_split(xn, yn, feats)
        else:
            imp, f, k = np.inf, -1, -1
            for g in feats:
                order = np.argsort(xn[:, g], kind="mergesort")
                gi, gk = kernels.best_gini_split(xn[order, g], yn[order])
                if gi < imp:
                    imp, f, k = gi, int(g), gk
        if f < 0 or not imp < leaf_imp - _TOL:
            return node, leaf_imp
        col = np.sort(xn[:, f], kind="mergesort")
        thr = _midpoint(col[k - 1], col[k])
        go_left = xn[:, f] <= thr
        size = len(b.feature)
        lnode, limp = grow(idx[go_left], depth + 1)
        rnode, rimp = grow(idx[~go_left], depth + 1)
        sub_imp = limp + rimp
        if not sub_imp < leaf_imp - _TOL:
            # only reachable when the children drew other columns than the
            # lookahead assumed
            b.truncate(size)
            return node, leaf_imp
        b.feature[node] = int(f)
        b.threshold[node] = float(thr)
        b.left[node] = lnode
        b.right[node] = rnode
        return node, sub_imp

    if x.shape[0] == 0:
        raise ValueError("cannot grow a tree on no samples")
    grow(np.arange(x.shape[0]), 0)
    return b.finish()


def build_regression_tree(x, r, max_depth):
    """Least-squares tree on targets ``r``; leaf value = mean target."""
    x = np.asarray(x, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    d = x.shape[1]
    b = _Builder()

    def grow(idx, depth):
        n = idx.size
        rn = r[idx]
        s = float(rn.sum())
        node = b.add(s / n, n)
        if depth >= max_depth or n < 2:
            return node
        xn = x[idx]
        gain, f, k = -np.inf, -1, -1
        for g in range(d):
            order = np.argsort(xn[:, g], kind="mergesort")
            gg, gk = kernels.best_sse_split(xn[order, g], rn[order])
            if gg > gain:
                gain, f, k = gg, g, gk
        # gain - s^2/n is the SSE reduction
        if f < 0 or not gain - s * s / n > _TOL:
            return node
        col = np.sort(xn[:, f], kind="mergesort")
        thr = _midpoint(col[k - 1], col[k])
        go_left = xn[:, f] <= thr
        lnode = grow(idx[go_left], depth + 1)
        rnode = grow(idx[~go_left], depth + 1)
        b.feature[node] = int(f)
        b.threshold[node] = float(thr)
        b.left[node] = lnode
        b.right[node] = rnode
        return node

    grow(np.arange(x.shape[0]), 0)
    return b.finish()


def training_gini(tree):
    """Weighted Gini summed over the leaves of a classification tree."""
    leaves = tree.leaves()
    n = tree.n_samples[leaves].astype(np.float64)
    a = tree.value[leaves] * n
    return float(sum(kernels.weighted_gini(ni, round(ai)) for ni, ai in zip(n, a)))


@dataclass(frozen=True, eq=False)
class DecisionTreeModel:
    tree: Tree

    tag = "DT"

    def scores(self, x):
        return self.tree.apply(x)

    def params(self):
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_params(cls, p):
        return cls(Tree.from_dict(p["tree"]))


def train_decision_tree(config, x, y):
    return DecisionTreeModel(build_classification_tree(
        x, y, config.max_depth, max_features=x.shape[1]))


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    """Majority vote; the score is the fraction of trees voting attack."""

    trees: tuple
    tree_seeds: tuple

    tag = "RF"

    def scores(self, x):
        votes = np.zeros(np.asarray(x).shape[0])
        for t in self.trees:
            votes += t.apply(x) > 0.5
        return votes / len(self.trees)

    def params(self):
        return {"trees": [t.to_dict() for t in self.trees],
                "tree_seeds": list(self.tree_seeds)}

    @classmethod
    def from_params(cls, p):
        return cls(tuple(Tree.from_dict(t) for t in p["trees"]),
                   tuple(int(s) for s in p["tree_seeds"]))


def tree_seeds(seed, count):
    return tuple(int(s) for s in
                 np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64))


def _fit_forest_tree(config, x, y, tree_seed):
    rng = np.random.default_rng(tree_seed)
    n = x.shape[0]
    if config.bootstrap:
        idx = rng.integers(0, n, n)
        xb, yb = x[idx], y[idx]
    else:
        xb, yb = x, y
    return build_classification_tree(xb, yb, config.max_depth,
                                     max_features=config.max_features, rng=rng)


def train_random_forest(config, x, y, executor=None):
    """Trees are independent given their pre-assigned seeds, so ``executor``
    (any ``concurrent.futures`` executor) does not change the result."""
    seeds = tree_seeds(config.seed, config.n_trees)
    if executor is None:
        trees = [_fit_forest_tree(config, x, y, s) for s in seeds]
    else:
        trees = list(executor.map(lambda s: _fit_forest_tree(config, x, y, s), seeds))
    return RandomForestModel(tuple(trees), seeds)


@dataclass(frozen=True, eq=False)
class BoostedTreesModel:
    trees: tuple
    shrinkage: float
    init_log_odds: float

    tag = "BT"

    def staged_log_odds(self, x):
        """Log-odds after 0, 1, ..., len(trees) rounds."""
        f = np.full(np.asarray(x).shape[0], self.init_log_odds)
        yield f.copy()
        for t in self.trees:
            f = f + t.apply(x)
            yield f.copy()

    def log_odds(self, x):
        f = np.full(np.asarray(x).shape[0], self.init_log_odds)
        for t in self.trees:
            f = f + t.apply(x)
        return f

    def scores(self, x):
        return sigmoid(self.log_odds(x))

    def params(self):
        return {"trees": [t.to_dict() for t in self.trees],
                "shrinkage": self.shrinkage, "init_log_odds": self.init_log_odds}

    @classmethod
    def from_params(cls, p):
        return cls(tuple(Tree.from_dict(t) for t in p["trees"]),
                   float(p["shrinkage"]), float(p["init_log_odds"]))


def logistic_loss(f, y):
    """Mean logistic loss of log-odds ``f`` against 0/1 labels."""
    return float(np.mean(np.logaddexp(0.0, f) - y * f))


def _leaf_step(f, y, newton, max_halvings=60):
    # largest step newton / 2^j that does not raise the leaf's loss
    base = np.sum(np.logaddexp(0.0, f) - y * f)
    step = newton
    for _ in range(max_halvings):
        g = f + step
        if np.sum(np.logaddexp(0.0, g) - y * g) <= base:
            return step
        step *= 0.5
    return 0.0


def train_boosted_trees(config, x, y):
    """Gradient boosting on the logistic loss.

    Each round fits a least-squares tree to the residuals ``y - p`` and sets
    every leaf to ``shrinkage`` times the Newton step ``sum(r) / sum(p(1-p))``,
    halved until the leaf's loss does not increase.  Training loss is
    therefore non-increasing from round to round.
    """
    yf = y.astype(np.float64)
    prior = yf.mean()
    init = float(np.log(prior / (1.0 - prior)))
    f = np.full(yf.shape[0], init)
    trees = []
    for _ in range(config.rounds):
        p = sigmoid(f)
        resid = yf - p
        tree = build_regression_tree(x, resid, config.max_depth)
        leaf_of = kernels.tree_apply(
            x, tree.feature, tree.threshold, tree.left, tree.right,
            np.arange(tree.n_nodes, dtype=np.float64)).astype(np.int64)
        value = np.zeros(tree.n_nodes)
        for leaf in tree.leaves():
            m = leaf_of == leaf
            hess = max(float(np.sum(p[m] * (1.0 - p[m]))), 1e-12)
            newton = config.shrinkage * float(np.sum(resid[m])) / hess
            value[leaf] = _leaf_step(f[m], yf[m], newton)
        tree = Tree(tree.feature, tree.threshold, tree.left, tree.right,
                    value, tree.n_samples)
        f = f + value[leaf_of]
        trees.append(tree)
    return BoostedTreesModel(tuple(trees), float(config.shrinkage), init)
