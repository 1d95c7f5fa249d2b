"""Regression trees and the two ensembles built on them.

Trees live in flat parallel arrays (feature, threshold, children, value) so
prediction is a vectorized descent and serialization is plain lists. Split
search is an exact scan: every feature candidate is sorted once per node and
all admissible thresholds are scored with prefix sums. Ties are broken toward
the lowest feature index, then the lowest threshold, which pins tree shape
for a given seed.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError

_NO_DEPTH_CAP = 1 << 30


class RegressionTree:
    """Binary tree over one float matrix; rows with x <= threshold go left."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            at = node[rows]
            go_left = X[rows, self.feature[at]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])
            active = self.feature[node] >= 0
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        return cls(data["feature"], data["threshold"], data["left"],
                   data["right"], data["value"])


def _best_split(X, y_node, idx, candidates, min_child):
    """Exact scan over sorted values; returns (feature, threshold, left_mask)
    or None when no admissible split exists."""
    n = len(idx)
    best_gain = -np.inf
    best = None
    counts = np.arange(1, n)
    for fi in candidates:
        vals = X[idx, fi]
        order = np.argsort(vals)
        v = vals[order]
        cum = np.cumsum(y_node[order])
        total = cum[-1]
        ok = (v[1:] > v[:-1]) & (counts >= min_child) & (n - counts >= min_child)
        if not ok.any():
            continue
        pos = np.flatnonzero(ok)
        n_left = counts[pos]
        s_left = cum[:-1][pos]
        # within-node SSE drop, up to the constant total**2/n
        gain = s_left * s_left / n_left + (total - s_left) ** 2 / (n - n_left)
        local = int(np.argmax(gain))
        if gain[local] > best_gain:
            best_gain = float(gain[local])
            cut = pos[local]
            best = (fi, 0.5 * (v[cut] + v[cut + 1]), order[:cut + 1])
    if best is None:
        return None
    fi, threshold, left_order = best
    left_idx = idx[left_order]
    mask = np.zeros(n, dtype=bool)
    mask[left_order] = True
    right_idx = idx[~mask]
    return fi, threshold, left_idx, right_idx


def grow_tree(X, y, *, rng=None, max_depth=None, min_child: int = 1,
              mtry=None) -> RegressionTree:
    """Greedy variance-reduction tree.

    ``min_child`` is the smallest sample count allowed in a child node;
    ``mtry`` draws that many feature candidates per node without replacement
    (all features when None).
    """
    n, p = X.shape
    if mtry is not None and not 1 <= mtry <= p:
        raise DataError(f"mtry must be in [1, {p}], got {mtry}")
    depth_cap = _NO_DEPTH_CAP if max_depth is None else max_depth
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(n), 0)]
    while stack:
        nid, idx, depth = stack.pop()
        y_node = y[idx]
        value[nid] = float(y_node.mean())
        if depth >= depth_cap or len(idx) < 2 * min_child:
            continue
        if y_node.min() == y_node.max():
            continue
        if mtry is None or mtry == p:
            candidates = range(p)
        else:
            candidates = np.sort(rng.choice(p, size=mtry, replace=False))
        split = _best_split(X, y_node, idx, candidates, min_child)
        if split is None:
            continue
        fi, thr, left_idx, right_idx = split
        lid = new_node()
        rid = new_node()
        feature[nid] = int(fi)
        threshold[nid] = float(thr)
        left[nid] = lid
        right[nid] = rid
        stack.append((rid, right_idx, depth + 1))
        stack.append((lid, left_idx, depth + 1))
    return RegressionTree(feature, threshold, left, right, value)


def _check_training_arrays(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise DataError(f"bad training shapes {X.shape} / {y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("training data contains non-finite values")
    return X, y


class RandomForest:
    """Bagged variance-reduction trees with per-node feature sampling.

    Each tree sees a bootstrap resample (with replacement, original size) and
    draws ``mtry`` feature candidates per split. Prediction is the plain mean
    over trees. Out-of-bag predictions are collected during fit; samples that
    every tree saw stay NaN there.
    """

    def __init__(self, n_trees: int = 500, mtry: int = 4, min_leaf: int = 5,
                 seed: int = 0):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_leaf = min_leaf
        self.seed = seed

    def get_params(self) -> dict:
        return {"n_trees": self.n_trees, "mtry": self.mtry,
                "min_leaf": self.min_leaf, "seed": self.seed}

    def set_params(self, **params) -> "RandomForest":
        for key, value in params.items():
            if key not in self.get_params():
                raise DataError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, X, y) -> "RandomForest":
        X, y = _check_training_arrays(X, y)
        n, p = X.shape
        if self.n_trees < 1:
            raise DataError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_leaf < 1:
            raise DataError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if not 1 <= self.mtry <= p:
            raise DataError(f"mtry {self.mtry} exceeds the feature count {p}")
        if n < 2 * self.min_leaf:
            raise DataError(f"need at least {2 * self.min_leaf} rows, got {n}")

        self.trees_ = []
        oob_sum = np.zeros(n)
        oob_count = np.zeros(n, dtype=np.int64)
        for t in range(self.n_trees):
            # one stream per tree: growth never depends on fit order
            rng = np.random.default_rng([self.seed, t])
            sample = rng.integers(0, n, size=n)
            tree = grow_tree(X[sample], y[sample], rng=rng, max_depth=None,
                             min_child=self.min_leaf, mtry=self.mtry)
            self.trees_.append(tree)
            outside = np.ones(n, dtype=bool)
            outside[sample] = False
            if outside.any():
                oob_sum[outside] += tree.predict(X[outside])
                oob_count[outside] += 1

        covered = oob_count > 0
        self.oob_prediction_ = np.full(n, np.nan)
        self.oob_prediction_[covered] = oob_sum[covered] / oob_count[covered]
        if covered.any():
            err = self.oob_prediction_[covered] - y[covered]
            self.oob_rmse_ = float(np.sqrt(np.mean(err ** 2)))
        else:
            self.oob_rmse_ = float("nan")
        self.n_features_ = p
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not hasattr(self, "trees_"):
            raise DataError("model is not fitted")
        if X.shape[1] != self.n_features_:
            raise DataError(f"expected {self.n_features_} features, got {X.shape[1]}")
        total = np.zeros(len(X))
        for tree in self.trees_:
            total += tree.predict(X)
        return total / len(self.trees_)


class GradientBoostedTrees:
    """Stagewise least-squares boosting with depth-capped trees.

    Starts from the target mean, fits each stage to the current residuals on
    a without-replacement subsample, and adds ``shrinkage`` times the stage
    output. Prediction is base_score + shrinkage * sum of tree outputs.
    """

    def __init__(self, n_trees: int = 100, max_depth: int = 9,
                 shrinkage: float = 0.1, min_node: int = 10,
                 subsample: float = 0.5, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.shrinkage = shrinkage
        self.min_node = min_node
        self.subsample = subsample
        self.seed = seed

    def get_params(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "shrinkage": self.shrinkage, "min_node": self.min_node,
                "subsample": self.subsample, "seed": self.seed}

    def set_params(self, **params) -> "GradientBoostedTrees":
        for key, value in params.items():
            if key not in self.get_params():
                raise DataError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, X, y) -> "GradientBoostedTrees":
        X, y = _check_training_arrays(X, y)
        n, p = X.shape
        if not 0.0 < self.shrinkage <= 1.0:
            raise DataError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if not 0.0 < self.subsample <= 1.0:
            raise DataError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.n_trees < 1:
            raise DataError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise DataError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_node < 1:
            raise DataError(f"min_node must be >= 1, got {self.min_node}")
        if n < 2 * self.min_node:
            raise DataError(f"need at least {2 * self.min_node} rows, got {n}")

        self.base_score_ = float(y.mean())
        self.trees_ = []
        current = np.full(n, self.base_score_)
        m = max(1, int(self.subsample * n))
        for stage in range(self.n_trees):
            rng = np.random.default_rng([self.seed, stage])
            if m < n:
                sample = np.sort(rng.choice(n, size=m, replace=False))
            else:
                sample = np.arange(n)
            residual = y - current
            tree = grow_tree(X[sample], residual[sample], rng=rng,
                             max_depth=self.max_depth, min_child=self.min_node,
                             mtry=None)
            self.trees_.append(tree)
            current += self.shrinkage * tree.predict(X)
        self.n_features_ = p
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not hasattr(self, "trees_"):
            raise DataError("model is not fitted")
        if X.shape[1] != self.n_features_:
            raise DataError(f"expected {self.n_features_} features, got {X.shape[1]}")
        total = np.zeros(len(X))
        for tree in self.trees_:
            total += tree.predict(X)
        return self.base_score_ + self.shrinkage * total
