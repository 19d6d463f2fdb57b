"""Array-backed binary decision trees and a CART builder.

A row goes to the left child when ``x[feature] <= threshold``. Every node
records its training ``cover`` (rows reaching it, with bootstrap
multiplicity), which TreeSHAP uses as marginalization weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

LEAF = -1


@dataclass
class TreeNode:
    """Nested view of one node, used for JSON export."""

    cover: float
    value: float
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": True, "value": float(self.value), "cover": float(self.cover)}
        return {
            "leaf": False,
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "value": float(self.value),
            "cover": float(self.cover),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if d["leaf"]:
            return cls(cover=d["cover"], value=d["value"])
        return cls(
            cover=d["cover"],
            value=d["value"],
            feature=d["feature"],
            threshold=d["threshold"],
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


@dataclass
class Tree:
    feature: np.ndarray  # LEAF for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray

    def __post_init__(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.value = np.asarray(self.value, dtype=float)
        self.cover = np.asarray(self.cover, dtype=float)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] == LEAF

    @property
    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if not self.is_leaf(node):
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active[idx] = self.feature[node[idx]] != LEAF
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def used_features(self) -> set[int]:
        return {int(f) for f in self.feature if f != LEAF}

    def to_node(self, node: int = 0) -> TreeNode:
        if self.is_leaf(node):
            return TreeNode(cover=float(self.cover[node]), value=float(self.value[node]))
        return TreeNode(
            cover=float(self.cover[node]),
            value=float(self.value[node]),
            feature=int(self.feature[node]),
            threshold=float(self.threshold[node]),
            left=self.to_node(int(self.left[node])),
            right=self.to_node(int(self.right[node])),
        )

    @classmethod
    def from_node(cls, root: TreeNode) -> "Tree":
        cols = {k: [] for k in ("feature", "threshold", "left", "right", "value", "cover")}

        def visit(n: TreeNode) -> int:
            i = len(cols["feature"])
            for k in cols:
                cols[k].append(0)
            cols["value"][i], cols["cover"][i] = n.value, n.cover
            if n.is_leaf:
                cols["feature"][i], cols["threshold"][i] = LEAF, 0.0
                cols["left"][i] = cols["right"][i] = LEAF
            else:
                cols["feature"][i], cols["threshold"][i] = n.feature, n.threshold
                cols["left"][i] = visit(n.left)
                cols["right"][i] = visit(n.right)
            return i

        visit(root)
        return cls(**cols)

    def to_dict(self) -> dict:
        return self.to_node().to_dict()

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls.from_node(TreeNode.from_dict(d))


# Split criteria. Each maps left-child statistics (count n_l, sum s_l, sum
# of squares q_l) and parent totals to a gain; the best split maximizes it.
# Callers guarantee 0 < n_l < n.


def gain_mse(nl, sl, ql, n, s, q):
    """Weighted variance reduction: parent variance minus count-weighted child variances."""
    nr, sr, qr = n - nl, s - sl, q - ql
    sse_parent = q - s * s / n
    return (sse_parent - (ql - sl * sl / nl) - (qr - sr * sr / nr)) / n


def gain_friedman_mse(nl, sl, ql, n, s, q):
    nr, sr = n - nl, s - sl
    diff = sl / nl - sr / nr
    return nl * nr / n * diff * diff


def gain_gini(nl, sl, ql, n, s, q):
    """Reduction in count-weighted Gini impurity, ``m * gini = 2 pos (m - pos) / m``, for 0/1 targets."""
    nr, sr = n - nl, s - sl
    return 2.0 * (s * (n - s) / n - sl * (nl - sl) / nl - sr * (nr - sr) / nr)


CRITERIA = {"mse": gain_mse, "friedman_mse": gain_friedman_mse, "gini": gain_gini}


def _best_split(X, target, rows, features, criterion, min_samples_leaf):
    n = len(rows)
    y = target[rows]
    s_tot, q_tot = y.sum(), (y * y).sum()
    best = (0.0, None, None)  # gain, feature, threshold
    n_left = np.arange(1, n, dtype=float)
    inner = slice(min_samples_leaf - 1, n - min_samples_leaf)
    for f in features:
        xs = X[rows, f]
        order = np.argsort(xs, kind="stable")
        xs, ys = xs[order], y[order]
        cand = np.flatnonzero(xs[1:] > xs[:-1])
        cand = cand[(cand >= inner.start) & (cand < inner.stop)]
        if len(cand) == 0:
            continue
        cs, cq = np.cumsum(ys)[cand], np.cumsum(ys * ys)[cand]
        gains = criterion(n_left[cand], cs, cq, float(n), s_tot, q_tot)
        k = int(np.argmax(gains))
        if gains[k] > best[0]:
            pos = cand[k]
            lo, hi = xs[pos], xs[pos + 1]
            thr = 0.5 * (lo + hi)
            if not lo <= thr < hi:
                thr = lo
            best = (float(gains[k]), int(f), float(thr))
    return best


def build_tree(
    X: np.ndarray,
    target: np.ndarray,
    *,
    criterion: str,
    leaf_value: Callable[[np.ndarray], float],
    max_depth: int | None = None,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    rows: np.ndarray | None = None,
) -> Tree:
    """Grow a CART tree depth-first (preorder node numbering).

    ``rows`` selects (possibly repeated) training rows, e.g. a bootstrap draw.
    ``leaf_value`` maps the rows reaching a node to its stored value.
    ``max_features`` < d draws a fresh random feature subset per node.
    """
    gain = CRITERIA[criterion]
    d = X.shape[1]
    target = np.asarray(target, dtype=float)
    rows = np.arange(len(X)) if rows is None else np.asarray(rows)
    nodes: list[list] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node = len(nodes)
        nodes.append([LEAF, 0.0, LEAF, LEAF, float(leaf_value(idx)), float(len(idx))])
        if (max_depth is not None and depth >= max_depth) or len(idx) < 2 * min_samples_leaf:
            return node
        y = target[idx]
        if y.max() == y.min():
            return node
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = range(d)
        g, f, thr = _best_split(X, target, idx, feats, gain, min_samples_leaf)
        if f is None and max_features is not None and max_features < d:
            # like CART forests: keep looking past the subset when it has no usable split
            rest = np.setdiff1d(np.arange(d), feats)
            g, f, thr = _best_split(X, target, idx, rest, gain, min_samples_leaf)
        if f is None or not g > 0:
            return node
        go_left = X[idx, f] <= thr
        nodes[node][0], nodes[node][1] = f, thr
        nodes[node][2] = grow(idx[go_left], depth + 1)
        nodes[node][3] = grow(idx[~go_left], depth + 1)
        return node

    grow(rows, 0)
    cols = list(zip(*nodes))
    return Tree(*cols)
