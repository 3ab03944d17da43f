"""Single-view decision-tree voters trained under an example distribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "Leaf",
    "Split",
    "WeakVoter",
    "as_distribution",
    "uniform_distribution",
    "train_tree",
    "weighted_error",
]

# Scores closer than this are treated as ties (lowest feature, then lowest threshold wins).
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Leaf:
    label: int


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


def _predict_node(node: Node, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[rows] = node.label
        return
    go_left = X[rows, node.feature] <= node.threshold
    _predict_node(node.left, X, rows[go_left], out)
    _predict_node(node.right, X, rows[~go_left], out)


def _node_depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_node_depth(node.left), _node_depth(node.right))


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "leaf" in d:
        label = int(d["leaf"])
        if label not in (-1, 1):
            raise ValueError(f"leaf label {label} is not -1 or +1")
        return Leaf(label)
    return Split(
        int(d["feature"]),
        float(d["threshold"]),
        _node_from_dict(d["left"]),
        _node_from_dict(d["right"]),
    )


def _max_feature(node: Node) -> int:
    if isinstance(node, Leaf):
        return -1
    return max(node.feature, _max_feature(node.left), _max_feature(node.right))


@dataclass(frozen=True)
class WeakVoter:
    """A depth-limited tree over one view; goes left iff ``x[feature] <= threshold``."""

    view_index: int
    tree: Node
    depth: int
    n_features: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if _node_depth(self.tree) > self.depth:
            raise ValueError("tree is deeper than its declared depth")
        if _max_feature(self.tree) >= self.n_features:
            raise ValueError("split feature out of range for this view")

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"voter expects {self.n_features} features, got {X.shape[1]}"
            )
        out = np.empty(X.shape[0], dtype=np.int64)
        _predict_node(self.tree, X, np.arange(X.shape[0]), out)
        return out

    def to_dict(self) -> dict:
        return {
            "view": self.view_index,
            "depth": self.depth,
            "n_features": self.n_features,
            "tree": _node_to_dict(self.tree),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeakVoter":
        return cls(int(d["view"]), _node_from_dict(d["tree"]), int(d["depth"]), int(d["n_features"]))


def uniform_distribution(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def as_distribution(weights, n: Optional[int] = None) -> np.ndarray:
    """Validate a weight vector over examples: nonnegative, summing to one."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    if n is not None and w.shape[0] != n:
        raise ValueError(f"distribution has {w.shape[0]} weights, expected {n}")
    if w.shape[0] == 0:
        raise ValueError("empty distribution")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("distribution weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {w.sum()!r}, not 1")
    return w


def _majority(pos: float, neg: float) -> int:
    return 1 if pos >= neg else -1


def _candidate_splits(X: np.ndarray, wpos: np.ndarray, wneg: np.ndarray):
    """Cumulative class masses left of every admissible cut, per feature.

    Row ``k`` of the returned arrays describes the cut between sorted
    positions ``k`` and ``k + 1``; ``valid`` marks cuts between distinct values.
    """
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    lp = np.cumsum(wpos[order], axis=0)[:-1]
    ln = np.cumsum(wneg[order], axis=0)[:-1]
    lo, hi = xs[:-1], xs[1:]
    valid = lo < hi
    thresholds = lo + (hi - lo) / 2.0
    # adjacent floats: the midpoint may round up onto the right value
    thresholds = np.where(thresholds >= hi, lo, thresholds)
    return lp, ln, thresholds, valid


def _pick(score: np.ndarray, valid: np.ndarray):
    """Lowest-score cut; ties go to the lowest feature, then the lowest threshold."""
    score = np.where(valid, score, np.inf)
    best = score.min()
    if not np.isfinite(best):
        return None
    hit = score <= best + TIE_TOL
    feature = int(np.argmax(hit.any(axis=0)))
    row = int(np.argmax(hit[:, feature]))
    return row, feature, float(score[row, feature])


def _best_stump(X, y, w):
    wpos = np.where(y > 0, w, 0.0)
    wneg = np.where(y > 0, 0.0, w)
    P, N = wpos.sum(), wneg.sum()
    leaf = Leaf(_majority(P, N))
    leaf_err = N if leaf.label > 0 else P
    if X.shape[0] < 2:
        return leaf
    lp, ln, thr, valid = _candidate_splits(X, wpos, wneg)
    rp, rn = P - lp, N - ln
    # each side takes its weighted-majority label, which realizes the best polarity
    err = np.where(lp >= ln, ln, lp) + np.where(rp >= rn, rn, rp)
    picked = _pick(err, valid)
    if picked is None:
        return leaf
    row, j, best = picked
    if best >= leaf_err - TIE_TOL:
        return leaf
    return Split(
        j,
        float(thr[row, j]),
        Leaf(_majority(lp[row, j], ln[row, j])),
        Leaf(_majority(rp[row, j], rn[row, j])),
    )


def _gini_tree(X, y, w, depth):
    wpos = np.where(y > 0, w, 0.0)
    wneg = np.where(y > 0, 0.0, w)
    P, N = wpos.sum(), wneg.sum()
    leaf = Leaf(_majority(P, N))
    if depth == 0 or X.shape[0] < 2 or P == 0 or N == 0:
        return leaf
    lp, ln, thr, valid = _candidate_splits(X, wpos, wneg)
    rp, rn = P - lp, N - ln
    # weighted Gini mass of a child with class masses (a, b) is 2ab / (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(lp + ln > 0, 2 * lp * ln / (lp + ln), 0.0)
        right = np.where(rp + rn > 0, 2 * rp * rn / (rp + rn), 0.0)
    picked = _pick(left + right, valid)
    parent = 2 * P * N / (P + N)
    if picked is None or picked[2] >= parent - TIE_TOL:
        return leaf
    row, j, _ = picked
    t = float(thr[row, j])
    go_left = X[:, j] <= t
    return Split(
        j,
        t,
        _gini_tree(X[go_left], y[go_left], w[go_left], depth - 1),
        _gini_tree(X[~go_left], y[~go_left], w[~go_left], depth - 1),
    )


def train_tree(X, y, dist, max_depth: int = 1, view_index: int = 0) -> WeakVoter:
    """Fit a tree voter on one view under the example weights ``dist``.

    With ``max_depth=1`` the stump is the exact minimizer of weighted 0-1
    error over every (feature, midpoint threshold, polarity) and the two
    constant voters. Deeper trees grow greedily on weighted Gini impurity.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-D feature matrix")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    w = as_distribution(dist, X.shape[0])
    if y.shape[0] != X.shape[0]:
        raise ValueError("labels and features disagree on the number of examples")
    if max_depth == 1:
        tree = _best_stump(X, y, w)
    else:
        tree = _gini_tree(X, y, w, max_depth)
    return WeakVoter(view_index, tree, max_depth, X.shape[1])


def weighted_error(voter: WeakVoter, X, y, dist) -> float:
    """Distribution mass of the examples ``voter`` gets wrong."""
    y = np.asarray(y).ravel()
    w = as_distribution(dist, y.shape[0])
    pred = voter.predict(X)
    if pred.shape[0] != y.shape[0]:
        raise ValueError("labels and features disagree on the number of examples")
    return float(np.clip(w[pred != y].sum(), 0.0, 1.0))
