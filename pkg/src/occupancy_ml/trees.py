"""CART binary trees: Gini splits for classification, variance splits for
regression. Shared by the single tree, the random forest and boosting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"

# Two split scores closer than TIE_TOL * max(1, parent impurity) are a tie;
# ties go to the lowest feature index, then the smallest threshold.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    """``max_depth=None`` grows until purity or ``min_samples_split``.

    The root sits at depth 0, so ``max_depth=1`` is a stump.
    """

    max_depth: int | None = None
    min_samples_split: int = 2
    random_state: int = 0

    def __post_init__(self):
        if self.max_depth is not None and int(self.max_depth) < 1:
            raise ValueError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if int(self.min_samples_split) < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")


@dataclass(frozen=True)
class Leaf:
    value: float
    n_samples: int


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float
    left: "Node"
    right: "Node"
    n_samples: int
    impurity_decrease: float


Node = Union[Leaf, Split]


class SplitResult(NamedTuple):
    feature_index: int
    threshold: float
    score: float


@dataclass(frozen=True)
class TrainedTree:
    root: Node
    params: TreeParams
    mode: str
    n_features: int

    @property
    def depth(self) -> int:
        return _depth(self.root)

    @property
    def n_leaves(self) -> int:
        return _count_leaves(self.root)

    def predict(self, X) -> np.ndarray:
        return predict_tree(self, X)


def _depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.left), _depth(node.right))


def _count_leaves(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    return _count_leaves(node.left) + _count_leaves(node.right)


def gini_impurity(labels) -> float:
    """``1 - p0**2 - p1**2`` for a binary label vector."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValueError("gini impurity of an empty vector is undefined")
    p1 = float(np.count_nonzero(y == 1)) / y.size
    return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)


def _node_impurity(y: np.ndarray, mode: str) -> float:
    if mode == CLASSIFICATION:
        return gini_impurity(y)
    return float(np.var(y))


def _feature_scores(col: np.ndarray, y: np.ndarray, mode: str):
    """All split candidates on one feature as (thresholds, scores), thresholds ascending."""
    order = np.argsort(col, kind="stable")
    xs = col[order]
    ys = y[order]
    n = xs.size
    cut = np.flatnonzero(xs[1:] != xs[:-1]) + 1  # left child is ys[:cut]
    if cut.size == 0:
        return np.empty(0), np.empty(0)
    n_left = cut.astype(float)
    n_right = n - n_left
    if mode == CLASSIFICATION:
        ones = np.cumsum(ys, dtype=float)
        total = ones[-1]
        p_left = ones[cut - 1] / n_left
        p_right = (total - ones[cut - 1]) / n_right
        child = (n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)) / n
        p = total / n
        parent = 2 * p * (1 - p)
    else:
        t = ys - ys.mean()
        s1 = np.cumsum(t)
        s2 = np.cumsum(t * t)
        sse_left = s2[cut - 1] - s1[cut - 1] ** 2 / n_left
        sse_right = (s2[-1] - s2[cut - 1]) - (s1[-1] - s1[cut - 1]) ** 2 / n_right
        child = (sse_left + sse_right) / n
        parent = s2[-1] / n - (s1[-1] / n) ** 2
    lo, hi = xs[cut - 1], xs[cut]
    thresholds = (lo + hi) / 2
    # adjacent floats: the midpoint can round up onto the right value
    thresholds = np.where(thresholds >= hi, lo, thresholds)
    return thresholds, parent - child


def best_split(X, targets, candidate_features=None, mode: str = CLASSIFICATION) -> SplitResult | None:
    """Best threshold split over ``candidate_features`` (all columns if None).

    Returns None when no candidate strictly reduces impurity.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.shape[0] < 2:
        return None
    features = range(X.shape[1]) if candidate_features is None else sorted(set(int(f) for f in candidate_features))
    tol = TIE_TOL * max(1.0, _node_impurity(y, mode))
    per_feature = [(f, *_feature_scores(X[:, f], y, mode)) for f in features]
    best = max((s.max() for _, _, s in per_feature if s.size), default=-np.inf)
    if best <= tol:
        return None
    for f, thr, scores in per_feature:
        hit = np.flatnonzero(scores >= best - tol)
        if hit.size:
            i = hit[0]
            return SplitResult(f, float(thr[i]), float(scores[i]))
    return None  # pragma: no cover


def fit_tree(
    X,
    targets,
    params: TreeParams = TreeParams(),
    mode: str = CLASSIFICATION,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> TrainedTree:
    """Grow a tree by recursive best splits.

    ``max_features`` limits each split to that many features drawn without
    replacement from ``rng`` (seeded from ``params.random_state`` if not
    given); None considers every feature.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if y.shape != (X.shape[0],):
        raise ValueError(f"targets shape {y.shape} does not match {X.shape[0]} rows")
    if mode not in (CLASSIFICATION, REGRESSION):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == CLASSIFICATION and not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("classification targets must be 0/1")
    n_features = X.shape[1]
    if max_features is not None and not 1 <= max_features <= n_features:
        raise ValueError(f"max_features must be in [1, {n_features}], got {max_features}")
    if max_features is not None and max_features < n_features and rng is None:
        rng = np.random.default_rng(params.random_state)

    def grow(idx: np.ndarray, depth: int) -> Node:
        ys = y[idx]
        leaf = Leaf(float(ys.mean()), int(idx.size))
        if params.max_depth is not None and depth >= params.max_depth:
            return leaf
        if idx.size < params.min_samples_split or _node_impurity(ys, mode) == 0.0:
            return leaf
        if max_features is None or max_features == n_features:
            candidates = None
        else:
            candidates = rng.choice(n_features, size=max_features, replace=False)
        split = best_split(X[idx], ys, candidates, mode)
        if split is None:
            return leaf
        go_left = X[idx, split.feature_index] <= split.threshold
        return Split(
            split.feature_index,
            split.threshold,
            grow(idx[go_left], depth + 1),
            grow(idx[~go_left], depth + 1),
            int(idx.size),
            split.score,
        )

    root = grow(np.arange(X.shape[0]), 0)
    return TrainedTree(root, params, mode, n_features)


def predict_tree(tree: TrainedTree, X) -> np.ndarray:
    """Leaf value for every row; rows go left iff ``x[f] <= threshold``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValueError(f"expected {tree.n_features} feature columns, got shape {X.shape}")
    out = np.empty(X.shape[0])
    stack = [(tree.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.value
            continue
        go_left = X[idx, node.feature_index] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


def classify_tree(tree: TrainedTree, X) -> np.ndarray:
    """Class 1 where the leaf's class-1 fraction exceeds 0.5."""
    return (predict_tree(tree, X) > 0.5).astype(np.int64)


def export_text(tree: TrainedTree, feature_names=None) -> str:
    """Indented human-readable dump, for debugging only."""
    names = list(feature_names) if feature_names is not None else [f"x[{i}]" for i in range(tree.n_features)]
    lines: list[str] = []

    def walk(node: Node, indent: str) -> None:
        if isinstance(node, Leaf):
            lines.append(f"{indent}leaf value={node.value:.6g} n={node.n_samples}")
            return
        name = names[node.feature_index]
        lines.append(f"{indent}if {name} <= {node.threshold:.6g}:  (n={node.n_samples})")
        walk(node.left, indent + "    ")
        lines.append(f"{indent}else:  # {name} > {node.threshold:.6g}")
        walk(node.right, indent + "    ")

    walk(tree.root, "")
    return "\n".join(lines) + "\n"
