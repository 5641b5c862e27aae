"""Native estimators used by the search roster.

Every model exposes ``fit(X, y)``, ``predict(X)`` and a JSON-friendly
``params()`` / ``from_params`` pair so a fitted model can be rebuilt
bit-for-bit from an artifact. Classification targets are integer class
ids ``0..n_classes-1``.
"""

from __future__ import annotations

import numpy as np

LOGISTIC_LEARNING_RATE = 0.1
LOGISTIC_EPOCHS = 200


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                           l2: float) -> tuple[float, np.ndarray, float]:
    """Mean binary cross-entropy plus ``l2/2 * ||w||^2`` (bias unpenalized).

    Returns (loss, dloss/dw, dloss/db).
    """
    n = X.shape[0]
    z = X @ w + b
    # log(1 + exp(z)) - y*z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w))
    residual = sigmoid(z) - y
    grad_w = X.T @ residual / n + l2 * w
    grad_b = float(np.sum(residual) / n)
    return loss, grad_w, grad_b


class LogisticRegression:
    """L2-regularized logistic regression, full-batch gradient descent.

    Two classes train one binary model for class 1; more classes train one
    model per class (one-vs-rest) and predict the highest probability.
    A single class degenerates to a constant predictor.
    """

    kind = "LogisticRegression"

    def __init__(self, l2: float = 0.0, n_classes: int = 2):
        self.l2 = float(l2)
        self.n_classes = int(n_classes)
        self.weights: np.ndarray | None = None  # (n_models, n_features)
        self.biases: np.ndarray | None = None

    def _binary_fit(self, X, target):
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(LOGISTIC_EPOCHS):
            _, gw, gb = logistic_loss_and_grad(w, b, X, target, self.l2)
            w = w - LOGISTIC_LEARNING_RATE * gw
            b = b - LOGISTIC_LEARNING_RATE * gb
        return w, b

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        if self.n_classes < 2:
            self.weights = np.zeros((0, X.shape[1]))
            self.biases = np.zeros(0)
            return self
        if self.n_classes == 2:
            targets = [(y == 1).astype(np.float64)]
        else:
            targets = [(y == c).astype(np.float64) for c in range(self.n_classes)]
        fitted = [self._binary_fit(X, t) for t in targets]
        self.weights = np.array([w for w, _ in fitted])
        self.biases = np.array([b for _, b in fitted])
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(X @ self.weights.T + self.biases)

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.n_classes < 2:
            return np.zeros(X.shape[0], dtype=np.int64)
        proba = self.predict_proba(X)
        if self.n_classes == 2:
            return (proba[:, 0] >= 0.5).astype(np.int64)
        return np.argmax(proba, axis=1).astype(np.int64)

    def params(self) -> dict:
        return {"n_classes": self.n_classes, "weights": self.weights.tolist(),
                "biases": self.biases.tolist()}

    @classmethod
    def from_params(cls, hyper: dict, p: dict) -> "LogisticRegression":
        m = cls(hyper["l2"], p["n_classes"])
        n_models = len(p["biases"])
        m.weights = np.array(p["weights"], dtype=np.float64).reshape(n_models, -1)
        m.biases = np.array(p["biases"], dtype=np.float64)
        return m


class RidgeRegression:
    """Closed-form least squares with an ``l2 * I`` penalty on the weights only."""

    kind = "RidgeRegression"

    def __init__(self, l2: float = 0.0):
        self.l2 = float(l2)
        self.coef: np.ndarray | None = None
        self.intercept = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RidgeRegression":
        n, p = X.shape
        A = np.hstack([X, np.ones((n, 1))])
        penalty = np.diag(np.r_[np.full(p, self.l2), 0.0])
        gram = A.T @ A + penalty
        rhs = A.T @ y
        # lstsq tolerates the singular systems one-hot blocks create when l2 = 0.
        theta = np.linalg.lstsq(gram, rhs, rcond=None)[0]
        self.coef = theta[:p]
        self.intercept = float(theta[p])
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef + self.intercept

    def params(self) -> dict:
        return {"coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_params(cls, hyper: dict, p: dict) -> "RidgeRegression":
        m = cls(hyper["l2"])
        m.coef = np.array(p["coef"], dtype=np.float64)
        m.intercept = float(p["intercept"])
        return m


def gini(counts: np.ndarray) -> np.ndarray:
    """Gini impurity of class-count rows (last axis = classes)."""
    total = counts.sum(axis=-1, keepdims=True)
    safe = np.where(total == 0, 1, total)
    p = counts / safe
    return 1.0 - np.sum(p * p, axis=-1)


def best_split(X: np.ndarray, y: np.ndarray, classification: bool, n_classes: int,
               min_leaf: int = 1):
    """Exhaustive CART split search.

    Candidate thresholds are midpoints between consecutive sorted unique
    values of each feature; rows with ``x <= threshold`` go left. Returns
    (feature, threshold, weighted_impurity) minimizing the size-weighted
    child impurity, ties going to the lower feature then lower threshold,
    or None when no split leaves ``min_leaf`` rows on both sides.
    """
    n, p = X.shape
    best = None
    for f in range(p):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        # boundary i splits rows [:i] | [i:], valid only between distinct values
        bounds = np.flatnonzero(xs[1:] != xs[:-1]) + 1
        bounds = bounds[(bounds >= min_leaf) & (bounds <= n - min_leaf)]
        if len(bounds) == 0:
            continue
        n_left = bounds.astype(np.float64)
        n_right = n - n_left
        if classification:
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), ys.astype(np.intp)] = 1.0
            cum = np.cumsum(onehot, axis=0)
            left = cum[bounds - 1]
            right = cum[-1] - left
            score = (n_left * gini(left) + n_right * gini(right)) / n
        else:
            cum = np.cumsum(ys)
            cum2 = np.cumsum(ys * ys)
            s_left = cum[bounds - 1]
            s2_left = cum2[bounds - 1]
            s_right = cum[-1] - s_left
            s2_right = cum2[-1] - s2_left
            # n * variance = sum(y^2) - sum(y)^2 / n
            sse_left = np.maximum(s2_left - s_left * s_left / n_left, 0.0)
            sse_right = np.maximum(s2_right - s_right * s_right / n_right, 0.0)
            score = (sse_left + sse_right) / n
        i = int(np.argmin(score))
        if best is None or score[i] < best[2]:
            b = bounds[i]
            threshold = (xs[b - 1] + xs[b]) / 2.0
            best = (f, float(threshold), float(score[i]))
    return best


class DecisionTree:
    """Greedy CART tree stored as flat node arrays.

    Node ``i`` is a leaf when ``feature[i] == -1``; otherwise rows with
    ``x[feature] <= threshold`` descend to ``left[i]``, the rest to
    ``right[i]``. Leaves predict ``leaf_value`` (a class id for
    classification, a mean for regression).
    """

    def __init__(self, max_depth: int, classification: bool, n_classes: int = 0,
                 min_split: int = 2):
        self.max_depth = int(max_depth)
        self.classification = classification
        self.n_classes = int(n_classes)
        self.min_split = min_split
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_value: list[float] = []

    @property
    def kind(self) -> str:
        return "DecisionTreeClassifier" if self.classification else "DecisionTreeRegressor"

    def _impurity(self, y: np.ndarray) -> float:
        if self.classification:
            return float(gini(np.bincount(y, minlength=self.n_classes).astype(np.float64)))
        return float(np.var(y))

    def _leaf(self, y: np.ndarray) -> float:
        if self.classification:
            # argmax returns the first maximum: ties go to the smallest class id
            return float(np.argmax(np.bincount(y, minlength=self.n_classes)))
        return float(np.mean(y))

    def _new_node(self) -> int:
        for arr, v in ((self.feature, -1), (self.threshold, 0.0), (self.left, -1),
                       (self.right, -1), (self.leaf_value, 0.0)):
            arr.append(v)
        return len(self.feature) - 1

    def _grow(self, X, y, depth) -> int:
        node = self._new_node()
        self.leaf_value[node] = self._leaf(y)
        if depth >= self.max_depth or len(y) < self.min_split or self._impurity(y) <= 0.0:
            return node
        split = best_split(X, y, self.classification, self.n_classes)
        if split is None:
            return node
        f, thr, _ = split
        mask = X[:, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(X[mask], y[mask], depth + 1)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        for arr in (self.feature, self.threshold, self.left, self.right, self.leaf_value):
            arr.clear()
        self._grow(X, y, 0)
        return self

    def depth(self, node: int = 0) -> int:
        if self.feature[node] == -1:
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.float64)
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] != -1:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.leaf_value[node]
        return out.astype(np.int64) if self.classification else out

    def params(self) -> dict:
        return {"n_classes": self.n_classes,
                "nodes": [{"feature": f, "threshold": t, "left": l, "right": r, "leaf_value": v}
                          for f, t, l, r, v in zip(self.feature, self.threshold, self.left,
                                                   self.right, self.leaf_value)]}

    @classmethod
    def from_params(cls, hyper: dict, p: dict, classification: bool) -> "DecisionTree":
        m = cls(hyper["max_depth"], classification, p["n_classes"])
        for node in p["nodes"]:
            m.feature.append(int(node["feature"]))
            m.threshold.append(float(node["threshold"]))
            m.left.append(int(node["left"]))
            m.right.append(int(node["right"]))
            m.leaf_value.append(float(node["leaf_value"]))
        return m


class Knn:
    """k-nearest neighbours over the stored (already transformed) training matrix.

    Neighbours are ordered by squared Euclidean distance, then by training
    row index. Classification takes a majority vote (ties to the smallest
    class id); regression averages the neighbours' targets.
    """

    def __init__(self, k: int, classification: bool, n_classes: int = 0):
        self.k = int(k)
        self.classification = classification
        self.n_classes = int(n_classes)
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    @property
    def kind(self) -> str:
        return "KnnClassifier" if self.classification else "KnnRegressor"

    def fit(self, X: np.ndarray, y: np.ndarray) -> "Knn":
        self.X = np.array(X, dtype=np.float64)
        self.y = np.array(y)
        return self

    def neighbors(self, row: np.ndarray) -> np.ndarray:
        d2 = np.sum((self.X - row) ** 2, axis=1)
        order = np.argsort(d2, kind="stable")
        return order[:min(self.k, len(order))]

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.classification:
            out = np.empty(X.shape[0], dtype=np.int64)
            for i, row in enumerate(X):
                votes = np.bincount(self.y[self.neighbors(row)].astype(np.intp),
                                    minlength=self.n_classes)
                out[i] = int(np.argmax(votes))
            return out
        out = np.empty(X.shape[0], dtype=np.float64)
        for i, row in enumerate(X):
            out[i] = float(np.mean(self.y[self.neighbors(row)]))
        return out

    def params(self) -> dict:
        return {"n_classes": self.n_classes, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, hyper: dict, p: dict, classification: bool) -> "Knn":
        m = cls(hyper["k"], classification, p["n_classes"])
        n = len(p["y"])
        m.X = np.array(p["X"], dtype=np.float64).reshape(n, -1)
        m.y = np.array(p["y"], dtype=np.int64 if classification else np.float64)
        return m


def build(kind: str, hyper: dict, n_classes: int):
    """Construct an unfitted model for one roster entry."""
    if kind == "LogisticRegression":
        return LogisticRegression(hyper["l2"], n_classes)
    if kind == "RidgeRegression":
        return RidgeRegression(hyper["l2"])
    if kind == "DecisionTreeClassifier":
        return DecisionTree(hyper["max_depth"], True, n_classes)
    if kind == "DecisionTreeRegressor":
        return DecisionTree(hyper["max_depth"], False)
    if kind == "KnnClassifier":
        return Knn(hyper["k"], True, n_classes)
    if kind == "KnnRegressor":
        return Knn(hyper["k"], False)
    raise ValueError(f"unknown model kind {kind!r}")


def restore(kind: str, hyper: dict, params: dict):
    """Rebuild a fitted model from ``params()`` output."""
    if kind == "LogisticRegression":
        return LogisticRegression.from_params(hyper, params)
    if kind == "RidgeRegression":
        return RidgeRegression.from_params(hyper, params)
    if kind in ("DecisionTreeClassifier", "DecisionTreeRegressor"):
        return DecisionTree.from_params(hyper, params, kind == "DecisionTreeClassifier")
    if kind in ("KnnClassifier", "KnnRegressor"):
        return Knn.from_params(hyper, params, kind == "KnnClassifier")
    raise ValueError(f"unknown model kind {kind!r}")
