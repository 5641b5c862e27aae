"""Synthetic datasets and independent oracles shared by the test modules."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

CANONICAL = """\
let d = load("blobs.csv");
let m = automl(input=d, target="label");
m.report();
deploy(m, "file", "m.zmodel");
"""


def blobs(seed: int = 42, n: int = 200, p: int = 4, separation: float = 6.0):
    """Two Gaussian classes, unit within-class std, class means ``separation`` apart."""
    rng = np.random.default_rng(seed)
    direction = np.ones(p) / np.sqrt(p)
    labels = np.arange(n) % 2
    centers = np.where(labels[:, None] == 1, 0.5, -0.5) * separation * direction
    X = centers + rng.standard_normal((n, p))
    order = rng.permutation(n)
    return X[order], labels[order]


def linear(seed: int = 42, n: int = 200, noise: float = 0.1):
    """y = 3*x1 - 2*x2 + eps with eps ~ N(0, noise^2)."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3.0, 3.0, size=(n, 2))
    y = 3.0 * X[:, 0] - 2.0 * X[:, 1] + rng.normal(0.0, noise, size=n)
    return X, y


def write_table(path: Path, X, y, target: str = "label") -> Path:
    names = [f"x{j + 1}" for j in range(X.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + [target])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [_cell(label)])
    return path


def _cell(v) -> str:
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return repr(float(v))


def nearest_centroid_cv(X, y, k: int = 5, seed: int = 0) -> float:
    """Held-out accuracy of a nearest-centroid classifier over k shuffled folds."""
    rng = np.random.default_rng(seed)
    fold_of = rng.permutation(len(y)) % k
    correct = 0
    for f in range(k):
        tr, te = fold_of != f, fold_of == f
        classes = np.unique(y[tr])
        centroids = np.stack([X[tr][y[tr] == c].mean(axis=0) for c in classes])
        d2 = ((X[te][:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        correct += int(np.sum(classes[np.argmin(d2, axis=1)] == y[te]))
    return correct / len(y)


def normal_equation(X, y):
    """Least squares with an intercept via (A^T A) w = A^T y."""
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    w = np.linalg.solve(A.T @ A, A.T @ y)
    return w[:-1], w[-1]
