"""Evaluation metrics for the Evaluator stage."""

from __future__ import annotations

import numpy as np

from ..errors import MetricError

CLASSIFICATION_METRICS = ("accuracy", "f1")
REGRESSION_METRICS = ("rmse", "r2")
METRICS = CLASSIFICATION_METRICS + REGRESSION_METRICS

# True when a larger score is better.
MAXIMIZE = {"accuracy": True, "f1": True, "rmse": False, "r2": True}


def resolve_metric(task: str, name: str) -> str:
    """Map ``auto`` to the task default and reject task/metric mismatches."""
    if name == "auto":
        return "accuracy" if task == "classification" else "rmse"
    if name not in METRICS:
        raise MetricError(f"unknown evaluation metric {name!r} (expected auto, "
                          f"{', '.join(METRICS)})")
    allowed = CLASSIFICATION_METRICS if task == "classification" else REGRESSION_METRICS
    if name not in allowed:
        raise MetricError(f"metric {name!r} does not apply to {task}")
    return name


def accuracy(y_true, y_pred) -> float:
    y_true = np.asarray(y_true)
    return float(np.mean(y_true == np.asarray(y_pred)))


def macro_f1(y_true, y_pred) -> float:
    """Unweighted mean of per-class F1 over classes that occur in either vector."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    scores = []
    for c in np.union1d(y_true, y_pred):
        tp = np.sum((y_true == c) & (y_pred == c))
        fp = np.sum((y_true != c) & (y_pred == c))
        fn = np.sum((y_true == c) & (y_pred != c))
        scores.append(2.0 * tp / (2.0 * tp + fp + fn))
    return float(np.mean(scores))


def rmse(y_true, y_pred) -> float:
    diff = np.asarray(y_true, dtype=np.float64) - np.asarray(y_pred, dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def r2(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


_FUNCS = {"accuracy": accuracy, "f1": macro_f1, "rmse": rmse, "r2": r2}


def score(task: str, metric_name: str, y_true, y_pred) -> float:
    if len(y_true) != len(y_pred) or len(y_true) == 0:
        raise MetricError("y_true and y_pred must be non-empty and of equal length")
    return _FUNCS[resolve_metric(task, metric_name)](y_true, y_pred)


def better(metric: str, a: float, b: float) -> bool:
    """Whether score ``a`` strictly beats ``b``."""
    return a > b if MAXIMIZE[metric] else a < b
