"""ModelSelector and Evaluator: roster enumeration, cross-validation and parallel search."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .. import data
from ..data import ColumnType, Dataset, FeatureSchema, FoldCache
from ..errors import CleanError, DeadlineError, SchemaError, SearchError
from . import models
from .metrics import METRICS, better, resolve_metric, score
from .report import Candidate, CandidateResult, Report

ROSTER_VERSION = 1
MAX_CLASSIFICATION_DISTINCT = 10

TASKS = ("auto", "classification", "regression")

_GRIDS = {
    "classification": (("LogisticRegression", "l2", (0.0, 0.1)),
                       ("DecisionTreeClassifier", "max_depth", (3, 6, 10)),
                       ("KnnClassifier", "k", (3, 7))),
    "regression": (("RidgeRegression", "l2", (0.0, 0.1)),
                   ("DecisionTreeRegressor", "max_depth", (3, 6, 10)),
                   ("KnnRegressor", "k", (3, 7))),
}


def enumerate_candidates(task: str) -> list[Candidate]:
    """The fixed, versioned 7-entry roster for ``task``."""
    out = []
    for kind, name, values in _GRIDS[task]:
        for v in values:
            out.append(Candidate(len(out), kind, {name: v}))
    return out


def infer_task(d: Dataset, target: str) -> str:
    col = d.column(target)
    if col.ctype is not ColumnType.NUMERIC:
        return "classification"
    distinct = np.unique(col.values[~col.missing])
    return "classification" if len(distinct) <= MAX_CLASSIFICATION_DISTINCT else "regression"


@dataclass(frozen=True)
class AutomlParams:
    target: str
    task: str = "auto"
    preprocess: str = "standard"
    max_time: float = 0.0
    evaluation: str = "auto"
    folds: int = 5
    seed: int = 42

    def validate(self) -> None:
        if self.task not in TASKS:
            raise SearchError(f"unknown task {self.task!r} (expected {', '.join(TASKS)})")
        if self.preprocess not in data.PREPROCESS_MODES:
            raise SearchError(f"unknown preprocess {self.preprocess!r} "
                              f"(expected {', '.join(data.PREPROCESS_MODES)})")
        if self.evaluation != "auto" and self.evaluation not in METRICS:
            raise SearchError(f"unknown evaluation {self.evaluation!r} "
                              f"(expected auto, {', '.join(METRICS)})")
        if not self.max_time >= 0.0:
            raise SearchError("max_time must be >= 0 (0 means unlimited)")
        if self.folds < 2:
            raise SearchError("folds must be at least 2")


@dataclass(frozen=True)
class SchemaProtocol:
    """How to fit a feature schema on a training partition."""
    target: str
    preprocess: str
    task: str
    classes: tuple[str, ...] | None

    def fit(self, d: Dataset) -> FeatureSchema:
        return data.fit_schema(d, self.target, self.preprocess,
                               classification=self.task == "classification",
                               classes=self.classes)


@dataclass
class TrainedModel:
    schema: FeatureSchema
    model_kind: str
    hyperparams: dict
    estimator: object
    task: str
    metric: str
    cv_score: float
    seed: int
    roster_version: int = ROSTER_VERSION
    candidate_index: int = 0
    report: Report | None = None

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        return self.estimator.predict(X)

    def predict(self, d: Dataset) -> list:
        """Predict every row: class labels (str) or floats."""
        X, _ = data.apply_schema(self.schema, d)
        raw = self.predict_matrix(X)
        if self.task == "classification":
            classes = self.schema.classes
            if not classes:
                return []
            return [classes[int(i)] for i in raw]
        return [float(v) for v in raw]

    def predict_dataset(self, d: Dataset) -> Dataset:
        """Predictions as a one-column dataset named ``prediction``."""
        preds = self.predict(d)
        missing = np.zeros(len(preds), dtype=bool)
        missing.setflags(write=False)
        if self.task == "classification":
            col = data.Column("prediction", ColumnType.CATEGORICAL, tuple(preds), missing)
        else:
            values = np.array(preds, dtype=np.float64)
            values.setflags(write=False)
            col = data.Column("prediction", ColumnType.NUMERIC, values, missing)
        return Dataset((col,), len(preds))

    def summary(self) -> str:
        hp = " ".join(f"{k}={v}" for k, v in self.hyperparams.items())
        return f"Model({self.model_kind} {hp}, {self.task}, cv {self.metric}={self.cv_score:.4f})"


def _fold_data(d: Dataset, protocol: SchemaProtocol, test_rows: np.ndarray):
    train_rows = np.setdiff1d(np.arange(d.n_rows), test_rows)
    train = d.take(train_rows)
    test = d.take(test_rows)
    schema = protocol.fit(train)
    X_train, y_train = data.apply_schema(schema, train)
    X_test, y_test = data.apply_schema(schema, test)
    return schema, X_train, y_train, X_test, y_test


def cross_validate(candidate: Candidate, d: Dataset, protocol: SchemaProtocol,
                   folds: list[np.ndarray], seed: int, metric: str = "auto",
                   cache: FoldCache | None = None,
                   builder: Callable = models.build) -> CandidateResult:
    """Score one candidate over precomputed folds; never raises.

    The schema is re-fitted on each training partition so held-out rows never
    influence preprocessing statistics.
    """
    cache = cache if cache is not None else FoldCache()
    metric = resolve_metric(protocol.task, metric)
    n_classes = len(protocol.classes) if protocol.classes is not None else 0
    cand_seed = seed + candidate.index
    started = time.perf_counter()
    scores = []
    try:
        for f, test_rows in enumerate(folds):
            _, X_tr, y_tr, X_te, y_te = cache.get(
                (protocol, f), lambda rows=test_rows: _fold_data(d, protocol, rows))
            model = builder(candidate.model_kind, candidate.hyperparams, n_classes)
            model.fit(X_tr, y_tr)
            scores.append(score(protocol.task, metric, y_te, model.predict(X_te)))
    except Exception as exc:  # a failing candidate must not abort the search
        return CandidateResult(candidate, tuple(scores), float("nan"), float("nan"),
                               time.perf_counter() - started, "failed",
                               f"{type(exc).__name__}: {exc}", cand_seed)
    arr = np.array(scores)
    return CandidateResult(candidate, tuple(float(s) for s in scores), float(arr.mean()),
                           float(arr.std()), time.perf_counter() - started, "done", "", cand_seed)


def select_best(results: list[CandidateResult], metric: str) -> int | None:
    """Index (into results) of the best done row; ties go to the lower candidate index."""
    best = None
    for i, r in enumerate(sorted(results, key=lambda r: r.candidate.index)):
        if not r.done:
            continue
        if best is None or better(metric, r.mean_score, best.mean_score):
            best = r
    if best is None:
        return None
    return next(i for i, r in enumerate(results) if r is best)


def prepare(d: Dataset, params: AutomlParams) -> tuple[Dataset, str, tuple[str, ...] | None]:
    """Drop rows without a target, clean, and settle the task and class list."""
    if not d.has(params.target):
        raise SchemaError(f"unknown target column '{params.target}' "
                          f"(columns: {', '.join(d.names)})")
    tcol = d.column(params.target)
    keep = np.flatnonzero(~tcol.missing)
    if len(keep) == 0:
        raise CleanError(f"target column '{params.target}' has no values")
    if len(keep) < d.n_rows:
        d = d.take(keep)
    d = data.clean(d, params.target)
    task = params.task if params.task != "auto" else infer_task(d, params.target)
    tcol = d.column(params.target)
    if task == "regression":
        if tcol.ctype is ColumnType.CATEGORICAL:
            raise SchemaError(f"regression needs a numeric target; '{params.target}' is categorical")
        return d, task, None
    return d, task, data.target_classes(tcol)


def search(d: Dataset, params: AutomlParams, threads: int = 1, test_mode: bool = False,
           roster: list[Candidate] | None = None,
           builder: Callable = models.build) -> tuple[TrainedModel, Report]:
    """Cross-validate every roster candidate on a worker pool and refit the winner.

    Workers claim candidates strictly in index order from a shared cursor. With
    ``max_time > 0`` a candidate only starts while the elapsed time is below
    the budget; running fits are never interrupted. Results are reduced by
    candidate index, so thread count and completion order cannot change the
    outcome.
    """
    params.validate()
    clock_start = time.perf_counter()
    d, task, classes = prepare(d, params)
    metric = resolve_metric(task, params.evaluation)
    protocol = SchemaProtocol(params.target, params.preprocess, task, classes)
    if classes is not None:
        index = {c: k for k, c in enumerate(classes)}
        labels = np.array([index[v] for v in d.column(params.target).text()])
    else:
        labels = None
    folds = data.kfold(d.n_rows, params.folds, labels, params.seed)
    candidates = roster if roster is not None else enumerate_candidates(task)
    cache = FoldCache()

    results: list[CandidateResult | None] = [None] * len(candidates)
    cursor = [0]
    lock = threading.Lock()

    def worker():
        while True:
            with lock:
                i = cursor[0]
                if i >= len(candidates):
                    return
                cursor[0] += 1
            cand = candidates[i]
            elapsed = time.perf_counter() - clock_start
            if params.max_time > 0 and elapsed >= params.max_time:
                results[i] = CandidateResult(cand, (), float("nan"), float("nan"), 0.0,
                                             "skipped_deadline", "", params.seed + cand.index)
                continue
            results[i] = cross_validate(cand, d, protocol, folds, params.seed, metric,
                                        cache, builder)

    n_workers = max(1, min(threads, len(candidates)))
    pool = [threading.Thread(target=worker, name=f"zeroml-search-{k}") for k in range(n_workers)]
    for t in pool:
        t.start()
    for t in pool:
        t.join()

    if test_mode:
        results = [replace(r, fit_seconds=0.0) for r in results]
    best_pos = select_best(results, metric)
    if best_pos is None:
        if any(r.status == "skipped_deadline" for r in results):
            raise DeadlineError(f"max_time={params.max_time} s elapsed before any candidate "
                                "completed")
        reasons = "; ".join(f"#{r.candidate.index}: {r.message}" for r in results)
        raise SearchError(f"every candidate failed ({reasons})")
    winner = results[best_pos].candidate

    schema = protocol.fit(d)
    X, y = data.apply_schema(schema, d)
    n_classes = len(classes) if classes is not None else 0
    estimator = builder(winner.model_kind, winner.hyperparams, n_classes)
    estimator.fit(X, y)

    total = 0.0 if test_mode else time.perf_counter() - clock_start
    report = Report(task, metric, params.target, tuple(results), best_pos, d.n_rows,
                    schema.n_features, params.folds, params.seed, threads, total, ROSTER_VERSION)
    model = TrainedModel(schema, winner.model_kind, dict(winner.hyperparams), estimator, task,
                         metric, results[best_pos].mean_score, params.seed, ROSTER_VERSION,
                         winner.index, report)
    return model, report


def linear_coefficients(model: TrainedModel) -> dict[str, float]:
    """Ridge weights mapped back to original feature units (undoing standardization)."""
    if model.model_kind != "RidgeRegression":
        raise ValueError("only RidgeRegression has linear coefficients")
    out = {}
    coef = model.estimator.coef
    j = 0
    for t in model.schema.transforms:
        if isinstance(t, data.OneHot):
            for c in t.categories:
                out[f"{t.column}={c}"] = float(coef[j])
                j += 1
            continue
        w = float(coef[j])
        if isinstance(t, data.Standardize) and t.std > 0:
            w /= t.std
        out[t.column] = w
        j += 1
    return out
