"""The search report: data model, fixed-width rendering and JSON form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .metrics import MAXIMIZE

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Candidate:
    index: int
    model_kind: str
    hyperparams: dict = field(hash=False)

    def describe(self) -> str:
        return " ".join(f"{k}={_num(v)}" for k, v in self.hyperparams.items())


@dataclass(frozen=True)
class CandidateResult:
    candidate: Candidate
    fold_scores: tuple[float, ...]
    mean_score: float
    std_score: float
    fit_seconds: float
    status: str  # "done" | "skipped_deadline" | "failed"
    message: str = ""
    seed: int = 0

    @property
    def done(self) -> bool:
        return self.status == "done"

    def status_text(self) -> str:
        if self.status == "skipped_deadline":
            return "skipped (deadline)"
        if self.status == "failed":
            return f"failed: {self.message}"
        return "done"

    def to_dict(self) -> dict:
        return {
            "index": self.candidate.index,
            "model_kind": self.candidate.model_kind,
            "hyperparams": dict(self.candidate.hyperparams),
            "fold_scores": list(self.fold_scores),
            "mean_score": _json_float(self.mean_score),
            "std_score": _json_float(self.std_score),
            "fit_seconds": self.fit_seconds,
            "status": self.status,
            "message": self.message,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CandidateResult":
        cand = Candidate(doc["index"], doc["model_kind"], dict(doc["hyperparams"]))
        return cls(cand, tuple(doc["fold_scores"]), _from_json_float(doc["mean_score"]),
                   _from_json_float(doc["std_score"]),
                   doc["fit_seconds"], doc["status"], doc.get("message", ""), doc.get("seed", 0))


@dataclass(frozen=True)
class Report:
    task: str
    metric: str
    target: str
    rows: tuple[CandidateResult, ...]
    best_index: int
    n_rows: int
    n_features: int
    folds: int
    seed: int
    threads: int
    total_seconds: float
    roster_version: int

    @property
    def best(self) -> CandidateResult:
        return self.rows[self.best_index]

    def ranked(self) -> list[CandidateResult]:
        """Done rows best-first (ties by candidate index), then the rest by index."""
        sign = -1.0 if MAXIMIZE[self.metric] else 1.0
        done = sorted((r for r in self.rows if r.done),
                      key=lambda r: (sign * r.mean_score, r.candidate.index))
        rest = [r for r in self.rows if not r.done]
        return done + rest

    def summary(self) -> str:
        b = self.best
        return (f"Report({self.task}, {self.metric}, best #{b.candidate.index} "
                f"{b.candidate.model_kind} {b.mean_score:.4f})")

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "task": self.task,
            "metric": self.metric,
            "target": self.target,
            "best_index": self.best_index,
            "n_rows": self.n_rows,
            "n_features": self.n_features,
            "folds": self.folds,
            "seed": self.seed,
            "threads": self.threads,
            "total_seconds": self.total_seconds,
            "roster_version": self.roster_version,
            "rows": [r.to_dict() for r in self.rows],
            "text": render_report(self),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Report":
        return cls(doc["task"], doc["metric"], doc["target"],
                   tuple(CandidateResult.from_dict(r) for r in doc["rows"]),
                   doc["best_index"], doc["n_rows"], doc["n_features"], doc["folds"],
                   doc["seed"], doc["threads"], doc["total_seconds"], doc["roster_version"])


def _json_float(v: float) -> float | None:
    return None if math.isnan(v) else v


def _from_json_float(v) -> float:
    return float("nan") if v is None else float(v)


def _num(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_report(r: Report) -> str:
    header = (f"ZeroML search report | task: {r.task} | metric: {r.metric} | target: {r.target} "
              f"| rows: {r.n_rows} | features: {r.n_features} | folds: {r.folds} "
              f"| seed: {r.seed} | roster: v{r.roster_version}")
    cols = f"{'rank':>5}  {'#':>2}  {'model':<24}{'hyperparams':<16}{'mean ± std':<20}{'fit s':>8}  status"
    lines = [header, cols, "-" * len(cols)]
    rank = 0
    for row in r.ranked():
        if row.done:
            rank += 1
            rank_text = str(rank)
            score = f"{row.mean_score:.4f} ± {row.std_score:.4f}"
        else:
            rank_text = "-"
            score = "-"
        mark = "*" if row.candidate.index == r.best_index else " "
        lines.append(f"{rank_text:>4}{mark}  {row.candidate.index:>2}  "
                     f"{row.candidate.model_kind:<24}{row.candidate.describe():<16}"
                     f"{score:<20}{row.fit_seconds:>8.3f}  {row.status_text()}")
    best = r.best
    lines.append(f"best: #{best.candidate.index} {best.candidate.model_kind} "
                 f"{best.candidate.describe()} ({r.metric} {best.mean_score:.4f}); "
                 f"total {r.total_seconds:.3f} s")
    return "\n".join(lines) + "\n"
