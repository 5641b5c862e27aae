"""Model search: candidate roster, native models, cross-validation and reporting."""

from .metrics import score
from .report import Candidate, CandidateResult, Report, render_report
from .selector import (
    AutomlParams, SchemaProtocol, TrainedModel, cross_validate, enumerate_candidates,
    infer_task, search,
)

__all__ = [
    "AutomlParams", "Candidate", "CandidateResult", "Report", "SchemaProtocol", "TrainedModel",
    "cross_validate", "enumerate_candidates", "infer_task", "render_report", "score", "search",
]
