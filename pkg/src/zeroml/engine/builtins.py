"""Runtime implementations of the builtin catalog.

Each implementation receives the RuntimeEnv and the calling source line,
followed by one positional argument per catalog parameter (defaults have
already been filled in by the compiler).
"""

from __future__ import annotations

import json
import logging
import tempfile
from pathlib import Path

from .. import data, deploy
from ..automl import selector as automl_search
from ..automl.report import render_report
from ..errors import ExecutionError
from .values import Range, format_value

log = logging.getLogger(__name__)


def _load(env, line, path):
    return data.load_csv(env.resolve(path))


def _automl(env, line, input, target, task, preprocess, max_time, evaluation, folds, seed):
    params = automl_search.AutomlParams(target, task, preprocess, float(max_time), evaluation,
                                        int(folds), int(seed))
    model, report = automl_search.search(input, params, threads=env.threads,
                                         test_mode=env.test_mode)
    if env.report_out is not None:
        out = env.resolve(str(env.report_out))
        out.write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n",
                       encoding="utf-8")
    return model


def _report(env, line, m):
    if m.report is None:
        raise ExecutionError(line, "model carries no search report")
    env.out.write(render_report(m.report))
    return m.report


def _deploy(env, line, m, target, dest):
    deploy.check_target(target)
    if target in ("file", "edge"):
        deploy.save_artifact(m, env.resolve(dest), test_mode=env.test_mode)
        return None
    host, port = deploy.parse_address(dest)
    with tempfile.TemporaryDirectory(prefix="zeroml-") as tmp:
        path = Path(tmp) / "model.zmodel"
        deploy.save_artifact(m, path, test_mode=env.test_mode)
        deploy.serve(path, port, host)
    return None


def _predict(env, line, m, d):
    return m.predict_dataset(d)


def _print(env, line, v):
    env.out.write(format_value(v) + "\n")


def _range(env, line, lo, hi):
    return Range(lo, hi)


IMPLEMENTATIONS = {
    "load": _load,
    "automl": _automl,
    "report": _report,
    "deploy": _deploy,
    "predict": _predict,
    "print": _print,
    "range": _range,
}
