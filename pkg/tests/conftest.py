import io
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402
from zeroml import cli  # noqa: E402

CORPUS = Path(__file__).parent / "corpus"

_criteria: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _criteria.append((name, "PASS" if report.passed else "FAIL"))
    elif report.when == "setup" and report.skipped:
        _criteria.append((name, "SKIP"))
    elif report.skipped and report.when == "call":
        _criteria.append((name, "SKIP"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        terminalreporter.write_line(f"{outcome:<4}  {name}")


class CliResult:
    def __init__(self, code, out, err):
        self.code, self.out, self.err = code, out, err


def run_cli(*argv) -> CliResult:
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], stdout=out, stderr=err)
    return CliResult(code, out.getvalue(), err.getvalue())


@pytest.fixture
def zml():
    return run_cli


@pytest.fixture(scope="session")
def blobs_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("blobs")
    X, y = synth.blobs()
    synth.write_table(d / "blobs.csv", X, y)
    (d / "canonical.zml").write_text(synth.CANONICAL, encoding="utf-8")
    return d


@pytest.fixture(scope="session")
def linear_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("linear")
    X, y = synth.linear()
    synth.write_table(d / "linear.csv", X, y, target="y")
    return d
