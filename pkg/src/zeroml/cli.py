"""Command-line entry point: ``zeroml run|check|tokens|ast|serve|predict|builtins``.

Exit codes: 0 ok, 1 usage error, 2 compile-time error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import data, deploy
from .engine.catalog import builtin_catalog
from .engine.compiler import compile_program
from .engine.vm import RuntimeEnv, execute
from .errors import ExecutionError, LexError, ParseError, SemanticErrors, ZeroMLError
from .lexer import tokenize
from .semantics import check
from .syntax import dump_tree, parse_program

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COMPILE = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class CliConfig:
    subcommand: str
    file: Path | None = None
    artifact: Path | None = None
    csv: Path | None = None
    threads: int = 1
    seed: int = 42
    port: int = 8080
    host: str = "0.0.0.0"
    workdir: Path | None = None
    report_out: Path | None = None
    out: Path | None = None
    test_mode: bool = False
    debug: bool = False


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zeroml", description="ZeroML compiler and runtime.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="compile and execute a program")
    run.add_argument("file", type=Path)
    run.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                     help="search worker threads (default: all cores)")
    run.add_argument("--seed", type=int, default=42, help="default automl seed (default: 42)")
    run.add_argument("--workdir", type=Path, default=None,
                     help="directory relative paths in the program resolve against (default: cwd)")
    run.add_argument("--report-out", type=Path, default=None,
                     help="write the search report as JSON to this path")
    run.add_argument("--test-mode", action="store_true",
                     help="zero wall times and timestamps for byte-stable output")
    run.add_argument("--debug", action="store_true",
                     help="check value tags and stack depth while executing")

    chk = sub.add_parser("check", help="type-check a program without running it")
    chk.add_argument("file", type=Path)

    tok = sub.add_parser("tokens", help="print the token stream")
    tok.add_argument("file", type=Path)

    ast = sub.add_parser("ast", help="print the syntax tree")
    ast.add_argument("file", type=Path)

    srv = sub.add_parser("serve", help="serve a model artifact over HTTP")
    srv.add_argument("artifact", type=Path)
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="0.0.0.0")

    pred = sub.add_parser("predict", help="predict a CSV file with a model artifact")
    pred.add_argument("artifact", type=Path)
    pred.add_argument("csv", type=Path)
    pred.add_argument("--out", type=Path, default=None, help="output CSV (default: stdout)")

    sub.add_parser("builtins", help="list the builtin functions")
    return parser


def _config(ns: argparse.Namespace) -> CliConfig:
    cfg = CliConfig(ns.subcommand)
    for name in ("file", "artifact", "csv", "threads", "seed", "port", "host", "workdir",
                 "report_out", "out", "test_mode", "debug"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def _read_source(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"zeroml: cannot read {path}: {exc.strerror}") from None


def _compile_diagnostics(path: Path, exc: ZeroMLError) -> list[str]:
    if isinstance(exc, LexError):
        return [f"{path}:{exc.line}:{exc.col}: E_LEX {exc.message}"]
    if isinstance(exc, ParseError):
        return [f"{path}:{exc.line}:{exc.col}: E_PARSE {exc.message}"]
    return [f"{path}:{e.line}:{e.col}: {e.code} {e.message}" for e in exc.errors]


def _front_end(path: Path, source: str, stderr):
    """Lex, parse and check; print diagnostics and return None on failure."""
    try:
        return check(parse_program(tokenize(source)))
    except (LexError, ParseError, SemanticErrors) as exc:
        for line in _compile_diagnostics(path, exc):
            print(line, file=stderr)
        return None


def cmd_run(cfg: CliConfig, stdout, stderr) -> int:
    source = _read_source(cfg.file)
    tp = _front_end(cfg.file, source, stderr)
    if tp is None:
        return EXIT_COMPILE
    bc = compile_program(tp)
    env = RuntimeEnv(seed=cfg.seed, threads=cfg.threads,
                     workdir=cfg.workdir or Path.cwd(), out=stdout,
                     test_mode=cfg.test_mode, report_out=cfg.report_out, debug=cfg.debug)
    try:
        return execute(bc, env)
    except ExecutionError as exc:
        stdout.flush()
        print(f"{cfg.file}:{exc.line}: runtime error: {exc.message}", file=stderr)
        return EXIT_RUNTIME


def cmd_check(cfg: CliConfig, stdout, stderr) -> int:
    source = _read_source(cfg.file)
    return EXIT_OK if _front_end(cfg.file, source, stderr) is not None else EXIT_COMPILE


def cmd_tokens(cfg: CliConfig, stdout, stderr) -> int:
    source = _read_source(cfg.file)
    try:
        tokens = tokenize(source)
    except LexError as exc:
        print(_compile_diagnostics(cfg.file, exc)[0], file=stderr)
        return EXIT_COMPILE
    for tok in tokens:
        stdout.write(f"{tok}\n")
    return EXIT_OK


def cmd_ast(cfg: CliConfig, stdout, stderr) -> int:
    source = _read_source(cfg.file)
    try:
        program = parse_program(tokenize(source))
    except (LexError, ParseError) as exc:
        print(_compile_diagnostics(cfg.file, exc)[0], file=stderr)
        return EXIT_COMPILE
    stdout.write(dump_tree(program))
    return EXIT_OK


def cmd_serve(cfg: CliConfig, stdout, stderr) -> int:
    if not cfg.artifact.exists():
        raise UsageError(f"zeroml: no such artifact {cfg.artifact}")
    try:
        deploy.serve(cfg.artifact, cfg.port, cfg.host)
    except (ZeroMLError, OSError) as exc:
        print(f"zeroml serve: {exc}", file=stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_predict(cfg: CliConfig, stdout, stderr) -> int:
    for path in (cfg.artifact, cfg.csv):
        if not path.exists():
            raise UsageError(f"zeroml: no such file {path}")
    try:
        model = deploy.load_artifact(cfg.artifact)
        d = data.load_csv(cfg.csv, categorical=model.schema.categorical_columns)
        result = model.predict_dataset(d)
    except (ZeroMLError, OSError) as exc:
        print(f"zeroml predict: {exc}", file=stderr)
        return EXIT_RUNTIME
    if cfg.out is None:
        data.write_csv(result, stdout)
    else:
        with open(cfg.out, "w", newline="", encoding="utf-8") as fh:
            data.write_csv(result, fh)
    return EXIT_OK


def cmd_builtins(cfg: CliConfig, stdout, stderr) -> int:
    for entry in builtin_catalog():
        method = "  (also as a method)" if entry["method"] else ""
        stdout.write(f"{entry['signature']}{method}\n    {entry['doc']}\n")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run, "check": cmd_check, "tokens": cmd_tokens, "ast": cmd_ast,
    "serve": cmd_serve, "predict": cmd_predict, "builtins": cmd_builtins,
}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if isinstance(stdout, io.TextIOWrapper) and stdout.encoding.lower() != "utf-8":
        stdout.reconfigure(encoding="utf-8")
    logging.basicConfig(level=logging.WARNING, stream=stderr, format="zeroml: %(message)s")
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _config(ns)
        return COMMANDS[cfg.subcommand](cfg, stdout, stderr)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
