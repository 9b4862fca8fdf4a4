"""
Run configuration and JSON-lines run logs.

A log is one JSON document per line: a ``header`` carrying the format
version and the full :class:`RunConfig`, one ``record`` per emitted
result, a ``summary``, and finally a ``timing`` line. Everything except
the timing line is a pure function of the config, so a log can be replayed
and compared byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .io import MalformedFile, dumps, validate_document

FORMAT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    command: str
    subcommand: str | None
    seed: int = 0
    shots: int | None = None
    tol: float = 1e-9
    paths: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    inputs_sha256: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        validate_document(data, "run_config")
        return cls(**data)

    def with_input_hashes(self) -> "RunConfig":
        hashes = {k: sha256_file(p) for k, p in self.paths.items() if Path(p).is_file()}
        return RunConfig(self.command, self.subcommand, self.seed, self.shots, self.tol,
                         dict(self.paths), dict(self.options), hashes)


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunResult:
    records: list
    summary: dict
    exit_code: int = 0
    files: dict = field(default_factory=dict)  # file name -> text content


def log_lines(config: RunConfig, result: RunResult) -> Iterable[str]:
    """Deterministic part of the log."""
    yield dumps({"kind": "header", "format_version": FORMAT_VERSION, "config": config.to_dict()})
    for rec in result.records:
        yield dumps({"kind": "record", "data": rec})
    yield dumps({"kind": "summary", "data": result.summary})


def write_log(path: str | Path, config: RunConfig, result: RunResult, seconds: float) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for line in log_lines(config, result):
            fh.write(line + "\n")
        fh.write(dumps({"kind": "timing", "seconds": round(seconds, 6)}) + "\n")


def read_log(path: str | Path) -> tuple[RunConfig, list[str]]:
    """Header config and the deterministic lines (timing dropped)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise MalformedFile(f"{path}: empty log")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: line 1 column {exc.colno}: {exc.msg}") from None
    validate_document(header, "runlog_line")
    if header.get("kind") != "header":
        raise MalformedFile(f"{path}: first line is not a header")
    if header["format_version"] != FORMAT_VERSION:
        raise MalformedFile(f"{path}: log format version {header['format_version']}, "
                            f"this build reads {FORMAT_VERSION}")
    body = [ln for ln in lines if not ln.startswith('{"kind":"timing"')]
    return RunConfig.from_dict(header["config"]), body


@dataclass(frozen=True)
class ReplayReport:
    identical: bool
    first_divergence: int | None = None  # 1-based line number
    expected: str | None = None
    found: str | None = None
    reason: str | None = None


def replay(path: str | Path, execute: Callable[[RunConfig], RunResult]) -> ReplayReport:
    config, logged = read_log(path)
    for key, digest in config.inputs_sha256.items():
        p = config.paths.get(key)
        if p is None or not Path(p).is_file():
            return ReplayReport(False, reason=f"input {key!r} ({p}) is missing")
        if sha256_file(p) != digest:
            return ReplayReport(False, reason=f"input {key!r} ({p}) changed since the run")
    fresh = list(log_lines(config, execute(config)))
    for n, (a, b) in enumerate(zip(fresh, logged), start=1):
        if a != b:
            return ReplayReport(False, n, a, b)
    if len(fresh) != len(logged):
        n = min(len(fresh), len(logged)) + 1
        return ReplayReport(False, n, reason=f"log has {len(logged)} lines, replay {len(fresh)}")
    return ReplayReport(True)


class Timer:
    def __enter__(self) -> "Timer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc) -> None:
        self.seconds = time.perf_counter() - self.start
