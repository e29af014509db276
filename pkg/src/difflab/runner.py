"""Runs one test on one configuration as a child process, in the role the
host-side launcher plays on real hardware: substitute the command
template, enforce the timeout, capture output, classify it into an
Outcome, persist the record, and reconstruct exact rerun command lines.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .corpus import TestCase
from .errors import ExecutorNotFound, NotFound, SchemaViolation, UnknownUid
from .minikernel.evaluate import EvalParams
from .store import (INLINE_OUTPUT_LIMIT, Repository, RepoEntry, is_uid,
                    now_rfc3339)

# Hard cap on each captured stream; beyond it the capture is cut and
# marked, bounding repository growth on pathological output.
OUTPUT_LIMIT = 1 << 20
TRUNCATION_MARKER = b"\n[output truncated]"

# How long past timeout_ms the runner may spend killing and reaping.
KILL_GRACE_MS = 500

_RESULT_RE = re.compile(rb"^RESULT:[ \t]*([0-9a-fA-F]+)[ \t]*\r?$", re.MULTILINE)


@dataclass(frozen=True)
class Configuration:
    """One implementation under test: an executor command plus its
    environment. Fault flags, when simulated, are part of the template."""

    uid: str
    name: str
    command_template: str
    env: dict
    timeout_ms: int
    metadata: dict

    def __post_init__(self):
        if self.timeout_ms < 1:
            raise SchemaViolation(f"timeout_ms must be >= 1, got {self.timeout_ms}")
        if "{kernel}" not in self.command_template:
            raise SchemaViolation("command_template must contain {kernel}")


@dataclass(frozen=True)
class ExitStatus:
    kind: str  # "code" | "signal" | "timed_out"
    value: int | None = None

    @classmethod
    def code(cls, n: int) -> "ExitStatus":
        return cls("code", n)

    @classmethod
    def signal(cls, n: int) -> "ExitStatus":
        return cls("signal", n)

    @classmethod
    def timed_out(cls) -> "ExitStatus":
        return cls("timed_out")


@dataclass(frozen=True)
class Outcome:
    kind: str  # "Result" | "CompilerCrash" | "RuntimeCrash" | "Timeout"
    value: str | None = None


@dataclass(frozen=True)
class ExecutionRecord:
    test_uid: str
    config_uid: str
    campaign_id: str
    started_at: str
    wall_ms: int
    exit: ExitStatus
    stdout: bytes
    stderr: bytes
    stdout_truncated: bool
    stderr_truncated: bool
    outcome: Outcome
    command: str


def parse_output(exit: ExitStatus, stdout: bytes, stderr: bytes) -> Outcome:
    """Total decision table from wire observation to Outcome.

    Timeout wins over everything; exit 0 needs a well-formed RESULT line
    to count as a Result (malformed success is a runtime failure); exit 3
    is the compiler-crash channel; anything else that isn't 0 crashed at
    runtime.
    """
    if exit.kind == "timed_out":
        return Outcome("Timeout")
    if exit.kind == "code" and exit.value == 0:
        m = _RESULT_RE.search(stdout)
        if m:
            return Outcome("Result", m.group(1).decode("ascii").lower())
        return Outcome("RuntimeCrash")
    if exit.kind == "code" and exit.value == 3:
        return Outcome("CompilerCrash")
    return Outcome("RuntimeCrash")


def build_command(config: Configuration, kernel_path: str | Path,
                  params: EvalParams) -> str:
    return (config.command_template
            .replace("{kernel}", str(kernel_path))
            .replace("{threads}", str(params.thread_count)))


def _capture(raw: bytes) -> tuple[bytes, bool]:
    if len(raw) <= OUTPUT_LIMIT:
        return raw, False
    return raw[:OUTPUT_LIMIT] + TRUNCATION_MARKER, True


def execute(repo: Repository, test: TestCase, config: Configuration,
            params: EvalParams, campaign_id: str) -> ExecutionRecord:
    """Run the pair without persisting; run_one is this plus persistence."""
    if test.invalidation is not None:
        raise SchemaViolation(f"test {test.uid} is invalidated and cannot run")
    kernel = repo.entry_dir("test", test.uid) / test.source_ref
    if not kernel.is_file():
        raise NotFound(f"kernel file missing for test {test.uid}: {kernel}")

    command = build_command(config, kernel, params)
    argv = shlex.split(command)
    env = {**os.environ, **config.env}

    started_at = now_rfc3339()
    t0 = time.monotonic()
    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, env=env)
    except FileNotFoundError:
        raise ExecutorNotFound(f"executor not found: {argv[0]}") from None

    timed_out = False
    try:
        out, err = proc.communicate(timeout=config.timeout_ms / 1000.0)
    except subprocess.TimeoutExpired:
        timed_out = True
        proc.kill()
        out, err = proc.communicate()
    wall_ms = int((time.monotonic() - t0) * 1000)

    if timed_out:
        exit = ExitStatus.timed_out()
    elif proc.returncode < 0:
        exit = ExitStatus.signal(-proc.returncode)
    else:
        exit = ExitStatus.code(proc.returncode)

    # Classify on the full bytes; truncation only bounds what gets stored.
    outcome = parse_output(exit, out or b"", err or b"")
    stdout, out_cut = _capture(out or b"")
    stderr, err_cut = _capture(err or b"")
    return ExecutionRecord(
        test_uid=test.uid,
        config_uid=config.uid,
        campaign_id=campaign_id,
        started_at=started_at,
        wall_ms=wall_ms,
        exit=exit,
        stdout=stdout,
        stderr=stderr,
        stdout_truncated=out_cut,
        stderr_truncated=err_cut,
        outcome=outcome,
        command=command,
    )


def _stream_fields(repo: Repository, campaign_id: str, name: str,
                   data: bytes, truncated: bool) -> dict:
    """Inline small utf-8 output; divert anything big to a payload file,
    keeping a short preview in the record."""
    text = data.decode("utf-8", "backslashreplace")
    fields = {name: text, f"{name}_truncated": truncated, f"{name}_payload": None}
    if len(data) > INLINE_OUTPUT_LIMIT:
        fields[f"{name}_payload"] = repo.store_payload(campaign_id, data)
        fields[name] = text[:256] + "..."
    return fields


def record_to_json(repo: Repository, rec: ExecutionRecord) -> dict:
    doc = {
        "test_uid": rec.test_uid,
        "config_uid": rec.config_uid,
        "campaign_id": rec.campaign_id,
        "started_at": rec.started_at,
        "wall_ms": rec.wall_ms,
        "exit": {"kind": rec.exit.kind, "value": rec.exit.value},
        "outcome": {"kind": rec.outcome.kind, "value": rec.outcome.value},
        "command": rec.command,
    }
    doc.update(_stream_fields(repo, rec.campaign_id, "stdout",
                              rec.stdout, rec.stdout_truncated))
    doc.update(_stream_fields(repo, rec.campaign_id, "stderr",
                              rec.stderr, rec.stderr_truncated))
    return doc


def run_one(repo: Repository, test: TestCase, config: Configuration,
            params: EvalParams, campaign_id: str) -> ExecutionRecord:
    rec = execute(repo, test, config, params, campaign_id)
    repo.append_execution(campaign_id, record_to_json(repo, rec))
    return rec


def run_campaign(repo: Repository, tests: list[TestCase],
                 configs: list[Configuration], params: EvalParams,
                 parallelism: int = 1, name: str = "campaign") -> str:
    """Execute every (test, config) pair once and journal the records.

    Workers only run child processes; the calling thread persists results
    in submission order, so the journal is identical at any parallelism.
    """
    if parallelism < 1:
        raise SchemaViolation(f"parallelism must be >= 1, got {parallelism}")
    for t in tests:
        if t.invalidation is not None:
            raise SchemaViolation(f"test {t.uid} is invalidated and cannot run")

    campaign_id = repo.new_uid()
    repo.put_entry(RepoEntry(kind="campaign", uid=campaign_id, meta={
        "kind": "campaign",
        "uid": campaign_id,
        "created_at": now_rfc3339(),
        "name": name,
        "threads": params.thread_count,
        "config_uids": [c.uid for c in configs],
        "test_uids": [t.uid for t in tests],
    }))

    pairs = [(t, c) for t in tests for c in configs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(execute, repo, t, c, params, campaign_id)
                   for t, c in pairs]
        for future in futures:
            rec = future.result()
            repo.append_execution(campaign_id, record_to_json(repo, rec))
    return campaign_id


# -- configuration persistence ------------------------------------------------

def save_config(repo: Repository, config: Configuration) -> None:
    repo.put_entry(RepoEntry(kind="config", uid=config.uid, meta={
        "kind": "config",
        "uid": config.uid,
        "created_at": now_rfc3339(),
        "name": config.name,
        "command_template": config.command_template,
        "env": config.env,
        "timeout_ms": config.timeout_ms,
        "metadata": config.metadata,
    }))


def config_from_meta(meta: dict) -> Configuration:
    return Configuration(
        uid=meta["uid"],
        name=meta["name"],
        command_template=meta["command_template"],
        env=meta["env"],
        timeout_ms=meta["timeout_ms"],
        metadata=meta["metadata"],
    )


def load_config(repo: Repository, uid: str) -> Configuration:
    if not is_uid(uid):
        raise UnknownUid(f"malformed config uid: {uid!r}")
    try:
        return config_from_meta(repo.get_meta("config", uid))
    except NotFound:
        raise UnknownUid(f"no config with uid {uid}") from None


ADHOC_CAMPAIGN_NAME = "adhoc-rerun"


def find_rerun_campaign(repo: Repository, test_uid: str, config_uid: str) -> str | None:
    """Newest campaign whose journal already holds the pair, so a rerun
    lands next to the record it supersedes."""
    best = None
    best_stamp = ""
    for uid in repo.list_uids("campaign"):
        meta = repo.get_meta("campaign", uid)
        if meta["created_at"] < best_stamp:
            continue
        for rec in repo.read_executions(uid):
            if rec["test_uid"] == test_uid and rec["config_uid"] == config_uid:
                best, best_stamp = uid, meta["created_at"]
                break
    return best


def ensure_adhoc_campaign(repo: Repository) -> str:
    """Campaign that collects reruns of pairs no campaign has seen."""
    for uid in repo.list_uids("campaign"):
        if repo.get_meta("campaign", uid)["name"] == ADHOC_CAMPAIGN_NAME:
            return uid
    uid = repo.new_uid()
    repo.put_entry(RepoEntry(kind="campaign", uid=uid, meta={
        "kind": "campaign",
        "uid": uid,
        "created_at": now_rfc3339(),
        "name": ADHOC_CAMPAIGN_NAME,
        "threads": 1,
        "config_uids": [],
        "test_uids": [],
    }))
    return uid


def rerun_command(repo: Repository, test_uid: str, config_uid: str,
                  params: EvalParams) -> str:
    """The exact string run_one would execute for this triple, ready to be
    copied into a shell."""
    config = load_config(repo, config_uid)
    if not is_uid(test_uid):
        raise UnknownUid(f"malformed test uid: {test_uid!r}")
    try:
        meta = repo.get_meta("test", test_uid)
    except NotFound:
        raise UnknownUid(f"no test with uid {test_uid}") from None
    kernel = repo.entry_dir("test", test_uid) / meta["source_ref"]
    return build_command(config, kernel, params)
