"""UID-keyed experiment repository.

Everything the campaign produces lives under one directory tree:

    repo/
      .difflab-repo                       marker + layout version
      .lock                               advisory writer lock
      tests/<uid>/meta.json               one JSON document per entry,
      tests/<uid>/kernel.mk               payloads beside it
      configs/<uid>/meta.json
      campaigns/<uid>/meta.json
      campaigns/<uid>/executions.jsonl    append-only, one record per line
      campaigns/<uid>/payloads/           oversized captured output
      views/<uid>/meta.json
      verdicts/<campaign>/<test_uid>.json
      verdicts/<campaign>/emi/<base>.<config>.json

All JSON is UTF-8, timestamps RFC 3339. Single writer, many readers: a
writer-mode Repository holds an exclusive flock on .lock for its lifetime
and opening a second writer fails fast.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import random
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    InvalidRepository,
    MissingVerdicts,
    NotFound,
    RepositoryLocked,
    SchemaViolation,
    UnknownCampaign,
)

UID_RE = re.compile(r"^[0-9a-f]{16}$")
KINDS = ("test", "config", "campaign", "view")
KIND_DIRS = {"test": "tests", "config": "configs", "campaign": "campaigns", "view": "views"}

MARKER_NAME = ".difflab-repo"
LAYOUT_VERSION = 1

# Captured output larger than this is stored as a payload file instead of
# inline in the execution log.
INLINE_OUTPUT_LIMIT = 4096

# Key paths a ViewDef column may name. "label.*" entries select summary-table
# columns; the rest resolve against a (verdict-joined) execution record.
RECORD_PATHS = frozenset({
    "test_uid", "config_uid", "campaign_id", "started_at", "wall_ms", "command",
    "exit.kind", "exit.value", "outcome.kind", "outcome.value",
    "stdout", "stderr", "stdout_truncated", "stderr_truncated",
})
VERDICT_PATHS = frozenset({"verdict.label", "verdict.majority", "verdict.inconclusive"})
LABEL_PATHS = frozenset({
    "label.Correct", "label.WrongCode", "label.CompilerCrash",
    "label.RuntimeCrash", "label.Timeout", "label.Inconclusive",
})
VIEW_COLUMN_PATHS = RECORD_PATHS | VERDICT_PATHS | LABEL_PATHS

DEFAULT_VIEW = {
    "name": "default",
    "columns": ["test_uid", "config_uid", "outcome.kind", "outcome.value",
                "verdict.label", "wall_ms"],
    "filters": {},
}

# Outcome kinds an execution record can carry, and the vote labels that are
# only resolvable through persisted verdicts.
OUTCOME_KINDS = ("Result", "CompilerCrash", "RuntimeCrash", "Timeout")
VOTE_LABELS = ("Correct", "WrongCode")

_META_REQUIRED = {
    "test": ("mode", "generator_version", "source_ref", "family", "invalidation"),
    "config": ("name", "command_template", "env", "timeout_ms", "metadata"),
    "campaign": ("name", "threads", "config_uids", "test_uids"),
    "view": ("name", "columns", "filters"),
}


def is_uid(value: str) -> bool:
    return isinstance(value, str) and bool(UID_RE.match(value))


def now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def dump_json_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_json_atomic(path: Path, obj: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


@dataclass
class RepoEntry:
    kind: str
    uid: str
    meta: dict
    payload_paths: list[str] = field(default_factory=list)


@dataclass
class QueryFilter:
    """Predicates for Repository.query.

    test matches by UID substring containment; config is an exact UID.
    outcome accepts an outcome kind (Result/CompilerCrash/RuntimeCrash/
    Timeout) or a vote label (Correct/WrongCode); vote labels need the
    campaign to be classified first. mode and generator_version join
    through the test entries. active_only drops records of invalidated
    tests; the raw log view keeps them by default.
    """

    test: str | None = None
    config: str | None = None
    outcome: str | None = None
    mode: str | None = None
    generator_version: str | None = None
    active_only: bool = False

    def is_empty(self) -> bool:
        return (self.test is None and self.config is None and self.outcome is None
                and self.mode is None and self.generator_version is None
                and not self.active_only)


class Repository:
    """Handle on one on-disk repository.

    writer=True acquires the single-writer lock for the lifetime of the
    handle (use close() or a with-block to release it). Readers take no
    lock and may coexist with one writer.
    """

    def __init__(self, root: str | os.PathLike, writer: bool = False,
                 rng: random.Random | None = None):
        self.root = Path(root)
        marker = self.root / MARKER_NAME
        if not marker.is_file():
            raise InvalidRepository(f"not a repository (missing {MARKER_NAME}): {self.root}")
        self.writer = writer
        self._rng = rng if rng is not None else random.Random()
        self._lock_fd = None
        self._clean_logs: set[str] = set()
        if writer:
            self._acquire_lock()

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def init(cls, root: str | os.PathLike, rng: random.Random | None = None) -> "Repository":
        """Create (or reopen) a repository at root. Idempotent on a valid repo."""
        rootp = Path(root)
        marker = rootp / MARKER_NAME
        if marker.is_file():
            return cls(rootp, writer=True, rng=rng)
        if rootp.exists() and not rootp.is_dir():
            raise InvalidRepository(f"not a directory: {rootp}")
        if rootp.is_dir() and any(rootp.iterdir()):
            raise InvalidRepository(f"directory exists and is not a repository: {rootp}")
        rootp.mkdir(parents=True, exist_ok=True)
        for sub in ("tests", "configs", "campaigns", "views", "verdicts"):
            (rootp / sub).mkdir()
        _write_json_atomic(marker, {"layout": LAYOUT_VERSION, "created_at": now_rfc3339()})
        repo = cls(rootp, writer=True, rng=rng)
        repo.save_view(DEFAULT_VIEW["name"], DEFAULT_VIEW["columns"], DEFAULT_VIEW["filters"])
        return repo

    def _acquire_lock(self) -> None:
        fd = os.open(self.root / ".lock", os.O_RDWR | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(fd)
            raise RepositoryLocked(f"another writer holds {self.root / '.lock'}") from None
        self._lock_fd = fd

    def close(self) -> None:
        if self._lock_fd is not None:
            fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
            os.close(self._lock_fd)
            self._lock_fd = None

    def __enter__(self) -> "Repository":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _require_writer(self) -> None:
        if not self.writer:
            raise RepositoryLocked("repository opened read-only")

    # -- UIDs ----------------------------------------------------------------

    def new_uid(self) -> str:
        """Draw a fresh 16-hex-char UID, retrying on the (unlikely) collision."""
        while True:
            uid = f"{self._rng.getrandbits(64):016x}"
            if not self._uid_exists(uid):
                return uid

    def _uid_exists(self, uid: str) -> bool:
        return any((self.root / d / uid).exists() for d in KIND_DIRS.values())

    # -- entries -------------------------------------------------------------

    def entry_dir(self, kind: str, uid: str) -> Path:
        return self.root / KIND_DIRS[kind] / uid

    def put_entry(self, entry: RepoEntry) -> None:
        self._require_writer()
        self._validate_meta(entry.kind, entry.uid, entry.meta)
        d = self.entry_dir(entry.kind, entry.uid)
        d.mkdir(parents=True, exist_ok=True)
        _write_json_atomic(d / "meta.json", entry.meta)

    def get_entry(self, uid: str) -> RepoEntry:
        if not is_uid(uid):
            raise NotFound(f"malformed uid: {uid!r}")
        for kind, d in KIND_DIRS.items():
            meta_path = self.root / d / uid / "meta.json"
            if meta_path.is_file():
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                payloads = sorted(p.name for p in (self.root / d / uid).iterdir()
                                  if p.name != "meta.json" and p.is_file())
                return RepoEntry(kind=kind, uid=uid, meta=meta, payload_paths=payloads)
        raise NotFound(f"no entry with uid {uid}")

    def get_meta(self, kind: str, uid: str) -> dict:
        meta_path = self.entry_dir(kind, uid) / "meta.json"
        if not meta_path.is_file():
            raise NotFound(f"no {kind} entry with uid {uid}")
        return json.loads(meta_path.read_text(encoding="utf-8"))

    def list_uids(self, kind: str) -> list[str]:
        base = self.root / KIND_DIRS[kind]
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir()
                      if p.is_dir() and is_uid(p.name) and (p / "meta.json").is_file())

    def entries(self, kind: str) -> list[dict]:
        return [self.get_meta(kind, uid) for uid in self.list_uids(kind)]

    def _validate_meta(self, kind: str, uid: str, meta: dict) -> None:
        if kind not in KINDS:
            raise SchemaViolation(f"unknown entry kind: {kind!r}")
        if not is_uid(uid):
            raise SchemaViolation(f"malformed uid: {uid!r}")
        if not isinstance(meta, dict):
            raise SchemaViolation("meta must be a JSON object")
        for key in ("kind", "uid", "created_at"):
            if key not in meta:
                raise SchemaViolation(f"meta missing required key {key!r}")
        if meta["kind"] != kind:
            raise SchemaViolation(f"meta kind {meta['kind']!r} != entry kind {kind!r}")
        if meta["uid"] != uid:
            raise SchemaViolation(f"meta uid {meta['uid']!r} != entry uid {uid!r}")
        for key in _META_REQUIRED[kind]:
            if key not in meta:
                raise SchemaViolation(f"{kind} meta missing required key {key!r}")

    # -- execution logs ------------------------------------------------------

    def _campaign_dir(self, campaign_id: str, must_exist: bool = True) -> Path:
        d = self.root / "campaigns" / campaign_id
        if must_exist and not (d / "meta.json").is_file():
            raise UnknownCampaign(f"no campaign {campaign_id}")
        return d

    def _log_path(self, campaign_id: str) -> Path:
        return self._campaign_dir(campaign_id) / "executions.jsonl"

    def append_execution(self, campaign_id: str, record: dict) -> None:
        """Append one record to the campaign's journal. Prior lines are
        never touched; a torn final line from an earlier crash is
        quarantined before the first append of this handle."""
        self._require_writer()
        path = self._log_path(campaign_id)
        if campaign_id not in self._clean_logs:
            self._quarantine_torn_tail(path)
            self._clean_logs.add(campaign_id)
        with open(path, "ab") as f:
            f.write(dump_json_line(record).encode("utf-8") + b"\n")

    def _quarantine_torn_tail(self, path: Path) -> None:
        if not path.exists():
            return
        data = path.read_bytes()
        if not data or data.endswith(b"\n"):
            return
        cut = data.rfind(b"\n") + 1  # 0 when the whole file is one torn line
        torn = data[cut:]
        with open(path.with_name(path.name + ".quarantine"), "ab") as q:
            q.write(torn + b"\n")
        with open(path, "r+b") as f:
            f.truncate(cut)

    def read_executions(self, campaign_id: str) -> list[dict]:
        """All records of a campaign, in append order. A torn final line is
        skipped (and quarantined first when this handle is the writer)."""
        path = self._log_path(campaign_id)
        if self.writer and campaign_id not in self._clean_logs:
            self._quarantine_torn_tail(path)
            self._clean_logs.add(campaign_id)
        if not path.exists():
            return []
        records = []
        data = path.read_bytes()
        complete, sep, _tail = data.rpartition(b"\n")
        for i, line in enumerate((complete + sep).splitlines()):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InvalidRepository(
                    f"corrupt execution log {path} at line {i + 1}: {exc}") from exc
        return records

    def store_payload(self, campaign_id: str, data: bytes) -> str:
        """Store an oversized output capture; returns a path relative to the
        campaign directory (content-addressed, so identical blobs share a file)."""
        self._require_writer()
        d = self._campaign_dir(campaign_id) / "payloads"
        d.mkdir(exist_ok=True)
        name = hashlib.sha256(data).hexdigest()[:24] + ".bin"
        target = d / name
        if not target.exists():
            tmp = d / (name + ".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, target)
        return f"payloads/{name}"

    def load_payload(self, campaign_id: str, relpath: str) -> bytes:
        return (self._campaign_dir(campaign_id) / relpath).read_bytes()

    # -- queries -------------------------------------------------------------

    def query(self, campaign_id: str, flt: QueryFilter | None = None) -> list[dict]:
        """Exactly the records matching the filter, in append order."""
        records = self.read_executions(campaign_id)
        if flt is None or flt.is_empty():
            return records

        test_meta_cache: dict[str, dict | None] = {}

        def tmeta(uid: str) -> dict | None:
            if uid not in test_meta_cache:
                try:
                    test_meta_cache[uid] = self.get_meta("test", uid)
                except NotFound:
                    test_meta_cache[uid] = None
            return test_meta_cache[uid]

        labels: dict[str, dict] | None = None
        if flt.outcome in VOTE_LABELS:
            labels = self.load_verdicts(campaign_id)
            if not labels:
                raise MissingVerdicts(
                    f"filter outcome={flt.outcome} needs verdicts; "
                    f"campaign {campaign_id} is not classified")

        out = []
        for rec in records:
            if flt.test is not None and flt.test not in rec["test_uid"]:
                continue
            if flt.config is not None and rec["config_uid"] != flt.config:
                continue
            if flt.outcome is not None:
                if flt.outcome in VOTE_LABELS:
                    verdict = labels.get(rec["test_uid"])
                    if verdict is None:
                        continue
                    if verdict["per_config"].get(rec["config_uid"]) != flt.outcome:
                        continue
                elif rec["outcome"]["kind"] != flt.outcome:
                    continue
            if flt.mode is not None or flt.generator_version is not None or flt.active_only:
                meta = tmeta(rec["test_uid"])
                if meta is None:
                    continue
                if flt.mode is not None and meta["mode"] != flt.mode:
                    continue
                if flt.generator_version is not None and \
                        meta["generator_version"] != flt.generator_version:
                    continue
                if flt.active_only and meta.get("invalidation"):
                    continue
            out.append(rec)
        return out

    # -- verdicts ------------------------------------------------------------

    def _verdict_dir(self, campaign_id: str) -> Path:
        return self.root / "verdicts" / campaign_id

    def save_verdict(self, campaign_id: str, test_uid: str, verdict: dict) -> None:
        self._require_writer()
        self._campaign_dir(campaign_id)
        d = self._verdict_dir(campaign_id)
        d.mkdir(parents=True, exist_ok=True)
        _write_json_atomic(d / f"{test_uid}.json", verdict)

    def load_verdicts(self, campaign_id: str) -> dict[str, dict]:
        d = self._verdict_dir(campaign_id)
        if not d.is_dir():
            return {}
        out = {}
        for p in sorted(d.glob("*.json")):
            out[p.stem] = json.loads(p.read_text(encoding="utf-8"))
        return out

    def save_emi_verdict(self, campaign_id: str, verdict: dict) -> None:
        self._require_writer()
        d = self._verdict_dir(campaign_id) / "emi"
        d.mkdir(parents=True, exist_ok=True)
        name = f"{verdict['base_uid']}.{verdict['config_uid']}.json"
        _write_json_atomic(d / name, verdict)

    def load_emi_verdicts(self, campaign_id: str) -> list[dict]:
        d = self._verdict_dir(campaign_id) / "emi"
        if not d.is_dir():
            return []
        return [json.loads(p.read_text(encoding="utf-8")) for p in sorted(d.glob("*.json"))]

    # -- views ---------------------------------------------------------------

    def save_view(self, name: str, columns: list[str], filters: dict | None = None) -> dict:
        """Create or replace the named view. Column key-paths are validated
        against the record schema here, at save time."""
        self._require_writer()
        if not name or "/" in name:
            raise SchemaViolation(f"bad view name: {name!r}")
        if not columns:
            raise SchemaViolation("a view needs at least one column")
        for col in columns:
            if col not in VIEW_COLUMN_PATHS:
                raise SchemaViolation(f"unknown view column key-path: {col!r}")
        existing = self._view_uid_by_name(name)
        uid = existing if existing is not None else self.new_uid()
        meta = {
            "kind": "view", "uid": uid, "created_at": now_rfc3339(),
            "name": name, "columns": list(columns), "filters": dict(filters or {}),
        }
        self.put_entry(RepoEntry(kind="view", uid=uid, meta=meta))
        return meta

    def _view_uid_by_name(self, name: str) -> str | None:
        for meta in self.entries("view"):
            if meta["name"] == name:
                return meta["uid"]
        return None

    def get_view(self, name: str) -> dict:
        for meta in self.entries("view"):
            if meta["name"] == name:
                return meta
        raise NotFound(f"no view named {name!r}")

    def list_views(self) -> list[dict]:
        return self.entries("view")
