"""Repository mechanics: UIDs, entry round-trips, append-only journals
with torn-tail quarantine, queries, views, and the writer lock."""

from __future__ import annotations

import json
import random
import re

import pytest

from difflab.errors import (InvalidRepository, NotFound, RepositoryLocked,
                            SchemaViolation, UnknownCampaign)
from difflab.store import (DEFAULT_VIEW, QueryFilter, RepoEntry, Repository,
                           dump_json_line, now_rfc3339)

UID_RE = re.compile(r"^[0-9a-f]{16}$")


def make_campaign(repo, test_uids=(), config_uids=()):
    uid = repo.new_uid()
    repo.put_entry(RepoEntry(kind="campaign", uid=uid, meta={
        "kind": "campaign", "uid": uid, "created_at": now_rfc3339(),
        "name": "t", "threads": 1,
        "config_uids": list(config_uids), "test_uids": list(test_uids),
    }))
    return uid


def record(test_uid, config_uid, kind="Result", value="00000000"):
    return {
        "test_uid": test_uid, "config_uid": config_uid, "campaign_id": "x",
        "started_at": now_rfc3339(), "wall_ms": 1, "command": "true",
        "exit": {"kind": "code", "value": 0},
        "outcome": {"kind": kind, "value": value if kind == "Result" else None},
        "stdout": "", "stderr": "",
        "stdout_truncated": False, "stderr_truncated": False,
        "stdout_payload": None, "stderr_payload": None,
    }


# -- uids -----------------------------------------------------------------------


def test_seeded_uid_sequence_is_reproducible(tmp_path):
    repo = Repository.init(tmp_path / "r", rng=random.Random(42))
    # Frozen golden draws of random.Random(42).getrandbits(64); init itself
    # consumes the first draw for the default view's uid.
    assert repo.new_uid() == "bdd640fb06671ad1"
    assert repo.new_uid() == "3eb13b9046685257"
    assert repo.new_uid() == "23b8c1e9392456de"
    repo.close()


def test_uid_format_holds_over_many_draws(repo):
    for _ in range(10_000):
        assert UID_RE.match(repo.new_uid())


def test_distinct_uids(repo):
    assert repo.new_uid() != repo.new_uid()


# -- entries --------------------------------------------------------------------


def test_put_get_round_trip(repo):
    uid = repo.new_uid()
    meta = {
        "kind": "config", "uid": uid, "created_at": now_rfc3339(),
        "name": "c", "command_template": "run {kernel}", "env": {"A": "1"},
        "timeout_ms": 1000, "metadata": {"device": "sim"},
    }
    repo.put_entry(RepoEntry(kind="config", uid=uid, meta=meta))
    got = repo.get_entry(uid)
    assert got.kind == "config"
    assert got.uid == uid
    assert got.meta == meta


def test_get_on_fresh_repo_is_not_found(repo):
    with pytest.raises(NotFound):
        repo.get_entry("0123456789abcdef")


def test_put_malformed_uid_rejected(repo):
    meta = {"kind": "config", "uid": "NOT-A-UID", "created_at": now_rfc3339(),
            "name": "c", "command_template": "x {kernel}", "env": {},
            "timeout_ms": 1, "metadata": {}}
    with pytest.raises(SchemaViolation):
        repo.put_entry(RepoEntry(kind="config", uid="NOT-A-UID", meta=meta))


def test_put_missing_required_key_rejected(repo):
    uid = repo.new_uid()
    with pytest.raises(SchemaViolation):
        repo.put_entry(RepoEntry(kind="config", uid=uid, meta={
            "kind": "config", "uid": uid, "created_at": now_rfc3339(),
        }))


def test_open_missing_repo_fails(tmp_path):
    with pytest.raises(InvalidRepository):
        Repository(tmp_path / "nowhere")


def test_init_refuses_populated_non_repo_dir(tmp_path):
    d = tmp_path / "d"
    d.mkdir()
    (d / "stray.txt").write_text("x")
    with pytest.raises(InvalidRepository):
        Repository.init(d)


# -- journal --------------------------------------------------------------------


def test_append_count_matches_line_count(repo):
    camp = make_campaign(repo)
    for i in range(200):
        repo.append_execution(camp, record(f"{i:016x}", "c" * 16))
    log = repo.root / "campaigns" / camp / "executions.jsonl"
    assert len(log.read_bytes().splitlines()) == 200
    assert len(repo.read_executions(camp)) == 200


def test_identical_appends_both_retained(repo):
    camp = make_campaign(repo)
    rec = record("a" * 16, "b" * 16)
    repo.append_execution(camp, rec)
    repo.append_execution(camp, rec)
    assert len(repo.read_executions(camp)) == 2


def test_append_to_unknown_campaign_rejected(repo):
    with pytest.raises(UnknownCampaign):
        repo.append_execution("f" * 16, record("a" * 16, "b" * 16))


def test_torn_final_line_quarantined_on_reopen(tmp_path):
    root = tmp_path / "r"
    repo = Repository.init(root)
    camp = make_campaign(repo)
    for i in range(3):
        repo.append_execution(camp, record(f"{i:016x}", "c" * 16))
    repo.close()

    log = root / "campaigns" / camp / "executions.jsonl"
    data = log.read_bytes()
    log.write_bytes(data[:-20])  # crash mid-record: torn final line
    torn = data[:-20].rpartition(b"\n")[2]

    repo = Repository(root, writer=True)
    repo.append_execution(camp, record("9" * 16, "c" * 16))
    records = repo.read_executions(camp)
    assert [r["test_uid"] for r in records] == \
        ["0" * 15 + "0", "0" * 15 + "1", "9" * 16]
    quarantine = log.with_name(log.name + ".quarantine")
    assert quarantine.read_bytes() == torn + b"\n"
    repo.close()


def test_reader_skips_torn_tail_without_writing(tmp_path):
    root = tmp_path / "r"
    repo = Repository.init(root)
    camp = make_campaign(repo)
    repo.append_execution(camp, record("a" * 16, "c" * 16))
    repo.append_execution(camp, record("b" * 16, "c" * 16))
    repo.close()
    log = root / "campaigns" / camp / "executions.jsonl"
    log.write_bytes(log.read_bytes()[:-10])

    reader = Repository(root)
    assert [r["test_uid"] for r in reader.read_executions(camp)] == ["a" * 16]
    # A pure reader must not repair the file behind the writer's back.
    assert not log.with_name(log.name + ".quarantine").exists()


def test_mid_file_corruption_is_an_error(repo):
    camp = make_campaign(repo)
    repo.append_execution(camp, record("a" * 16, "c" * 16))
    log = repo.root / "campaigns" / camp / "executions.jsonl"
    with open(log, "ab") as f:
        f.write(b"not json\n")
        f.write(dump_json_line(record("b" * 16, "c" * 16)).encode() + b"\n")
    with pytest.raises(InvalidRepository):
        repo.read_executions(camp)


def test_durability_across_reopen(tmp_path):
    root = tmp_path / "r"
    repo = Repository.init(root)
    camp = make_campaign(repo)
    repo.append_execution(camp, record("a" * 16, "b" * 16))
    repo.close()
    again = Repository(root)
    assert len(again.read_executions(camp)) == 1


# -- payloads -------------------------------------------------------------------


def test_payload_content_addressing(repo):
    camp = make_campaign(repo)
    blob = b"\x00\x01" * 5000
    p1 = repo.store_payload(camp, blob)
    p2 = repo.store_payload(camp, blob)
    assert p1 == p2
    assert repo.load_payload(camp, p1) == blob


# -- query ----------------------------------------------------------------------


def _brute_force(records, flt, test_meta):
    out = []
    for rec in records:
        if flt.test is not None and flt.test not in rec["test_uid"]:
            continue
        if flt.config is not None and rec["config_uid"] != flt.config:
            continue
        if flt.outcome is not None and rec["outcome"]["kind"] != flt.outcome:
            continue
        if flt.mode is not None and test_meta[rec["test_uid"]]["mode"] != flt.mode:
            continue
        if flt.active_only and test_meta[rec["test_uid"]].get("invalidation"):
            continue
        out.append(rec)
    return out


def test_query_matches_brute_force_scan(repo):
    rng = random.Random(7)
    modes = ["basic", "vector", "barrier"]
    kinds = ["Result", "CompilerCrash", "RuntimeCrash", "Timeout"]
    test_uids, test_meta = [], {}
    for i in range(12):
        uid = repo.new_uid()
        meta = {
            "kind": "test", "uid": uid, "created_at": now_rfc3339(),
            "mode": rng.choice(modes), "generator_version": "1.0.0",
            "source_ref": "kernel.mk",
            "family": None,
            "invalidation": {"reason": "x", "at": now_rfc3339()} if i % 5 == 0 else None,
        }
        repo.put_entry(RepoEntry(kind="test", uid=uid, meta=meta))
        test_uids.append(uid)
        test_meta[uid] = meta
    configs = [repo.new_uid() for _ in range(3)]
    camp = make_campaign(repo, test_uids, configs)
    records = []
    for t in test_uids:
        for c in configs:
            kind = rng.choice(kinds)
            rec = record(t, c, kind, f"{rng.randrange(2**32):08x}")
            repo.append_execution(camp, rec)
            records.append(rec)

    for _ in range(100):
        flt = QueryFilter(
            test=rng.choice([None, rng.choice(test_uids)[:6]]),
            config=rng.choice([None] + configs),
            outcome=rng.choice([None] + kinds),
            mode=rng.choice([None] + modes),
            active_only=rng.random() < 0.3,
        )
        expect = _brute_force(records, flt, test_meta)
        assert repo.query(camp, flt) == expect


def test_empty_filter_preserves_append_order(repo):
    camp = make_campaign(repo)
    uids = [f"{i:016x}" for i in range(20)]
    for uid in uids:
        repo.append_execution(camp, record(uid, "c" * 16))
    assert [r["test_uid"] for r in repo.query(camp)] == uids


# -- views ----------------------------------------------------------------------


def test_init_ships_default_view(repo):
    assert repo.get_view("default")["columns"] == DEFAULT_VIEW["columns"]


def test_view_round_trip_and_stable_uid(repo):
    v1 = repo.save_view("crashes", ["label.CompilerCrash", "label.RuntimeCrash"])
    v2 = repo.save_view("crashes", ["label.Timeout"])
    assert v1["uid"] == v2["uid"]
    assert repo.get_view("crashes")["columns"] == ["label.Timeout"]


def test_view_rejects_unknown_key_path(repo):
    with pytest.raises(SchemaViolation):
        repo.save_view("bad", ["outcome.kind", "no.such.key"])


# -- locking --------------------------------------------------------------------


def test_second_writer_is_locked_out(tmp_path):
    root = tmp_path / "r"
    w1 = Repository.init(root)
    with pytest.raises(RepositoryLocked):
        Repository(root, writer=True)
    w1.close()
    w2 = Repository(root, writer=True)  # released lock is reacquirable
    w2.close()


def test_readers_coexist_with_writer(tmp_path):
    root = tmp_path / "r"
    w = Repository.init(root)
    r1 = Repository(root)
    r2 = Repository(root)
    assert r1.list_uids("view") == r2.list_uids("view")
    with pytest.raises(RepositoryLocked):
        r1.save_view("x", ["test_uid"])
    w.close()
