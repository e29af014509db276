"""Scenario acceptance suite.

Each test is one scenario with its tolerance stated inline; the fixtures
at module scope are shared where two scenarios examine the same campaign.
The suite spawns a few thousand evaluator processes and dominates the
test run's wall time.
"""

from __future__ import annotations

import json
import random
import re
import shlex
import subprocess
import time

import pytest

from difflab.corpus import Corpus
from difflab.minikernel import faults
from difflab.minikernel.emi import dead_guard, make_variants
from difflab.minikernel.evaluate import EvalParams, evaluate
from difflab.minikernel.faults import FaultProfile
from difflab.minikernel.generate import GENERATOR_VERSION, generate_program
from difflab.minikernel.lang import (Assign, BinOp, IfBlock, IntLit, Program,
                                     VarRef, parse_program, print_program)
from difflab.modes import TestMode
from difflab.oracle import (check_determinism, classify_campaign,
                            classify_emi_family, majority_vote,
                            reliability_score)
from difflab.report import render, summarize
from difflab.runner import Outcome, execute, run_campaign
from difflab.store import Repository

from conftest import make_config, register_generated

SRC = "var a;\na = 1;\n"


@pytest.fixture(scope="module")
def module_repo(tmp_path_factory):
    repo = Repository.init(tmp_path_factory.mktemp("acceptance") / "repo",
                           rng=random.Random(4242))
    yield repo
    repo.close()


def test_criterion_1_bookkeeping_arithmetic_at_scale(tmp_path):
    # 250 bases with 40 variants each; invalidating 70 bases must leave
    # exactly 180 bases and 7,200 variants active, with 2,870 invalidated.
    # Exact counts, under 10 seconds.
    repo = Repository.init(tmp_path / "repo", rng=random.Random(1))
    corpus = Corpus(repo)
    t0 = time.monotonic()

    bases = []
    for _ in range(250):
        base = corpus.register_test(SRC, TestMode.BASIC, "1.0.0")
        corpus.create_family(base, [SRC] * 40, EvalParams(16))
        bases.append(base)
    for base in bases[:70]:
        corpus.invalidate(base.uid, "screened out")

    active_bases = corpus.active_tests(family="base")
    active_variants = corpus.active_tests(family="variant")
    registered = repo.list_uids("test")
    elapsed = time.monotonic() - t0
    repo.close()

    assert len(registered) == 250 + 250 * 40
    assert len(active_bases) == 180
    assert len(active_variants) == 180 * 40 == 7200
    invalidated = len(registered) - len(active_bases) - len(active_variants)
    assert invalidated == 70 + 70 * 40 == 2870
    assert elapsed < 10.0, f"bookkeeping took {elapsed:.1f}s"


# -- reliability boundary fixture (shared with replay fidelity) ---------------------


def _seed_with_exact_count(uids, kind: str, want: int,
                           start: int) -> tuple[int, set]:
    """Smallest seed >= start whose fault selection hits exactly `want`
    of the given subjects."""
    seed = start
    while True:
        profile = FaultProfile(kind, p=0.25, seed=seed)
        picked = {u for u in uids if faults.selects(profile, u)}
        if len(picked) == want:
            return seed, picked
        seed += 1


@pytest.fixture(scope="module")
def boundary(module_repo):
    """600 tests against one config crashing on exactly 150 of them and
    one crashing on exactly 149. Crash labels need no voting quorum, so
    the boundary holds without honest voter configs; where both configs
    produce a result they agree and vote each other Correct."""
    corpus = Corpus(module_repo)
    t0 = time.monotonic()
    cases = register_generated(corpus, 600, seed=10_000, size=6)
    uids = [c.uid for c in cases]

    seed_150, set_150 = _seed_with_exact_count(uids, "compile_crash", 150, 0)
    seed_149, set_149 = _seed_with_exact_count(uids, "runtime_crash", 149, 0)

    configs = [
        make_config(module_repo, "crash-150", fault="compile_crash:p=0.25",
                    seed=seed_150),
        make_config(module_repo, "crash-149", fault="runtime_crash:p=0.25",
                    seed=seed_149),
    ]
    campaign = run_campaign(module_repo, cases, configs, EvalParams(8),
                            parallelism=8, name="reliability-benchmark")
    verdicts = classify_campaign(module_repo, campaign)
    elapsed = time.monotonic() - t0
    return {
        "repo": module_repo,
        "uids": uids,
        "configs": configs,
        "campaign": campaign,
        "verdicts": verdicts,
        "sets": {configs[0].uid: ("CompilerCrash", set_150),
                 configs[1].uid: ("RuntimeCrash", set_149)},
        "elapsed": elapsed,
    }


def test_criterion_2_reliability_boundary_inclusive_at_25_percent(boundary):
    # 150/600 failing is exactly the threshold and must flag; 149/600
    # must not. Exact; the scenario stays under 2 minutes at parallelism 8.
    verdicts = list(boundary["verdicts"].values())
    crash_150, crash_149 = boundary["configs"]

    r150 = reliability_score(crash_150.uid, verdicts)
    assert (r150.total, r150.unreliable) == (600, 150)
    assert r150.below_threshold

    r149 = reliability_score(crash_149.uid, verdicts)
    assert (r149.total, r149.unreliable) == (600, 149)
    assert not r149.below_threshold

    assert boundary["elapsed"] < 120.0, \
        f"boundary scenario took {boundary['elapsed']:.1f}s"


def test_criterion_2_labels_match_the_seeded_sets(boundary):
    # each config's crash labels must be exactly its seeded selection
    for config_uid, (label, seeded) in boundary["sets"].items():
        got = {uid for uid, v in boundary["verdicts"].items()
               if v.per_config.get(config_uid) == label}
        assert got == seeded


def test_criterion_3_fault_oracle_equivalence_with_brute_force_recount(tmp_path):
    # 4 honest configs and one wrong_code(p=0.1): the verdict labels must
    # equal the seeded fault set, and an independent recount of the raw
    # journal must agree verdict for verdict. Set equality, no tolerance.
    repo = Repository.init(tmp_path / "repo", rng=random.Random(3))
    corpus = Corpus(repo)
    cases = register_generated(corpus, 200, seed=20_000, size=6)
    configs = [make_config(repo, f"honest-{i}") for i in range(4)]
    liar = make_config(repo, "liar", fault="wrong_code:p=0.1", seed=31)
    profile = FaultProfile("wrong_code", p=0.1, seed=31)
    seeded = {c.uid for c in cases if faults.selects(profile, c.uid)}
    assert seeded, "seed must select a nonempty fault set"

    campaign = run_campaign(repo, cases, configs + [liar], EvalParams(4),
                            parallelism=8)
    verdicts = classify_campaign(repo, campaign)

    wrong = {uid for uid, v in verdicts.items()
             if v.per_config[liar.uid] == "WrongCode"}
    assert wrong == seeded
    for uid, verdict in verdicts.items():
        for config in configs:
            assert verdict.per_config[config.uid] == "Correct"
        if uid not in seeded:
            assert verdict.per_config[liar.uid] == "Correct"

    # independent recount straight from the journal file
    journal = repo.root / "campaigns" / campaign / "executions.jsonl"
    by_test: dict[str, dict[str, str]] = {}
    for line in journal.read_bytes().splitlines():
        doc = json.loads(line)
        assert doc["outcome"]["kind"] == "Result"
        by_test.setdefault(doc["test_uid"], {})[doc["config_uid"]] = \
            doc["outcome"]["value"]
    assert set(by_test) == set(verdicts)
    for uid, values in by_test.items():
        counts: dict[str, int] = {}
        for value in values.values():
            counts[value] = counts.get(value, 0) + 1
        top = max(counts.values())
        majority = [v for v, n in counts.items() if n == top]
        assert len(majority) == 1 and top >= 2  # honest quorum always exists
        expect = {c: ("Correct" if v == majority[0] else "WrongCode")
                  for c, v in values.items()}
        assert verdicts[uid].per_config == expect
        assert verdicts[uid].majority == majority[0]
    repo.close()


def test_criterion_4_equal_split_and_quorum():
    # constructed outcome maps, exact verdicts
    aa = Outcome("Result", "aa")
    bb = Outcome("Result", "bb")

    majority, labels, no_vote = majority_vote(
        {"c1": aa, "c2": aa, "c3": bb, "c4": bb})
    assert majority is None
    assert no_vote == ("c1", "c2", "c3", "c4")

    majority, _, no_vote = majority_vote({"c1": aa})
    assert majority is None
    assert no_vote == ("c1",)

    results = {f"c{i}": aa for i in range(1, 7)}
    results.update({f"c{i}": bb for i in range(7, 10)})
    results["c10"] = Outcome("RuntimeCrash")
    majority, labels, _ = majority_vote(results)
    assert majority == "aa"
    assert sum(1 for l in labels.values() if l == "WrongCode") == 3
    assert labels["c10"] == "RuntimeCrash"


def test_criterion_5_emi_preservation_across_thread_counts():
    # >= 1000 randomized (base, variant) pairs over T in {1,2,16,64},
    # every variant checksum equal to its base. Zero failures.
    pairs = 0
    for threads in (1, 2, 16, 64):
        params = EvalParams(threads)
        for i in range(63):
            base = generate_program(seed=50_000 + i, size=10,
                                    mode=TestMode.ALL)
            want = evaluate(base, params).checksum
            for variant in make_variants(base, params, 4, seed=900 + i):
                assert evaluate(variant, params).checksum == want, \
                    f"variant diverged at T={threads}, base seed {50_000 + i}"
                pairs += 1
    assert pairs >= 1000


def test_criterion_5_exec_dead_exposes_live_writes(tmp_path):
    # Variants whose dead blocks write live state diverge once every
    # branch is forced, and the family verdict flags exactly those.
    repo = Repository.init(tmp_path / "repo", rng=random.Random(5))
    corpus = Corpus(repo)
    params = EvalParams(16)
    base = Program(("x", "y"), (
        Assign("x", IntLit(41)),
        Assign("y", BinOp("*", VarRef("x"), IntLit(3))),
    ))

    def with_dead_block(body_stmts) -> Program:
        block = IfBlock(dead_guard(params), tuple(body_stmts))
        return Program(base.declared_vars, base.statements + (block,))

    live_write = with_dead_block([Assign("x", BinOp("^", VarRef("x"), IntLit(1)))])
    noop_write = with_dead_block([Assign("x", BinOp("^", VarRef("x"), IntLit(0)))])
    live_write_2 = with_dead_block([Assign("y", BinOp("+", VarRef("y"), IntLit(7)))])

    base_case = corpus.register_test(print_program(base), TestMode.BASIC,
                                     GENERATOR_VERSION)
    family = corpus.create_family(
        base_case,
        [print_program(p) for p in (live_write, noop_write, live_write_2)],
        params)
    tests = [base_case] + [corpus.get_test(u) for u in family.variant_uids]

    honest = make_config(repo, "honest")
    forced = make_config(repo, "forced", fault="exec_dead")

    clean = run_campaign(repo, tests, [honest], params)
    verdict = classify_emi_family(family, repo.read_executions(clean))
    assert verdict.diverging_variants == ()
    assert verdict.crashing_variants == ()

    exposed = run_campaign(repo, tests, [forced], params)
    verdict = classify_emi_family(family, repo.read_executions(exposed))
    assert verdict.diverging_variants == (family.variant_uids[0],
                                          family.variant_uids[2])
    assert verdict.crashing_variants == ()
    repo.close()


def test_criterion_6_timeout_reaping_and_determinism_screen(tmp_path):
    repo = Repository.init(tmp_path / "repo", rng=random.Random(6))
    corpus = Corpus(repo)
    (case,) = register_generated(corpus, 1, seed=30_000)
    params = EvalParams(4)

    # a sleeping executor times out and is reaped within timeout + 500 ms
    sleeper = make_config(repo, "sleeper", fault="timeout", timeout_ms=400)
    t0 = time.monotonic()
    rec = execute(repo, case, sleeper, params, "0" * 16)
    reaped_ms = (time.monotonic() - t0) * 1000
    assert rec.outcome == Outcome("Timeout")
    assert reaped_ms <= 400 + 500, f"reaping took {reaped_ms:.0f}ms"

    # alternating output is flagged with two repetitions
    flaky = make_config(repo, "flaky", fault="nondet:period=1")
    assert not check_determinism(repo, case, flaky, params, repetitions=2)

    # the fault-free evaluator passes three
    honest = make_config(repo, "honest")
    assert check_determinism(repo, case, honest, params, repetitions=3)
    repo.close()


@pytest.fixture(scope="module")
def parallel_pair(module_repo):
    """The same 40 tests and 3 configs run at parallelism 1 and 8."""
    corpus = Corpus(module_repo)
    cases = register_generated(corpus, 40, seed=40_000, size=8)
    configs = [make_config(module_repo, "honest-a"),
               make_config(module_repo, "honest-b"),
               make_config(module_repo, "liar", fault="wrong_code:p=0.3",
                           seed=12)]
    params = EvalParams(8)
    serial = run_campaign(module_repo, cases, configs, params, parallelism=1)
    wide = run_campaign(module_repo, cases, configs, params, parallelism=8)
    return {"configs": configs, "serial": serial, "wide": wide}


def test_criterion_7_campaign_determinism_across_parallelism(module_repo,
                                                             parallel_pair):
    # one worker and eight workers must yield identical verdicts and a
    # byte-identical CSV rendering
    verdicts_serial = classify_campaign(module_repo, parallel_pair["serial"])
    verdicts_wide = classify_campaign(module_repo, parallel_pair["wide"])

    assert verdicts_serial == verdicts_wide
    table_serial = summarize(module_repo, parallel_pair["serial"],
                             verdicts_serial)
    table_wide = summarize(module_repo, parallel_pair["wide"], verdicts_wide)
    assert table_serial.cells == table_wide.cells
    assert render(table_serial, "csv") == render(table_wide, "csv")


def test_criterion_8_replay_fidelity_of_recorded_commands(module_repo,
                                                          parallel_pair):
    # re-executing 50 recorded commands verbatim reproduces each recorded
    # checksum exactly
    honest = {c.uid for c in parallel_pair["configs"][:2]}
    records = [doc
               for campaign in (parallel_pair["serial"],
                                parallel_pair["wide"])
               for doc in module_repo.read_executions(campaign)
               if doc["config_uid"] in honest]
    sample = random.Random(88).sample(records, 50)
    for doc in sample:
        assert doc["outcome"]["kind"] == "Result"
        proc = subprocess.run(shlex.split(doc["command"]),
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        m = re.search(r"^RESULT:[ \t]*([0-9a-fA-F]+)[ \t]*\r?$",
                      proc.stdout, re.MULTILINE)
        assert m and m.group(1).lower() == doc["outcome"]["value"], \
            f"replay of {doc['test_uid']} x {doc['config_uid']} diverged"
