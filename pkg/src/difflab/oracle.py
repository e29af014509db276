"""Classification logic: majority voting across configurations, EMI
family verdicts, determinism screening, and the reliability-threshold
benchmark.

Voting rules. Only Result-producing executions vote; crashes and
timeouts are labeled but can neither form nor block a majority. The
majority is the strict plurality value; a shared top count or a voting
population below two leaves the test inconclusive. In an inconclusive
verdict the result-producing configs receive no vote label at all: they
are listed in no_vote_configs, so every config still appears exactly
once across (per_config, no_vote_configs).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import EmiFamily, TestCase
from .errors import (DuplicateConfig, EmptyInput, MissingBaseRecord,
                     MissingConfigLabel, SchemaViolation)
from .minikernel.evaluate import EvalParams
from .runner import Configuration, ExecutionRecord, Outcome, execute
from .store import Repository

LABELS = ("Correct", "WrongCode", "CompilerCrash", "RuntimeCrash", "Timeout")
CRASH_KINDS = ("CompilerCrash", "RuntimeCrash", "Timeout")

RELIABILITY_THRESHOLD = 0.25
MIN_VOTERS = 2

# Campaign id stamped on throwaway executions that are never journaled.
_SCRATCH_CAMPAIGN = "0" * 16


@dataclass(frozen=True)
class TestVerdict:
    test_uid: str
    majority: str | None
    per_config: dict  # config_uid -> label
    no_vote_configs: tuple[str, ...]
    inconclusive: bool


@dataclass(frozen=True)
class EmiVerdict:
    base_uid: str
    config_uid: str
    diverging_variants: tuple[str, ...]
    crashing_variants: tuple[str, ...]
    base_outcome: Outcome


@dataclass(frozen=True)
class ReliabilityReport:
    config_uid: str
    total: int
    unreliable: int
    fraction: float
    below_threshold: bool
    include_timeouts: bool


def _outcome_of(rec: ExecutionRecord | dict) -> Outcome:
    if isinstance(rec, dict):
        return Outcome(rec["outcome"]["kind"], rec["outcome"].get("value"))
    return rec.outcome


def _config_of(rec: ExecutionRecord | dict) -> str:
    return rec["config_uid"] if isinstance(rec, dict) else rec.config_uid


def _test_of(rec: ExecutionRecord | dict) -> str:
    return rec["test_uid"] if isinstance(rec, dict) else rec.test_uid


def majority_vote(results: dict) -> tuple[str | None, dict, tuple[str, ...]]:
    """(majority, labels, no_vote) for a config_uid -> Outcome map.

    labels holds crash/timeout labels always, and Correct/WrongCode only
    when a majority exists; no_vote lists the result-producing configs
    left unlabeled by an inconclusive vote.
    """
    if not results:
        raise EmptyInput("majority_vote needs at least one outcome")

    labels: dict[str, str] = {}
    votes: dict[str, str] = {}
    for config_uid, outcome in results.items():
        if outcome.kind == "Result":
            votes[config_uid] = outcome.value
        else:
            labels[config_uid] = outcome.kind

    majority = None
    if len(votes) >= MIN_VOTERS:
        counts = Counter(votes.values())
        (top_value, top_count), = counts.most_common(1)
        if sum(1 for c in counts.values() if c == top_count) == 1:
            majority = top_value

    if majority is None:
        return None, labels, tuple(sorted(votes))
    for config_uid, value in votes.items():
        labels[config_uid] = "Correct" if value == majority else "WrongCode"
    return majority, labels, ()


def classify_test(test: TestCase | str, records: list) -> TestVerdict:
    test_uid = test.uid if isinstance(test, TestCase) else test
    results: dict[str, Outcome] = {}
    for rec in records:
        config_uid = _config_of(rec)
        if config_uid in results:
            raise DuplicateConfig(
                f"config {config_uid} appears twice for test {test_uid}")
        results[config_uid] = _outcome_of(rec)
    majority, labels, no_vote = majority_vote(results)
    return TestVerdict(
        test_uid=test_uid,
        majority=majority,
        per_config=labels,
        no_vote_configs=no_vote,
        inconclusive=majority is None,
    )


def classify_emi_family(family: EmiFamily, records: list) -> EmiVerdict:
    """Verdict for one family on one configuration. Divergence is only
    meaningful against a base that produced a Result; a crashed base
    yields crash bookkeeping alone."""
    configs = {_config_of(r) for r in records}
    if len(configs) > 1:
        raise SchemaViolation(
            f"EMI records must come from one config, got {sorted(configs)}")
    by_test: dict[str, Outcome] = {}
    for rec in records:  # later records win, matching replay-then-reclassify
        by_test[_test_of(rec)] = _outcome_of(rec)

    if family.base_uid not in by_test:
        raise MissingBaseRecord(f"no record for base {family.base_uid}")
    base_outcome = by_test[family.base_uid]

    diverging = []
    crashing = []
    for uid in family.variant_uids:
        outcome = by_test.get(uid)
        if outcome is None:
            continue
        if outcome.kind in CRASH_KINDS:
            crashing.append(uid)
        elif base_outcome.kind == "Result" and outcome.value != base_outcome.value:
            diverging.append(uid)
    return EmiVerdict(
        base_uid=family.base_uid,
        config_uid=configs.pop() if configs else "",
        diverging_variants=tuple(diverging),
        crashing_variants=tuple(crashing),
        base_outcome=base_outcome,
    )


def check_determinism(repo: Repository, test: TestCase, config: Configuration,
                      params: EvalParams, repetitions: int = 2) -> bool:
    """Run the pair repetitions times (serially, unpersisted); true iff
    every run lands on the identical Outcome."""
    if repetitions < 2:
        raise SchemaViolation(f"repetitions must be >= 2, got {repetitions}")
    seen = {
        _outcome_of(execute(repo, test, config, params, _SCRATCH_CAMPAIGN))
        for _ in range(repetitions)
    }
    return len(seen) == 1


def reliability_score(config_uid: str, verdicts: list[TestVerdict],
                      include_timeouts: bool = False,
                      threshold: float = RELIABILITY_THRESHOLD) -> ReliabilityReport:
    """Fraction of the benchmark the config failed: crashes plus wrong-code
    results, over all verdicts. A config left voteless by an inconclusive
    test counts toward the denominator only."""
    if not verdicts:
        raise EmptyInput("reliability_score needs at least one verdict")
    bad = {"CompilerCrash", "RuntimeCrash", "WrongCode"}
    if include_timeouts:
        bad.add("Timeout")
    k = 0
    for v in verdicts:
        label = v.per_config.get(config_uid)
        if label is None:
            if config_uid not in v.no_vote_configs:
                raise MissingConfigLabel(
                    f"verdict for test {v.test_uid} has no label for config {config_uid}")
            continue
        if label in bad:
            k += 1
    n = len(verdicts)
    fraction = k / n
    return ReliabilityReport(
        config_uid=config_uid,
        total=n,
        unreliable=k,
        fraction=fraction,
        below_threshold=fraction >= threshold,
        include_timeouts=include_timeouts,
    )


# -- campaign-level orchestration and persistence -------------------------------

def verdict_to_json(verdict: TestVerdict) -> dict:
    return {
        "test_uid": verdict.test_uid,
        "majority": verdict.majority,
        "per_config": dict(verdict.per_config),
        "no_vote_configs": list(verdict.no_vote_configs),
        "inconclusive": verdict.inconclusive,
    }


def verdict_from_json(doc: dict) -> TestVerdict:
    return TestVerdict(
        test_uid=doc["test_uid"],
        majority=doc["majority"],
        per_config=dict(doc["per_config"]),
        no_vote_configs=tuple(doc["no_vote_configs"]),
        inconclusive=doc["inconclusive"],
    )


def emi_verdict_to_json(verdict: EmiVerdict) -> dict:
    return {
        "base_uid": verdict.base_uid,
        "config_uid": verdict.config_uid,
        "diverging_variants": list(verdict.diverging_variants),
        "crashing_variants": list(verdict.crashing_variants),
        "base_outcome": {"kind": verdict.base_outcome.kind,
                         "value": verdict.base_outcome.value},
    }


def latest_records(records: list[dict]) -> dict[tuple[str, str], dict]:
    """Collapse a journal to the newest record per (test, config) pair, so
    replayed executions supersede the originals."""
    latest: dict[tuple[str, str], dict] = {}
    for rec in records:
        latest[(rec["test_uid"], rec["config_uid"])] = rec
    return latest


def classify_campaign(repo: Repository, campaign_id: str) -> dict[str, TestVerdict]:
    """Classify every test of a campaign from its journal and persist the
    verdicts. Returns test_uid -> verdict."""
    records = repo.read_executions(campaign_id)
    per_test: dict[str, list[dict]] = {}
    for rec in latest_records(records).values():
        per_test.setdefault(rec["test_uid"], []).append(rec)

    verdicts: dict[str, TestVerdict] = {}
    for test_uid in sorted(per_test):
        verdict = classify_test(test_uid, per_test[test_uid])
        repo.save_verdict(campaign_id, test_uid, verdict_to_json(verdict))
        verdicts[test_uid] = verdict
    return verdicts
