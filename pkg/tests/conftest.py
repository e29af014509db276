"""Shared fixtures: fresh repositories, registered corpora, and executor
configurations pointed at the reference evaluator."""

from __future__ import annotations

import random
import shutil

import pytest

from difflab.corpus import Corpus
from difflab.minikernel.generate import GENERATOR_VERSION, generate_program
from difflab.minikernel.lang import print_program
from difflab.modes import TestMode
from difflab.runner import Configuration, save_config
from difflab.store import Repository

MK_EVAL = shutil.which("mk-eval") or "mk-eval"


@pytest.fixture
def repo(tmp_path):
    r = Repository.init(tmp_path / "repo", rng=random.Random(1234))
    yield r
    r.close()


@pytest.fixture
def corpus(repo):
    return Corpus(repo)


def register_generated(corpus: Corpus, count: int, seed: int = 100,
                       size: int = 8, mode: TestMode = TestMode.BASIC) -> list:
    cases = []
    for i in range(count):
        program = generate_program(seed=seed + i, size=size, mode=mode)
        cases.append(corpus.register_test(print_program(program), mode,
                                          GENERATOR_VERSION))
    return cases


def make_config(repo: Repository, name: str = "ref", fault: str | None = None,
                seed: int = 0, timeout_ms: int = 5000) -> Configuration:
    """Configuration running the reference evaluator, optionally with a
    fault profile baked into the command line."""
    cmd = f"{MK_EVAL} {{kernel}} --threads {{threads}}"
    if fault is not None:
        cmd += f" --fault {fault} --seed {seed}"
    config = Configuration(
        uid=repo.new_uid(),
        name=name,
        command_template=cmd,
        env={},
        timeout_ms=timeout_ms,
        metadata={},
    )
    save_config(repo, config)
    return config
