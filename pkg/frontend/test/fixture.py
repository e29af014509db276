"""Build a small classified repository for viewer tests.

Three configs run 20 generated tests: two fault-free references and one
wrong-code config whose seed is searched so it corrupts exactly WANT of
them. Prints fixture facts as JSON on stdout.
"""

import argparse
import json
import random
import sys

from difflab.corpus import Corpus
from difflab.minikernel import faults
from difflab.minikernel.evaluate import EvalParams
from difflab.minikernel.faults import FaultProfile
from difflab.minikernel.generate import GENERATOR_VERSION, generate_program
from difflab.minikernel.lang import print_program
from difflab.modes import TestMode
from difflab.oracle import classify_campaign
from difflab.runner import Configuration, run_campaign, save_config
from difflab.store import Repository

WANT = 7
COUNT = 20
P = 0.25
MK_EVAL = "mk-eval {kernel} --threads {threads}"


def exact_seed(uids: list[str]) -> int:
    seed = 0
    while True:
        profile = FaultProfile("wrong_code", p=P, seed=seed)
        if sum(faults.selects(profile, u) for u in uids) == WANT:
            return seed
        seed += 1


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repo", required=True)
    args = parser.parse_args()

    repo = Repository.init(args.repo, rng=random.Random(424242))
    corpus = Corpus(repo)
    cases = [corpus.register_test(
        print_program(generate_program(seed=7000 + i, size=8,
                                       mode=TestMode.BASIC)),
        TestMode.BASIC, GENERATOR_VERSION) for i in range(COUNT)]
    seed = exact_seed([c.uid for c in cases])

    configs = []
    for name, fault in (("ref-a", ""), ("ref-b", ""),
                        ("vendor-x", f" --fault wrong_code:p={P} --seed {seed}")):
        config = Configuration(uid=repo.new_uid(), name=name,
                               command_template=MK_EVAL + fault, env={},
                               timeout_ms=5000, metadata={})
        save_config(repo, config)
        configs.append(config)

    campaign = run_campaign(repo, cases, configs, EvalParams(4),
                            parallelism=2, name="viewer-fixture")
    verdicts = classify_campaign(repo, campaign)
    wrong = sum(v.per_config.get(configs[2].uid) == "WrongCode"
                for v in verdicts.values())
    repo.close()

    json.dump({"campaign": campaign, "wrong": wrong,
               "records": COUNT * len(configs),
               "configs": [c.uid for c in configs],
               "tests": [c.uid for c in cases]}, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
