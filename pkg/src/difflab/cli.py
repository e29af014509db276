"""Command-line entry point.

Exit status: 0 success, 1 user error (bad flags, bad repository, domain
errors), 2 internal error. Randomized subcommands take an explicit
--seed so a campaign is replayable end to end; nothing seeds from the
clock.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import oracle, report, runner
from .errors import DifflabError, UnknownUid
from .minikernel.evaluate import EvalParams
from .minikernel.emi import make_variants
from .minikernel.generate import GENERATOR_VERSION, generate_program
from .minikernel.lang import parse_program, print_program
from .modes import TestMode
from .store import Repository

DEFAULT_REPO = "./ckrepo"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here reserves 2 for
    internal failures, so usage problems are status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _kv_pairs(pairs: list[str], flag: str) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise DifflabError(f"{flag} expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key] = value
    return out


def _open(args, writer: bool) -> Repository:
    return Repository(args.repo, writer=writer)


# -- subcommands ----------------------------------------------------------------

def cmd_init(args) -> int:
    repo = Repository.init(args.repo)
    repo.close()
    print(f"repository ready at {args.repo}")
    return 0


def cmd_gen(args) -> int:
    with _open(args, writer=True) as repo:
        corpus = corpus_mod.Corpus(repo)
        mode = TestMode.parse(args.mode)
        for i in range(args.count):
            program = generate_program(seed=args.seed + i, size=args.size, mode=mode)
            case = corpus.register_test(print_program(program), mode,
                                        GENERATOR_VERSION)
            print(case.uid)
    return 0


def cmd_emi(args) -> int:
    with _open(args, writer=True) as repo:
        corpus = corpus_mod.Corpus(repo)
        base = corpus.get_test(args.base)
        program = parse_program(corpus.source(base.uid))
        params = EvalParams(args.threads)
        sources = [print_program(v)
                   for v in make_variants(program, params, args.variants, args.seed)]
        family = corpus.create_family(base, sources, params)
        for uid in family.variant_uids:
            print(uid)
    return 0


def cmd_add_config(args) -> int:
    with _open(args, writer=True) as repo:
        config = runner.Configuration(
            uid=repo.new_uid(),
            name=args.name,
            command_template=args.cmd,
            env={},
            timeout_ms=args.timeout_ms,
            metadata=_kv_pairs(args.meta, "--meta"),
        )
        runner.save_config(repo, config)
        print(config.uid)
    return 0


def cmd_screen(args) -> int:
    with _open(args, writer=True) as repo:
        config = runner.load_config(repo, args.config)
        corpus = corpus_mod.Corpus(repo)
        params = EvalParams(args.threads)
        flaky = []
        tests = corpus.active_tests()
        for case in tests:
            if not oracle.check_determinism(repo, case, config, params,
                                            repetitions=args.reps):
                flaky.append(case.uid)
    if args.json:
        print(json.dumps({
            "config_uid": args.config,
            "repetitions": args.reps,
            "total": len(tests),
            "non_deterministic": flaky,
        }, indent=2))
    else:
        for uid in flaky:
            print(f"non-deterministic: {uid}")
        print(f"{len(flaky)} of {len(tests)} tests non-deterministic "
              f"over {args.reps} repetitions")
    return 0


def _corpus_filter(expr: str | None) -> dict:
    if not expr:
        return {}
    allowed = {"mode", "generator_version", "family"}
    pairs = _kv_pairs(expr.split(","), "--corpus-filter")
    unknown = set(pairs) - allowed
    if unknown:
        raise DifflabError(f"--corpus-filter keys must be in {sorted(allowed)}, "
                           f"got {sorted(unknown)}")
    return pairs


def cmd_bench(args) -> int:
    with _open(args, writer=False) as repo:
        meta = repo.get_meta("campaign", args.campaign)
        verdict_docs = repo.load_verdicts(args.campaign)
        if not verdict_docs:
            raise DifflabError(
                f"campaign {args.campaign} has no verdicts; run classify first")
        corpus = corpus_mod.Corpus(repo)
        keep = {c.uid for c in corpus.active_tests(**_corpus_filter(args.corpus_filter))}
        verdicts = [oracle.verdict_from_json(doc)
                    for uid, doc in sorted(verdict_docs.items()) if uid in keep]
        if not verdicts:
            raise DifflabError("corpus filter left no classified tests to score")
        reports = [
            oracle.reliability_score(config_uid, verdicts,
                                     include_timeouts=args.include_timeouts,
                                     threshold=args.threshold)
            for config_uid in sorted(meta["config_uids"])
        ]
    if args.json:
        print(json.dumps([r.__dict__ for r in reports], indent=2))
    else:
        for r in reports:
            state = "BELOW-THRESHOLD" if r.below_threshold else "ok"
            print(f"{r.config_uid}  {r.unreliable}/{r.total}"
                  f"  {r.fraction:.4f}  {state}")
    return 0


def cmd_run(args) -> int:
    with _open(args, writer=True) as repo:
        corpus = corpus_mod.Corpus(repo)
        configs = [runner.load_config(repo, uid) for uid in args.configs]
        tests = corpus.active_tests(mode=args.mode,
                                    generator_version=args.generator_version)
        campaign_id = runner.run_campaign(
            repo, tests, configs, EvalParams(args.threads),
            parallelism=args.parallel, name=args.name)
        print(campaign_id)
    return 0


def cmd_classify(args) -> int:
    with _open(args, writer=True) as repo:
        verdicts = oracle.classify_campaign(repo, args.campaign)
    if args.json:
        print(json.dumps([oracle.verdict_to_json(v)
                          for _, v in sorted(verdicts.items())], indent=2))
    else:
        inconclusive = sum(v.inconclusive for v in verdicts.values())
        print(f"classified {len(verdicts)} tests "
              f"({inconclusive} inconclusive) in campaign {args.campaign}")
    return 0


def cmd_report(args) -> int:
    with _open(args, writer=False) as repo:
        table = report.summarize(repo, args.campaign)
        view = repo.get_view(args.view) if args.view else None
        document = report.render(table, format=args.format, view=view)
    if args.out:
        Path(args.out).write_bytes(document)
        print(f"wrote {args.out}")
    else:
        sys.stdout.buffer.write(document)
    return 0


def cmd_rerun(args) -> int:
    with _open(args, writer=True) as repo:
        params = EvalParams(args.threads) if args.threads is not None else None
        campaign_id = args.campaign or runner.find_rerun_campaign(
            repo, args.test, args.config)
        if params is None:
            threads = (repo.get_meta("campaign", campaign_id)["threads"]
                       if campaign_id else 1)
            params = EvalParams(threads)
        command = runner.rerun_command(repo, args.test, args.config, params)
        print(command)
        if args.execute:
            if campaign_id is None:
                campaign_id = runner.ensure_adhoc_campaign(repo)
            corpus = corpus_mod.Corpus(repo)
            config = runner.load_config(repo, args.config)
            rec = runner.run_one(repo, corpus.get_test(args.test), config,
                                 params, campaign_id)
            print(f"{rec.outcome.kind}"
                  + (f" {rec.outcome.value}" if rec.outcome.value else "")
                  + f"  ({rec.wall_ms} ms, campaign {campaign_id})")
    return 0


def cmd_invalidate(args) -> int:
    with _open(args, writer=True) as repo:
        corpus = corpus_mod.Corpus(repo)
        count = corpus.invalidate(args.uid, args.reason)
        print(f"invalidated {count} tests")
    return 0


def cmd_serve(args) -> int:
    from . import server  # deferred: pulls in the web stack

    server.serve(args.repo, host=args.host, port=args.port)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="difflab",
                     description="differential compiler-testing campaigns")
    common = _Parser(add_help=False)
    common.add_argument("--repo", default=DEFAULT_REPO,
                        help=f"repository path (default: {DEFAULT_REPO})")
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("init", parents=[common], help="create a repository")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("gen", parents=[common], help="generate test programs")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--mode", required=True,
                   choices=[m.value for m in TestMode])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=30,
                   help="statement budget per program (default: 30)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("emi", parents=[common],
                       help="derive dead-code variants of a base test")
    p.add_argument("--base", required=True, metavar="UID")
    p.add_argument("--variants", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=16,
                   help="thread count the dead guards assume (default: 16)")
    p.set_defaults(func=cmd_emi)

    p = sub.add_parser("add-config", parents=[common],
                       help="register an executor configuration")
    p.add_argument("--name", required=True)
    p.add_argument("--cmd", required=True,
                   help="command template with {kernel} and optional {threads}")
    p.add_argument("--timeout-ms", type=int, required=True)
    p.add_argument("--meta", action="append", default=[], metavar="K=V")
    p.set_defaults(func=cmd_add_config)

    p = sub.add_parser("screen", parents=[common],
                       help="determinism screen over all active tests")
    p.add_argument("--config", required=True, metavar="UID")
    p.add_argument("--reps", type=int, default=2)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("bench", parents=[common],
                       help="reliability score per configuration")
    p.add_argument("--campaign", required=True, metavar="UID")
    p.add_argument("--corpus-filter", metavar="K=V[,K=V]",
                   help="restrict scored tests (mode=, generator_version=, family=)")
    p.add_argument("--threshold", type=float, default=oracle.RELIABILITY_THRESHOLD)
    p.add_argument("--include-timeouts", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("run", parents=[common], help="run a campaign")
    p.add_argument("--configs", nargs="+", required=True, metavar="UID")
    p.add_argument("--threads", type=int, default=16)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--mode", choices=[m.value for m in TestMode],
                   help="restrict to one generation mode")
    p.add_argument("--generator-version")
    p.add_argument("--name", default="campaign")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("classify", parents=[common],
                       help="majority-vote verdicts for a campaign")
    p.add_argument("--campaign", required=True, metavar="UID")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", parents=[common],
                       help="render the campaign summary table")
    p.add_argument("--campaign", required=True, metavar="UID")
    p.add_argument("--format", choices=["csv", "html"], default="csv")
    p.add_argument("--view", help="named view restricting label columns")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("rerun", parents=[common],
                       help="print (and with --execute, run) one pair's command")
    p.add_argument("--test", required=True, metavar="UID")
    p.add_argument("--config", required=True, metavar="UID")
    p.add_argument("--campaign", metavar="UID",
                   help="journal for --execute (default: the pair's last campaign)")
    p.add_argument("--threads", type=int,
                   help="default: the resolved campaign's thread count, else 1")
    p.add_argument("--execute", action="store_true")
    p.set_defaults(func=cmd_rerun)

    p = sub.add_parser("invalidate", parents=[common],
                       help="soft-remove a test (bases cascade to variants)")
    p.add_argument("--uid", required=True)
    p.add_argument("--reason", required=True)
    p.set_defaults(func=cmd_invalidate)

    p = sub.add_parser("serve", parents=[common], help="serve the HTTP API and viewer")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DifflabError, ValueError) as exc:
        # ValueError here is always input validation (thread counts, modes,
        # program sizes), not a latent bug channel.
        print(f"difflab: error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        print(f"difflab: internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
