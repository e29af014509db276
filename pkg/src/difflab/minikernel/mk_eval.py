"""Standalone reference evaluator: the executable a Configuration points at.

Wire contract:
  exit 0  one line "RESULT: <8 hex digits>" on stdout
  exit 2  unusable input (bad file, parse error, bad flags)
  exit 3  simulated compiler crash, message on stderr
  exit 4  simulated runtime crash, message on stderr
  (simulated timeout never exits; it sleeps until the harness kills it)

Fault selection needs a test identity: the parent directory name is used
when it looks like a repository UID (kernels live at
repo/tests/<uid>/kernel.mk), otherwise a hash of the program text. The
nondet counter persists in a "<kernel>.nondet" sidecar so alternation
survives across processes.

Kept deliberately light on imports: campaigns spawn this hundreds of
times and process startup dominates its runtime.
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from pathlib import Path

from ..errors import DifflabError
from . import faults
from .evaluate import EvalParams, evaluate
from .lang import parse_program

_UID_RE = re.compile(r"^[0-9a-f]{16}$")


def _subject_for(path: Path, text: str) -> str:
    parent = path.resolve().parent.name
    if _UID_RE.match(parent):
        return parent
    return faults.text_subject(text)


def _read_nondet_count(counter_path: Path) -> int:
    try:
        return int(counter_path.read_text().strip())
    except (OSError, ValueError):
        return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mk-eval", description="evaluate a minikernel program")
    parser.add_argument("file", help="program file (.mk)")
    parser.add_argument("--threads", type=int, default=1, metavar="T")
    parser.add_argument("--fault", default="none", metavar="SPEC",
                        help="fault profile, e.g. wrong_code:p=0.1 (default: none)")
    parser.add_argument("--seed", type=int, default=0, metavar="S",
                        help="fault selection seed")
    args = parser.parse_args(argv)

    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"mk-eval: cannot read {path}: {exc}", file=sys.stderr)
        return 2

    try:
        program = parse_program(text)
        params = EvalParams(args.threads)
        profile = faults.parse_spec(args.fault, seed=args.seed)
    except (DifflabError, ValueError) as exc:
        print(f"mk-eval: {exc}", file=sys.stderr)
        return 2

    if profile.kind == "nondet":
        counter_path = path.with_name(path.name + ".nondet")
        count = _read_nondet_count(counter_path)
        counter_path.write_text(f"{count + 1}\n")
        profile._invocations = count

    result = evaluate(program, params, profile, subject=_subject_for(path, text))

    if result.kind == "timeout":
        # Simulated hang: outlive any timeout the harness enforces.
        while True:
            time.sleep(3600)
    if result.kind == "compile_crash":
        print("mk-eval: simulated compiler crash", file=sys.stderr)
        return 3
    if result.kind == "runtime_crash":
        print("mk-eval: simulated runtime crash", file=sys.stderr)
        return 4
    print(f"RESULT: {result.checksum}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
