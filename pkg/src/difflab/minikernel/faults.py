"""Fault-injection profiles for simulating buggy implementations.

A profile deterministically decides, per test subject, whether the fault
fires: selection hashes (kind, seed, subject) so campaign ordering and
parallelism cannot change which tests are "buggy". The subject is the
test UID when the caller knows it, otherwise a hash of the program text.

NONDET is the one stateful kind: it alternates output by invocation
count and must stay confined to a single execution context per
configuration (the standalone evaluator keeps the count in a sidecar
file, in-process profiles carry it on the instance).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..errors import DifflabError

FAULT_KINDS = ("none", "wrong_code", "compile_crash", "runtime_crash",
               "timeout", "nondet", "exec_dead")
SEEDED_KINDS = ("wrong_code", "compile_crash", "runtime_crash", "timeout")


class BadFaultSpec(DifflabError):
    pass


@dataclass
class FaultProfile:
    kind: str = "none"
    p: float = 1.0
    seed: int = 0
    period: int = 1
    _invocations: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise BadFaultSpec(f"unknown fault kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise BadFaultSpec(f"fault probability out of [0,1]: {self.p}")
        if self.period < 1:
            raise BadFaultSpec(f"nondet period must be >= 1: {self.period}")

    def next_invocation(self) -> int:
        n = self._invocations
        self._invocations = n + 1
        return n


NO_FAULT = FaultProfile("none")


def _h64(*parts: object) -> int:
    digest = hashlib.blake2b(":".join(str(p) for p in parts).encode("utf-8"),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big")


def selects(profile: FaultProfile, subject: str) -> bool:
    """Whether the profiled fault fires for this subject. Pure in
    (kind, p, seed, subject)."""
    if profile.kind in ("none",):
        return False
    if profile.kind in ("nondet", "exec_dead"):
        return True
    if profile.p >= 1.0:
        return True
    if profile.p <= 0.0:
        return False
    return _h64("select", profile.kind, profile.seed, subject) < int(profile.p * 2.0**64)


def perturb_mask(tag: str, seed: int, subject: str) -> int:
    """Nonzero 32-bit mask used to corrupt a checksum deterministically."""
    m = _h64("mask", tag, seed, subject) & 0xFFFFFFFF
    return m if m else 0x5BD1E995


def corrupt_checksum(checksum: str, mask: int) -> str:
    return f"{int(checksum, 16) ^ mask:08x}"


def text_subject(text: str) -> str:
    """Fallback fault-selection identity for a program without a known UID."""
    return "text:" + hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


# -- command-line spec --------------------------------------------------------

def parse_spec(text: str, seed: int = 0) -> FaultProfile:
    """Parse a fault spec like "wrong_code:p=0.1" or "nondet:period=2".
    The seed travels separately (the evaluator's --seed flag)."""
    parts = text.strip().split(":")
    kind = parts[0]
    if kind not in FAULT_KINDS:
        raise BadFaultSpec(f"unknown fault kind {kind!r}")
    p = 1.0
    period = 1
    for part in parts[1:]:
        if "=" not in part:
            raise BadFaultSpec(f"bad fault parameter {part!r} (expected key=value)")
        key, _, value = part.partition("=")
        try:
            if key == "p":
                p = float(value)
            elif key == "period":
                period = int(value)
            else:
                raise BadFaultSpec(f"unknown fault parameter {key!r}")
        except ValueError:
            raise BadFaultSpec(f"bad value for {key}: {value!r}") from None
    return FaultProfile(kind=kind, p=p, seed=seed, period=period)


def format_spec(profile: FaultProfile) -> str:
    out = profile.kind
    if profile.kind in SEEDED_KINDS and profile.p < 1.0:
        out += f":p={profile.p:g}"
    if profile.kind == "nondet" and profile.period != 1:
        out += f":period={profile.period}"
    return out


def cli_args(profile: FaultProfile) -> list[str]:
    """Arguments that make the standalone evaluator apply this profile."""
    if profile.kind == "none":
        return []
    args = ["--fault", format_spec(profile)]
    if profile.kind in SEEDED_KINDS:
        args += ["--seed", str(profile.seed)]
    return args
