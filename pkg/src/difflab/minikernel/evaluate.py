"""Reference evaluator with per-thread semantics and checksum output.

Each of T threads runs the whole program with gid set to its index and
all variables starting at zero; arithmetic wraps modulo 2**64. The
result checksum XOR-folds one FNV-1a-style hash per thread (over gid and
the final variable values in declaration order), rendered as 8 lowercase
hex digits. XOR makes the cross-thread combine order-independent, so the
checksum is a pure function of (program, thread count).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import faults
from .faults import FaultProfile, NO_FAULT
from .lang import (
    Assign, BinOp, Cmp, Expr, Gid, IfBlock, IntLit, MASK64, Program, Stmt,
    VarRef, print_program, validate,
)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


@dataclass(frozen=True)
class EvalParams:
    """The EMI input I: how many threads the kernel runs with."""

    thread_count: int

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError(f"thread_count must be >= 1: {self.thread_count}")


@dataclass(frozen=True)
class EvalResult:
    kind: str  # ok | compile_crash | runtime_crash | timeout
    checksum: str | None = None

    @property
    def is_ok(self) -> bool:
        return self.kind == "ok"


def _eval_expr(expr: Expr, env: dict[str, int], gid: int) -> int:
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, VarRef):
        return env[expr.name]
    if isinstance(expr, Gid):
        return gid
    left = _eval_expr(expr.left, env, gid)
    right = _eval_expr(expr.right, env, gid)
    op = expr.op
    if op == "+":
        return (left + right) & MASK64
    if op == "*":
        return (left * right) & MASK64
    if op == "^":
        return left ^ right
    if op == "&":
        return left & right
    return left | right


def eval_cond(cond: Cmp, env: dict[str, int], gid: int) -> bool:
    left = _eval_expr(cond.left, env, gid)
    right = _eval_expr(cond.right, env, gid)
    if cond.op == "<":
        return left < right
    if cond.op == "<=":
        return left <= right
    if cond.op == "==":
        return left == right
    return left != right


def _exec_block(stmts: tuple[Stmt, ...], env: dict[str, int], gid: int,
                force_branches: bool) -> None:
    for s in stmts:
        if isinstance(s, Assign):
            env[s.var] = _eval_expr(s.expr, env, gid)
        elif force_branches or eval_cond(s.cond, env, gid):
            _exec_block(s.body, env, gid, force_branches)


def run_thread(program: Program, gid: int, force_branches: bool = False) -> dict[str, int]:
    """Final variable state of one thread."""
    env = {name: 0 for name in program.declared_vars}
    _exec_block(program.statements, env, gid, force_branches)
    return env


def _fnv_word(h: int, value: int) -> int:
    for _ in range(8):
        h = ((h ^ (value & 0xFF)) * FNV_PRIME) & MASK64
        value >>= 8
    return h


def _thread_hash(program: Program, gid: int, force_branches: bool) -> int:
    env = run_thread(program, gid, force_branches)
    h = _fnv_word(FNV_OFFSET, gid)
    for name in program.declared_vars:
        h = _fnv_word(h, env[name])
    return h


def checksum(program: Program, params: EvalParams, force_branches: bool = False) -> str:
    acc = 0
    for gid in range(params.thread_count):
        acc ^= _thread_hash(program, gid, force_branches)
    return f"{(acc >> 32) ^ (acc & 0xFFFFFFFF):08x}"


def evaluate(program: Program, params: EvalParams, fault: FaultProfile = NO_FAULT,
             subject: str | None = None) -> EvalResult:
    """Evaluate under a fault profile. Crash kinds are result values, not
    exceptions. With no fault this is a pure function of (program, params)."""
    validate(program)
    kind = fault.kind
    if kind == "none":
        return EvalResult("ok", checksum(program, params))
    if kind == "exec_dead":
        return EvalResult("ok", checksum(program, params, force_branches=True))
    subj = subject if subject is not None else faults.text_subject(print_program(program))
    if kind == "nondet":
        value = checksum(program, params)
        count = fault.next_invocation()
        if (count // fault.period) % 2 == 1:
            value = faults.corrupt_checksum(value, faults.perturb_mask("nondet", 0, subj))
        return EvalResult("ok", value)
    if not faults.selects(fault, subj):
        return EvalResult("ok", checksum(program, params))
    if kind == "wrong_code":
        value = checksum(program, params)
        mask = faults.perturb_mask("wrong_code", fault.seed, subj)
        return EvalResult("ok", faults.corrupt_checksum(value, mask))
    if kind == "compile_crash":
        return EvalResult("compile_crash")
    if kind == "runtime_crash":
        return EvalResult("runtime_crash")
    return EvalResult("timeout")
