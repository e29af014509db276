"""Seeded random program generator.

Deterministic in (seed, size, mode): the same triple always yields a
byte-identical program. size is an exact total statement budget
(assignments and if-blocks at any nesting level each count as one). The
mode only selects the operator mix; feature modes beyond that are
label-level distinctions at this layer.
"""

from __future__ import annotations

import random

from ..modes import TestMode
from .lang import (
    Assign, BinOp, CMP_OPS, Cmp, Expr, GID, IfBlock, IntLit, Program, Stmt, VarRef,
)

GENERATOR_VERSION = "1.0.0"

MODE_OPS: dict[TestMode, tuple[str, ...]] = {
    TestMode.BASIC: ("+", "*", "^"),
    TestMode.VECTOR: ("*", "^", "&", "|"),
    TestMode.BARRIER: ("+", "^", "|"),
    TestMode.ATOMIC_SECTION: ("+", "&"),
    TestMode.ATOMIC_REDUCTION: ("+", "|"),
    TestMode.ALL: ("+", "*", "^", "&", "|"),
}

_MAX_EXPR_DEPTH = 3
_MAX_IF_DEPTH = 2


def _gen_expr(rng: random.Random, names: tuple[str, ...], ops: tuple[str, ...],
              depth: int) -> Expr:
    if depth >= _MAX_EXPR_DEPTH or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.35:
            return IntLit(rng.randrange(0, 1 << 16))
        if roll < 0.6 or not names:
            return GID
        return VarRef(rng.choice(names))
    return BinOp(rng.choice(ops),
                 _gen_expr(rng, names, ops, depth + 1),
                 _gen_expr(rng, names, ops, depth + 1))


def _gen_cond(rng: random.Random, names: tuple[str, ...], ops: tuple[str, ...]) -> Cmp:
    return Cmp(rng.choice(CMP_OPS),
               _gen_expr(rng, names, ops, _MAX_EXPR_DEPTH - 1),
               _gen_expr(rng, names, ops, _MAX_EXPR_DEPTH - 1))


def _gen_block(rng: random.Random, names: tuple[str, ...], ops: tuple[str, ...],
               budget: int, depth: int) -> list[Stmt]:
    stmts: list[Stmt] = []
    remaining = budget
    while remaining > 0:
        if depth < _MAX_IF_DEPTH and remaining >= 2 and rng.random() < 0.25:
            inner = rng.randint(1, min(4, remaining - 1))
            body = _gen_block(rng, names, ops, inner, depth + 1)
            stmts.append(IfBlock(_gen_cond(rng, names, ops), tuple(body)))
            remaining -= 1 + inner
        else:
            stmts.append(Assign(rng.choice(names), _gen_expr(rng, names, ops, 0)))
            remaining -= 1
    return stmts


def generate_program(seed: int, size: int, mode: TestMode) -> Program:
    if size < 1:
        raise ValueError(f"statement budget must be >= 1: {size}")
    rng = random.Random(seed)
    ops = MODE_OPS[mode]
    names = tuple(f"v{i}" for i in range(rng.randint(2, 6)))
    stmts = _gen_block(rng, names, ops, size, 0)
    return Program(names, tuple(stmts))
