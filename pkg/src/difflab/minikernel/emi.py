"""Dead-code injection: the equivalence-modulo-inputs mutation.

Rather than profiling for unreachable regions, blocks that are provably
dead for every thread of the fixed input are inserted directly: each
injected if-block is guarded by `(T <= gid)` with T the literal thread
count, which no gid in [0, T) satisfies. Bodies are seeded random
assignments over the program's own variables, so a fault-free evaluation
of any variant equals its base — any divergence on a real configuration
is a bug by construction.
"""

from __future__ import annotations

import random

from .evaluate import EvalParams
from .lang import Assign, BinOp, Cmp, GID, IfBlock, IntLit, Program, Stmt, VarRef


def dead_guard(params: EvalParams) -> Cmp:
    """The canonical always-false condition for gid in [0, thread_count)."""
    return Cmp("<=", IntLit(params.thread_count), GID)


def is_dead_guard(cond: Cmp, params: EvalParams) -> bool:
    return cond == dead_guard(params)


_BODY_OPS = ("+", "*", "^", "&", "|")


def _gen_body_expr(rng: random.Random, names: tuple[str, ...], depth: int):
    if depth >= 2 or rng.random() < 0.5:
        roll = rng.random()
        if roll < 0.4:
            return IntLit(rng.randrange(0, 1 << 16))
        if roll < 0.6 or not names:
            return GID
        return VarRef(rng.choice(names))
    return BinOp(rng.choice(_BODY_OPS),
                 _gen_body_expr(rng, names, depth + 1),
                 _gen_body_expr(rng, names, depth + 1))


def _gen_dead_block(rng: random.Random, names: tuple[str, ...],
                    params: EvalParams) -> IfBlock:
    # A program with no variables gets an empty body; nothing to mutate.
    body: list[Stmt] = []
    if names:
        for _ in range(rng.randint(1, 3)):
            body.append(Assign(rng.choice(names), _gen_body_expr(rng, names, 0)))
    return IfBlock(dead_guard(params), tuple(body))


def inject_dead_code(program: Program, params: EvalParams, seed: int,
                     block_count: int) -> Program:
    """Insert block_count dead if-blocks at seeded top-level positions.
    block_count=0 returns the program unchanged."""
    if block_count < 0:
        raise ValueError(f"block_count must be >= 0: {block_count}")
    if block_count == 0:
        return program
    rng = random.Random(seed)
    stmts = list(program.statements)
    for _ in range(block_count):
        block = _gen_dead_block(rng, program.declared_vars, params)
        stmts.insert(rng.randint(0, len(stmts)), block)
    return Program(program.declared_vars, tuple(stmts))


def make_variants(program: Program, params: EvalParams, count: int,
                  seed: int) -> list[Program]:
    """count variants of the base program via derived sub-seeds; pairwise
    textually distinct with overwhelming probability."""
    if count < 1:
        raise ValueError(f"variant count must be >= 1: {count}")
    rng = random.Random(seed)
    variants = []
    for _ in range(count):
        sub_seed = rng.getrandbits(62)
        block_count = rng.randint(1, 4)
        variants.append(inject_dead_code(program, params, sub_seed, block_count))
    return variants
