"""The toy kernel language: AST, canonical printer, parser.

A program is a flat list of variable declarations followed by statements.
Statements are assignments and if-blocks; expressions are built from
unsigned 64-bit wrapping integers, `gid`, declared variables, and the
operators + * ^ & |. Conditions compare two expressions with < <= == !=.
There are no loops, so every program terminates structurally.

Text format (.mk), line oriented:

    var acc;
    var tmp;
    acc = (gid + 7);
    if ((acc & 3) < 2) {
      tmp = (tmp ^ (acc * 11));
    }

The printer emits a canonical form (declarations first, two-space
indentation, fully parenthesized operator applications); the parser
accepts that form and round-trips it byte-exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from ..errors import DifflabError

MASK64 = (1 << 64) - 1
BIN_OPS = ("+", "*", "^", "&", "|")
CMP_OPS = ("<", "<=", "==", "!=")

IDENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")
RESERVED = {"var", "if", "gid"}


class ParseError(DifflabError):
    pass


class InvalidProgram(DifflabError):
    pass


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Gid:
    pass


GID = Gid()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, VarRef, Gid, BinOp]


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class IfBlock:
    cond: Cmp
    body: tuple["Stmt", ...]


Stmt = Union[Assign, IfBlock]


@dataclass(frozen=True)
class Program:
    declared_vars: tuple[str, ...]
    statements: tuple[Stmt, ...]


# -- printer ------------------------------------------------------------------

def print_expr(expr: Expr) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, Gid):
        return "gid"
    return f"({print_expr(expr.left)} {expr.op} {print_expr(expr.right)})"


def print_cond(cond: Cmp) -> str:
    return f"{print_expr(cond.left)} {cond.op} {print_expr(cond.right)}"


def _print_stmts(stmts: tuple[Stmt, ...], depth: int, out: list[str]) -> None:
    ind = "  " * depth
    for s in stmts:
        if isinstance(s, Assign):
            out.append(f"{ind}{s.var} = {print_expr(s.expr)};")
        else:
            out.append(f"{ind}if ({print_cond(s.cond)}) {{")
            _print_stmts(s.body, depth + 1, out)
            out.append(f"{ind}}}")


def print_program(program: Program) -> str:
    lines = [f"var {name};" for name in program.declared_vars]
    _print_stmts(program.statements, 0, lines)
    return "\n".join(lines) + "\n"


# -- parser -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(\d+|[a-z_][a-z0-9_]*|<=|==|!=|<|[+*^&|()])")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad token at {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.take()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}")

    def expr(self) -> Expr:
        tok = self.take()
        if tok == "(":
            left = self.expr()
            op = self.take()
            if op not in BIN_OPS:
                raise ParseError(f"expected binary operator, got {op!r}")
            right = self.expr()
            self.expect(")")
            return BinOp(op, left, right)
        if tok.isdigit():
            value = int(tok)
            if value > MASK64:
                raise ParseError(f"literal out of 64-bit range: {tok}")
            return IntLit(value)
        if tok == "gid":
            return GID
        if IDENT_RE.match(tok) and tok not in RESERVED:
            return VarRef(tok)
        raise ParseError(f"unexpected token {tok!r}")

    def cond(self) -> Cmp:
        left = self.expr()
        op = self.take()
        if op not in CMP_OPS:
            raise ParseError(f"expected comparison operator, got {op!r}")
        right = self.expr()
        return Cmp(op, left, right)

    def done(self) -> bool:
        return self.pos == len(self.tokens)


def _parse_expr_text(text: str) -> Expr:
    p = _ExprParser(_tokenize(text))
    e = p.expr()
    if not p.done():
        raise ParseError(f"trailing tokens in expression: {text!r}")
    return e


def _parse_cond_text(text: str) -> Cmp:
    p = _ExprParser(_tokenize(text))
    c = p.cond()
    if not p.done():
        raise ParseError(f"trailing tokens in condition: {text!r}")
    return c


_IF_RE = re.compile(r"^if \((.*)\) \{$")
_ASSIGN_RE = re.compile(r"^([a-z_][a-z0-9_]*) = (.*);$")
_DECL_RE = re.compile(r"^var ([a-z_][a-z0-9_]*);$")


def parse_program(text: str) -> Program:
    declared: list[str] = []
    stack: list[list[Stmt]] = [[]]
    conds: list[Cmp] = []
    in_body = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            if line == "}":
                if not conds:
                    raise ParseError("unmatched '}'")
                body = stack.pop()
                stack[-1].append(IfBlock(conds.pop(), tuple(body)))
                continue
            m = _DECL_RE.match(line)
            if m:
                if in_body or len(stack) > 1:
                    raise ParseError("declarations must precede statements")
                name = m.group(1)
                if name in RESERVED:
                    raise ParseError(f"reserved identifier: {name}")
                if name in declared:
                    raise ParseError(f"duplicate declaration: {name}")
                declared.append(name)
                continue
            m = _IF_RE.match(line)
            if m:
                in_body = True
                conds.append(_parse_cond_text(m.group(1)))
                stack.append([])
                continue
            m = _ASSIGN_RE.match(line)
            if m:
                in_body = True
                if m.group(1) in RESERVED:
                    raise ParseError(f"cannot assign to {m.group(1)!r}")
                stack[-1].append(Assign(m.group(1), _parse_expr_text(m.group(2))))
                continue
            raise ParseError(f"unrecognized line: {line!r}")
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None

    if conds:
        raise ParseError("unterminated if-block")
    program = Program(tuple(declared), tuple(stack[0]))
    validate(program)
    return program


# -- validation & walking -----------------------------------------------------

def _expr_vars(expr: Expr) -> Iterator[str]:
    if isinstance(expr, VarRef):
        yield expr.name
    elif isinstance(expr, BinOp):
        yield from _expr_vars(expr.left)
        yield from _expr_vars(expr.right)


def iter_statements(stmts: tuple[Stmt, ...], depth: int = 0) -> Iterator[tuple[Stmt, int]]:
    for s in stmts:
        yield s, depth
        if isinstance(s, IfBlock):
            yield from iter_statements(s.body, depth + 1)


def validate(program: Program) -> None:
    """Check the structural invariants: declared-before-use, literal range,
    and known operators. Raises InvalidProgram."""
    declared = set(program.declared_vars)
    if len(declared) != len(program.declared_vars):
        raise InvalidProgram("duplicate variable declaration")
    for s, _depth in iter_statements(program.statements):
        if isinstance(s, Assign):
            if s.var not in declared:
                raise InvalidProgram(f"assignment to undeclared variable {s.var!r}")
            exprs = [s.expr]
        else:
            if s.cond.op not in CMP_OPS:
                raise InvalidProgram(f"unknown comparison operator {s.cond.op!r}")
            exprs = [s.cond.left, s.cond.right]
        for e in exprs:
            for name in _expr_vars(e):
                if name not in declared:
                    raise InvalidProgram(f"use of undeclared variable {name!r}")
            for lit in _expr_lits(e):
                if not 0 <= lit <= MASK64:
                    raise InvalidProgram(f"literal out of range: {lit}")
            for op in _expr_ops(e):
                if op not in BIN_OPS:
                    raise InvalidProgram(f"unknown operator {op!r}")


def _expr_lits(expr: Expr) -> Iterator[int]:
    if isinstance(expr, IntLit):
        yield expr.value
    elif isinstance(expr, BinOp):
        yield from _expr_lits(expr.left)
        yield from _expr_lits(expr.right)


def _expr_ops(expr: Expr) -> Iterator[str]:
    if isinstance(expr, BinOp):
        yield expr.op
        yield from _expr_ops(expr.left)
        yield from _expr_ops(expr.right)
