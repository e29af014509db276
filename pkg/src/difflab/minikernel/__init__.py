"""Minikernel: a deterministic toy kernel language standing in for real
compiler targets, plus a fault-injection layer that makes a single
reference evaluator impersonate a whole zoo of buggy implementations."""

from .evaluate import EvalParams, EvalResult, checksum, evaluate
from .faults import NO_FAULT, BadFaultSpec, FaultProfile, format_spec, parse_spec
from .lang import InvalidProgram, ParseError, Program, parse_program, print_program

__all__ = [
    "EvalParams",
    "EvalResult",
    "checksum",
    "evaluate",
    "NO_FAULT",
    "BadFaultSpec",
    "FaultProfile",
    "format_spec",
    "parse_spec",
    "InvalidProgram",
    "ParseError",
    "Program",
    "parse_program",
    "print_program",
]
