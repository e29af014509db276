"""Test generation modes.

Six fixed feature sets. At the toy-language layer they differ only in the
operator mix the generator draws from; the enum is the shared vocabulary
for corpus bookkeeping, filtering, and report columns (declaration order
is the canonical column order).
"""

from __future__ import annotations

from enum import Enum


class TestMode(str, Enum):
    BASIC = "basic"
    VECTOR = "vector"
    BARRIER = "barrier"
    ATOMIC_SECTION = "atomic_section"
    ATOMIC_REDUCTION = "atomic_reduction"
    ALL = "all"

    @classmethod
    def parse(cls, value: str) -> "TestMode":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(
                f"unknown mode {value!r} (choose from "
                f"{', '.join(m.value for m in cls)})") from None


MODE_ORDER = tuple(TestMode)
