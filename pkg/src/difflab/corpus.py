"""Test corpus bookkeeping: registration, EMI base/variant families,
generator provenance, and soft invalidation with family cascade.

A Corpus wraps a Repository and keeps a lazily loaded in-memory index of
all test metadata. Mutations go through the repository's single-writer
handle and keep the index in sync; a Corpus over a reader handle sees a
snapshot taken at first access.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import (BaseIsVariant, DuplicateVariantIndex, EmptyInput,
                     EmptySource, FamilyExists, SchemaViolation, UnknownBase,
                     UnknownUid)
from .minikernel.evaluate import EvalParams
from .modes import TestMode
from .store import Repository, RepoEntry, now_rfc3339

KERNEL_NAME = "kernel.mk"

# Dotted release version, optional pre-release/build tag, or the sentinel
# for tests whose producing generator is unknown.
_VERSION_RE = re.compile(r"^(\d+\.\d+\.\d+([-+][0-9A-Za-z.-]+)?|unknown)$")


@dataclass(frozen=True)
class FamilyLink:
    base_uid: str
    variant_index: int


@dataclass(frozen=True)
class Invalidation:
    reason: str
    at: str


@dataclass(frozen=True)
class TestCase:
    uid: str
    mode: TestMode
    source_ref: str
    generator_version: str
    family: FamilyLink | None
    created_at: str
    invalidation: Invalidation | None

    @property
    def active(self) -> bool:
        return self.invalidation is None

    @property
    def is_variant(self) -> bool:
        return self.family is not None


@dataclass(frozen=True)
class EmiFamily:
    base_uid: str
    variant_uids: tuple[str, ...]
    input_params: EvalParams


def _case_from_meta(meta: dict) -> TestCase:
    fam = meta.get("family")
    inv = meta.get("invalidation")
    return TestCase(
        uid=meta["uid"],
        mode=TestMode.parse(meta["mode"]),
        source_ref=meta["source_ref"],
        generator_version=meta["generator_version"],
        family=FamilyLink(fam["base_uid"], fam["variant_index"]) if fam else None,
        created_at=meta["created_at"],
        invalidation=Invalidation(inv["reason"], inv["at"]) if inv else None,
    )


class Corpus:
    def __init__(self, repo: Repository):
        self.repo = repo
        self._index: dict[str, dict] | None = None
        # base uid -> uids of variants linking to it (any family link, not
        # just EMI families built here); drives the invalidation cascade.
        self._children: dict[str, list[str]] = {}

    # -- index ----------------------------------------------------------

    def _tests(self) -> dict[str, dict]:
        if self._index is None:
            self._index = {}
            for uid in self.repo.list_uids("test"):
                self._note(self.repo.get_meta("test", uid))
        return self._index

    def _note(self, meta: dict) -> None:
        assert self._index is not None
        self._index[meta["uid"]] = meta
        fam = meta.get("family")
        if fam:
            self._children.setdefault(fam["base_uid"], []).append(meta["uid"])

    def _meta(self, uid: str) -> dict:
        meta = self._tests().get(uid)
        if meta is None:
            raise UnknownUid(f"no test with uid {uid}")
        return meta

    # -- reads ----------------------------------------------------------

    def get_test(self, uid: str) -> TestCase:
        return _case_from_meta(self._meta(uid))

    def kernel_path(self, uid: str) -> Path:
        return self.repo.entry_dir("test", uid) / self._meta(uid)["source_ref"]

    def source(self, uid: str) -> str:
        return self.kernel_path(uid).read_text(encoding="utf-8")

    def get_family(self, base_uid: str) -> EmiFamily:
        meta = self._meta(base_uid)
        emi = meta.get("emi")
        if not emi:
            raise UnknownBase(f"test {base_uid} heads no EMI family")
        return EmiFamily(
            base_uid=base_uid,
            variant_uids=tuple(emi["variant_uids"]),
            input_params=EvalParams(emi["input_params"]["thread_count"]),
        )

    def active_tests(self, mode: TestMode | str | None = None,
                     generator_version: str | None = None,
                     family: str | None = None) -> list[TestCase]:
        """Non-invalidated tests matching every given filter, ordered by UID.

        family selects by position in a family: "base" for tests without a
        family link, "variant" for tests with one, or a base UID for that
        base's variants.
        """
        want_mode = TestMode.parse(mode) if mode is not None else None
        out = []
        for uid in sorted(self._tests()):
            meta = self._index[uid]
            if meta.get("invalidation"):
                continue
            if want_mode is not None and meta["mode"] != want_mode.value:
                continue
            if generator_version is not None and \
                    meta["generator_version"] != generator_version:
                continue
            fam = meta.get("family")
            if family == "base" and fam:
                continue
            if family == "variant" and not fam:
                continue
            if family not in (None, "base", "variant") and \
                    (not fam or fam["base_uid"] != family):
                continue
            out.append(_case_from_meta(meta))
        return out

    # -- writes ---------------------------------------------------------

    def register_test(self, source: str, mode: TestMode | str,
                      generator_version: str,
                      family: FamilyLink | None = None) -> TestCase:
        if not source.strip():
            raise EmptySource("program text is empty")
        self._tests()
        mode = TestMode.parse(mode)
        if not _VERSION_RE.match(generator_version):
            raise SchemaViolation(
                f"generator_version must be X.Y.Z or 'unknown', got {generator_version!r}")
        if family is not None:
            base_meta = self._tests().get(family.base_uid)
            if base_meta is None:
                raise UnknownBase(f"no test with uid {family.base_uid}")
            if base_meta.get("family"):
                raise UnknownBase(
                    f"test {family.base_uid} is itself a variant and cannot be a base")
            if family.variant_index < 1:
                raise SchemaViolation("variant_index must be >= 1")
            for sibling in self._children.get(family.base_uid, ()):
                if self._index[sibling]["family"]["variant_index"] == family.variant_index:
                    raise DuplicateVariantIndex(
                        f"family {family.base_uid} already has variant "
                        f"#{family.variant_index}")

        uid = self.repo.new_uid()
        meta = {
            "kind": "test",
            "uid": uid,
            "created_at": now_rfc3339(),
            "mode": mode.value,
            "generator_version": generator_version,
            "source_ref": KERNEL_NAME,
            "family": ({"base_uid": family.base_uid,
                        "variant_index": family.variant_index}
                       if family else None),
            "invalidation": None,
        }
        self.repo.put_entry(RepoEntry(kind="test", uid=uid, meta=meta))
        (self.repo.entry_dir("test", uid) / KERNEL_NAME).write_text(
            source, encoding="utf-8")
        self._note(meta)
        return _case_from_meta(meta)

    def create_family(self, base: TestCase, variant_sources: list[str],
                      input_params: EvalParams) -> EmiFamily:
        """Register EMI variants of base, indexed 1..n in list order, and
        record the family (with the input the dead regions assume) on the
        base. input_params must match what the variants were built for."""
        if base.family is not None:
            raise BaseIsVariant(f"test {base.uid} is a variant and cannot head a family")
        if not variant_sources:
            raise EmptyInput("a family needs at least one variant source")
        base_meta = self._meta(base.uid)
        if base_meta.get("emi"):
            raise FamilyExists(f"test {base.uid} already heads an EMI family")

        variant_uids = []
        for i, text in enumerate(variant_sources, start=1):
            case = self.register_test(text, base.mode, base.generator_version,
                                      family=FamilyLink(base.uid, i))
            variant_uids.append(case.uid)

        base_meta = dict(base_meta)
        base_meta["emi"] = {
            "variant_uids": variant_uids,
            "input_params": {"thread_count": input_params.thread_count},
        }
        self.repo.put_entry(RepoEntry(kind="test", uid=base.uid, meta=base_meta))
        self._note(base_meta)
        return EmiFamily(base.uid, tuple(variant_uids), input_params)

    def invalidate(self, uid: str, reason: str) -> int:
        """Soft-remove a test; a base takes its whole family down with it.
        Returns how many tests this call newly invalidated (0 when the
        target and, for a base, every variant were already out)."""
        target = self._meta(uid)
        victims = [uid]
        if not target.get("family"):
            victims.extend(self._children.get(uid, ()))
        stamp = {"reason": reason, "at": now_rfc3339()}
        count = 0
        for victim in victims:
            meta = self._index[victim]
            if meta.get("invalidation"):
                continue
            meta = dict(meta)
            meta["invalidation"] = stamp
            self.repo.put_entry(RepoEntry(kind="test", uid=victim, meta=meta))
            self._index[victim] = meta
            count += 1
        return count
