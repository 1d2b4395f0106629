"""Verification records with exact counterexample witnesses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactlin import Mat

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class Check:
    id: str
    tag: str
    status: str
    witness: dict | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def as_dict(self) -> dict:
        d = {"id": self.id, "tag": self.tag, "status": self.status}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for c in other.checks:
            self.checks.append(Check(prefix + c.id, c.tag, c.status, c.witness, c.detail))
        return self

    def skip(self, id: str, tag: str, detail: str) -> Check:
        return self.add(Check(id, tag, SKIPPED, None, detail))

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def get(self, id: str) -> Check:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def find(self, prefix: str) -> list[Check]:
        return [c for c in self.checks if c.id.startswith(prefix)]

    def summary(self) -> dict:
        counts = {PASS: 0, FAIL: 0, SKIPPED: 0}
        for c in self.checks:
            counts[c.status] += 1
        return counts

    def as_dict(self) -> dict:
        return {"summary": self.summary(), "checks": [c.as_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def witness_from_diff(diff: Mat, column_labels: Sequence | None = None, limit: int = 12) -> dict | None:
    """First failing column of ``diff`` with its exact nonzero entries."""
    if diff.is_zero():
        return None
    entries = diff.nonzero_entries()
    col = entries[0][1]
    nz = [[r, v] for r, c, v in entries if c == col][:limit]
    label = column_labels[col] if column_labels is not None else col
    return {"column": label, "residual": nz}


def compare(id: str, tag: str, lhs: Mat, rhs: Mat, column_labels: Sequence | None = None, detail: str = "") -> Check:
    """Exact matrix identity check, one witness column on failure."""
    if lhs.shape != rhs.shape:
        return Check(id, tag, FAIL, {"shape": [list(lhs.shape), list(rhs.shape)]}, detail)
    diff = lhs - rhs
    w = witness_from_diff(diff, column_labels)
    return Check(id, tag, PASS if w is None else FAIL, w, detail)


def zero_check(id: str, tag: str, value: Mat, column_labels: Sequence | None = None, detail: str = "") -> Check:
    w = witness_from_diff(value, column_labels)
    return Check(id, tag, PASS if w is None else FAIL, w, detail)


def merge(reports: Iterable[VerificationReport]) -> VerificationReport:
    out = VerificationReport()
    for r in reports:
        out.checks.extend(r.checks)
    return out
