"""Structured verification reports with deterministic JSON output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .bjorling import SIGN_CONVENTION

TOOL_VERSION = "0.1.0"


@dataclass
class CheckRow:
    """One named check: a measured value against a bound or expected value.

    kind "bound": pass iff measured <= expected (tol unused as slack is in
    the bound); kind "tolerance": pass iff |measured - expected| <= tol;
    kind "flag": measured is compared to expected for equality.
    """

    name: str
    inputs: dict
    measured: float | str
    expected: float | str
    tol: float
    kind: str = "tolerance"

    @property
    def passed(self) -> bool:
        if self.kind == "bound":
            return float(self.measured) <= float(self.expected)
        if self.kind == "flag":
            return self.measured == self.expected
        return abs(float(self.measured) - float(self.expected)) <= self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "measured": self.measured,
            "expected": self.expected,
            "tol": self.tol,
            "kind": self.kind,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    config: dict
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    version: str = TOOL_VERSION

    def add(self, row: CheckRow):
        self.checks.append(row)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        n_pass = sum(1 for c in self.checks if c.passed)
        return {"total": len(self.checks), "passed": n_pass,
                "failed": len(self.checks) - n_pass}

    def as_dict(self) -> dict:
        return {
            "version": self.version,
            "convention": SIGN_CONVENTION,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "notes": list(self.notes),
            "summary": self.summary(),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
