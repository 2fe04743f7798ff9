"""Validation reports shared by the checking operations."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Finding:
    check: str
    message: str
    unknown: bool = False

    def text(self) -> str:
        tag = "unknown" if self.unknown else "failed"
        return f"{self.check} {tag}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Failed checks plus checks that could not be decided.

    A report is truthy only when nothing failed and nothing was left open.
    """

    findings: tuple[Finding, ...] = ()

    @property
    def failures(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if not f.unknown)

    @property
    def unknowns(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.unknown)

    @property
    def status(self) -> str:
        if self.failures:
            return "fail"
        if self.unknowns:
            return "unknown"
        return "pass"

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def __bool__(self) -> bool:
        return self.ok

    def merged(self, other: ValidationReport, prefix: str = "") -> ValidationReport:
        extra = tuple(Finding(prefix + f.check, f.message, f.unknown) for f in other.findings)
        return ValidationReport(self.findings + extra)

    def lines(self) -> list[str]:
        return [f.text() for f in self.findings]


class ReportBuilder:
    def __init__(self):
        self._items: list[Finding] = []

    def fail(self, check: str, message: str) -> None:
        self._items.append(Finding(check, message))

    def unknown(self, check: str, message: str) -> None:
        self._items.append(Finding(check, message, True))

    def extend(self, report: ValidationReport, prefix: str = "") -> None:
        for f in report.findings:
            self._items.append(Finding(prefix + f.check, f.message, f.unknown))

    def build(self) -> ValidationReport:
        return ValidationReport(tuple(self._items))
