"""Audit report containers shared by the chi and maxchi modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping


@dataclass(frozen=True)
class AuditFinding:
    kind: str
    message: str
    data: Mapping[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


@dataclass(frozen=True)
class AuditReport:
    subject: str
    checked: int
    findings: tuple[AuditFinding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        head = f"{self.subject}: {self.checked} check(s), "
        head += "clean" if self.ok else f"{len(self.findings)} finding(s)"
        return "\n".join([head] + [f"  {f}" for f in self.findings])
