"""Named residual checks and the reports built from them."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    passed: bool

    def as_dict(self) -> dict:
        return {"check": self.name, "residual": float(self.residual), "pass": bool(self.passed)}


def residual_check(name: str, residual: float, tol: float) -> Check:
    """Passes when ``residual < tol`` (an exact zero always passes)."""
    return Check(name, float(residual), bool(residual < tol or residual == 0.0))


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def as_list(self) -> list[dict]:
        return [c.as_dict() for c in self.checks]
