"""Result records shared by the verifiers and the command-line reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class CheckResult:
    """Outcome of one property check.

    ``residual`` is the worst value seen, ``sample`` the inputs that produced
    it (kept for every check, required for failures).
    """

    name: str
    residual: float
    threshold: float
    passed: bool
    count: int = 0
    sample: dict[str, Any] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: residual={self.residual:.3e} threshold={self.threshold:.1e} n={self.count}"


class WorstCase:
    """Running maximum of residuals remembering the offending sample."""

    def __init__(self, name: str, threshold: float):
        self.name = name
        self.threshold = threshold
        self.worst = 0.0
        self.sample: dict[str, Any] = {}
        self.count = 0
        self.info: dict[str, Any] = {}

    def add(self, residual: float, **sample) -> None:
        self.count += 1
        r = float(residual)
        if not np.isfinite(r):
            r = np.inf
        if r > self.worst or not self.sample:
            self.worst = max(self.worst, r)
            self.sample = sample

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.worst, self.threshold,
                           bool(self.worst < self.threshold), self.count, self.sample, self.info)
