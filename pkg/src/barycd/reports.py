"""Certification reports: one inequality instance with verdict and witnesses.

Sign convention: ``slack = rhs - lhs`` and the instance passes iff
``slack >= -tolerance``.  Verdicts other than pass/fail ("degenerate",
"vacuous", "inadmissible") mark instances where the inequality carries no
information and are surfaced instead of being silently counted as passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class CertificationReport:
    inequality: str
    params: dict
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    verdict: str  # "pass" | "fail" | "degenerate" | "vacuous" | "inadmissible"
    witnesses: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_sides(cls, inequality, params, lhs, rhs, tolerance,
                   witnesses=None, metadata=None):
        lhs = float(lhs)
        rhs = float(rhs)
        if math.isinf(rhs) and math.isinf(lhs) and rhs == lhs:
            slack = 0.0
        else:
            slack = rhs - lhs
        verdict = "pass" if slack >= -tolerance else "fail"
        return cls(inequality, dict(params), lhs, rhs, slack, tolerance,
                   verdict, witnesses or {}, metadata or {})

    @classmethod
    def special(cls, inequality, params, verdict, tolerance,
                witnesses=None, metadata=None):
        """A no-verdict report (degenerate / vacuous / inadmissible)."""
        return cls(inequality, dict(params), math.nan, math.nan, math.nan,
                   tolerance, verdict, witnesses or {}, metadata or {})

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"

    def as_dict(self):
        def num(x):
            return None if isinstance(x, float) and math.isnan(x) else x

        return {
            "inequality": self.inequality,
            "params": self.params,
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "slack": num(self.slack),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "witnesses": self.witnesses,
            "metadata": self.metadata,
        }
