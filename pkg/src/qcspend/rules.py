"""Machine-readable consensus rule violations.

Every rejection path in block or transaction validation raises (or logs)
a RuleViolation carrying a stable rule identifier, so tests and reports
can match on the rule rather than on prose.
"""

from __future__ import annotations


class RuleViolation(Exception):
    def __init__(self, rule: str, detail: str = ""):
        self.rule = rule
        self.detail = detail
        super().__init__(f"{rule}: {detail}" if detail else rule)
