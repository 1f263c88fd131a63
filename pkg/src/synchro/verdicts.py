"""Verdict reports and their JSON schema."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive-within-budget"
VERDICTS = (HOLDS, FAILS, INCONCLUSIVE)

CONJECTURES = ("extension", "cn-extension", "kn-balanced", "kn-independent",
               "local-extension", "local-balanced")


@dataclass
class VerdictReport:
    """Outcome of checking one conjecture on one automaton.

    A ``fails`` verdict must carry a witness; ``holds`` is only allowed from
    an exhaustive search (``budgets["exhaustive"]`` true).
    """

    subject: dict
    conjecture: str
    parameters: dict
    measured: dict
    verdict: str
    budgets: dict = field(default_factory=dict)
    witness: dict | None = None
    implies: list = field(default_factory=list)

    def __post_init__(self):
        if self.conjecture not in CONJECTURES:
            raise ValueError(f"unknown conjecture {self.conjecture!r}")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FAILS and not self.witness:
            raise ValueError("a 'fails' verdict needs a witness")
        if self.verdict == HOLDS and not self.budgets.get("exhaustive"):
            raise ValueError("'holds' needs an exhaustive search")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def report_schema() -> dict:
    text = resources.files("synchro").joinpath("verdict_report.schema.json").read_text()
    return json.loads(text)
