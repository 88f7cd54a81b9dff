"""Check records emitted by the verification routines, one JSON object per line."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np


def _plain(value: Any) -> Any:
    # big integers and rationals travel as decimal strings
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class CheckRecord:
    check: str
    lemma_tag: str
    params: dict = field(default_factory=dict)
    mode: str = "exhaustive"
    trials: int = 0
    violations: int = 0
    witnesses: list = field(default_factory=list)
    exact_values: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trials"] = int(self.trials)
        d["violations"] = int(self.violations)
        d["params"] = {k: (v if isinstance(v, (str, bool)) or v is None else _plain(v))
                       for k, v in self.params.items()}
        d["exact_values"] = _plain(self.exact_values)
        d["witnesses"] = [str(w) for w in self.witnesses]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.check} ({self.lemma_tag}) mode={self.mode} trials={self.trials} violations={self.violations}"


class Tally:
    """Accumulates trials, violations and the first few counterexamples."""

    def __init__(self, max_witnesses: int = 3):
        self.trials = 0
        self.violations = 0
        self.witnesses: list[str] = []
        self.max_witnesses = max_witnesses

    def add(self, trials: int, bad_witnesses: list[str], n_bad: int | None = None):
        self.trials += int(trials)
        self.violations += int(len(bad_witnesses) if n_bad is None else n_bad)
        room = self.max_witnesses - len(self.witnesses)
        if room > 0:
            self.witnesses.extend(bad_witnesses[:room])

    def record(self, check: str, lemma_tag: str, params: dict, mode: str, **extra) -> CheckRecord:
        return CheckRecord(check, lemma_tag, params, mode, self.trials, self.violations,
                           list(self.witnesses), **extra)


def write_records(records, stream) -> None:
    for rec in records:
        stream.write(rec.to_json() + "\n")
