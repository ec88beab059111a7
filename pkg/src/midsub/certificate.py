"""Structured verdicts with the numeric evidence behind them."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__

SCHEMA = 1

C0 = "C0-certified"
C1_REGULAR = "C1-certified-regular"
C1_EXTRAORDINARY = "C1-certified-extraordinary"
NOT_CERTIFIABLE = "not-certifiable"
INAPPLICABLE = "technique-inapplicable"
INVALID = "invalid-input"

VERDICTS = (C0, C1_REGULAR, C1_EXTRAORDINARY, NOT_CERTIFIABLE, INAPPLICABLE, INVALID)
CERTIFIED = (C0, C1_REGULAR, C1_EXTRAORDINARY)


@dataclass(frozen=True)
class Evidence:
    name: str
    value: object
    note: str = ""


@dataclass
class Certificate:
    """Verdict plus the facts that support it.

    ``subject`` holds the word, valence and orientation; ``provenance``
    names the results relied upon; ``config`` echoes the tolerances used.
    """

    subject: dict
    verdict: str
    evidence: list[Evidence] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    version: str = __version__

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def certified(self) -> bool:
        return self.verdict in CERTIFIED

    def add(self, name: str, value, note: str = "") -> Certificate:
        self.evidence.append(Evidence(name, value, note))
        return self

    def get(self, name: str, default=None):
        for e in self.evidence:
            if e.name == name:
                return e.value
        return default

    def __getitem__(self, name: str):
        for e in self.evidence:
            if e.name == name:
                return e.value
        raise KeyError(name)

    def to_dict(self, timestamp: bool = True) -> dict:
        out = {
            "schema": SCHEMA,
            "subject": _plain(self.subject),
            "verdict": self.verdict,
            "evidence": [
                {"name": e.name, "value": _plain(e.value), **({"note": e.note} if e.note else {})}
                for e in self.evidence
            ],
            "provenance": list(self.provenance),
            "config": _plain(self.config),
            "version": self.version,
        }
        if timestamp:
            out["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return out

    def to_json(self, timestamp: bool = True, indent: int | None = 1) -> str:
        return dumps(self.to_dict(timestamp), indent=indent)


def _plain(x):
    """Convert numbers and containers into JSON-friendly values."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x.numerator)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _Float(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _Float(x.real), "im": _Float(x.imag)}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, Certificate):
        return x.to_dict(timestamp=False)
    return x


class _Float(float):
    """Float printed with 17 significant digits."""


_TAG = "\u0000f:"


def _mark(o):
    if isinstance(o, _Float):
        if math.isnan(o) or math.isinf(o):
            return str(float(o))
        return _TAG + format(float(o), ".17g")
    if isinstance(o, dict):
        return {k: _mark(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_mark(v) for v in o]
    return o


def dumps(obj, indent: int | None = 1) -> str:
    """JSON text with floats written to 17 significant digits."""
    text = json.dumps(_mark(_plain(obj)), indent=indent, default=str)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text)
