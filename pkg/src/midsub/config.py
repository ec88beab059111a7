"""Analysis knobs read from an optional ``key = value`` file.

Lines starting with ``#`` or ``;`` are comments. Unknown keys are an
error so that typos do not silently fall back to defaults. Command-line
flags override file values.
"""

from __future__ import annotations

import configparser
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .characteristic import ANGLE_TOL, CHAR_MAX_ITER, CHAR_TOL, CONE_STEPS
from .errors import InvalidParameter
from .spectral import EIG_TOL, MAX_ITER

LOG_ENV = "MIDSUB_LOG_LEVEL"


@dataclass(frozen=True)
class Config:
    eig_tol: float = EIG_TOL
    max_iter: int = MAX_ITER
    char_tol: float = CHAR_TOL
    char_max_iter: int = CHAR_MAX_ITER
    angle_tol: float = ANGLE_TOL
    cone_steps: int = CONE_STEPS
    rho: int | None = None

    def merged(self, **overrides) -> Config:
        """Copy with every non-``None`` override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


def _convert(name: str, text: str):
    kinds = {f.name: f.type for f in fields(Config)}
    kind = kinds[name]
    try:
        if name == "rho":
            return None if text.lower() in ("", "none", "auto") else int(text)
        if "int" in str(kind):
            return int(text)
        return float(text)
    except ValueError:
        raise InvalidParameter(f"config key {name!r}: cannot parse {text!r}") from None


def parse_config(text: str) -> Config:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[midsub]\n" + text)
    except configparser.Error as exc:
        raise InvalidParameter(f"config: {exc}") from None
    known = {f.name for f in fields(Config)}
    values = {}
    for key, raw in parser["midsub"].items():
        name = key.strip().replace("-", "_")
        if name not in known:
            raise InvalidParameter(f"config: unknown key {key!r}")
        values[name] = _convert(name, raw.strip())
    return Config(**values)


def load_config(path: str | os.PathLike | None) -> Config:
    if path is None:
        return Config()
    p = Path(path)
    if not p.is_file():
        raise InvalidParameter(f"config file not found: {p}")
    return parse_config(p.read_text())


def setup_logging() -> None:
    """Configure the root logger from ``MIDSUB_LOG_LEVEL`` (default WARNING)."""
    name = os.environ.get(LOG_ENV, "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
