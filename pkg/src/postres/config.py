"""Unit-aware parsing of JSON run configurations.

Every physical value is a string with an explicit unit, e.g. ``"300 pH"`` or
``"25 GHz"``. Dimensionless values (quality factors, counts, bits, codes)
are plain JSON numbers; ``"inf"`` is accepted where infinity makes sense.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any, Mapping

UNITS: dict[str, dict[str, float]] = {
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "capacitance": {"F": 1.0, "nF": 1e-9, "pF": 1e-12, "fF": 1e-15, "aF": 1e-18},
    "inductance": {"H": 1.0, "uH": 1e-6, "nH": 1e-9, "pH": 1e-12},
    "resistance": {"ohm": 1.0, "Ohm": 1.0, "kohm": 1e3, "mohm": 1e-3},
    "db": {"dB": 1.0},
    "dbm": {"dBm": 1.0},
    "angle": {"deg": 1.0, "rad": 180.0 / math.pi},
    "rate": {"rad/s": 1.0, "Hz": 2 * math.pi, "MHz": 2e6 * math.pi, "GHz": 2e9 * math.pi},
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([A-Za-z/]+)\s*$")


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


def parse_quantity(value: Any, kind: str, key: str = "value") -> float:
    """Convert ``"<number> <unit>"`` to SI (angles to degrees, rates to rad/s)."""
    if isinstance(value, bool) or not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string with a {kind} unit, got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise ConfigError(f"{key}: cannot parse {value!r}; expected '<number> <unit>'")
    number, unit = m.groups()
    scale = UNITS[kind].get(unit)
    if scale is None:
        raise ConfigError(f"{key}: unit {unit!r} is not a {kind} unit ({', '.join(UNITS[kind])})")
    return float(number) * scale


def parse_number(value: Any, key: str, *, integer: bool = False, allow_inf: bool = False) -> float:
    if isinstance(value, str) and allow_inf and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if math.isinf(value) and not allow_inf:
        raise ConfigError(f"{key}: infinity not allowed")
    return int(value) if integer else float(value)


def check_keys(block: Mapping, allowed: set[str], where: str) -> None:
    if not isinstance(block, Mapping):
        raise ConfigError(f"{where}: expected an object, got {type(block).__name__}")
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def positive(x: float, key: str) -> float:
    if not x > 0:
        raise ConfigError(f"{key}: must be > 0, got {x}")
    return x


def merge(base: Mapping, override: Mapping) -> dict:
    """Recursive dict merge; ``override`` wins, lists are replaced whole."""
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data
