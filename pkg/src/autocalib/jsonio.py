"""Deterministic JSON output.

Result files must be byte-identical across runs with the same inputs, so
floats are always rendered with 17 significant digits (enough to
round-trip an IEEE double) instead of whatever ``repr`` shortening the
interpreter picks.  Reading uses the stdlib parser unchanged.
"""

import json
import math
from pathlib import Path
from typing import Any

import numpy as np


def _render(value: Any, out: list[str]) -> None:
    if isinstance(value, dict):
        out.append("{")
        for i, (key, item) in enumerate(value.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _render(item, out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(", ")
            _render(item, out)
        out.append("]")
    elif isinstance(value, bool) or value is None:
        out.append(json.dumps(value))
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} cannot be serialized")
        text = format(value, ".17g")
        # keep the token a float on re-read
        if "." not in text and "e" not in text and "E" not in text:
            text += ".0"
        out.append(text)
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, np.ndarray):
        _render(value.tolist(), out)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(obj: Any) -> str:
    parts: list[str] = []
    _render(obj, parts)
    return "".join(parts)


def dump(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def load(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
