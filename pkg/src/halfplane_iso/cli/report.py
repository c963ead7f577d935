"""Deterministic JSON for reports.

Field order is the order in which payloads are built (dataclass field order
for library results), floats carry 17 significant digits, complex numbers
become ``{"re": .., "im": ..}`` and non-finite floats the strings
``"inf"``, ``"-inf"``, ``"nan"``.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
from typing import Any

import numpy as np

from ..ratfunc import RationalMap, is_pole


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"  # drops the sign of -0.0 so runs agree
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def to_plain(obj: Any) -> Any:
    """Lower library objects to dict/list/str/int/float/complex/bool/None."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if is_pole(obj):
        return "pole"
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex(obj)
    if isinstance(obj, RationalMap):
        return {"num": [complex(c) for c in obj.num.coeffs], "den": [complex(c) for c in obj.den.coeffs]}
    if isinstance(obj, np.ndarray):
        return [to_plain(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    out: list[str] = []
    _emit(to_plain(obj), out, 0, indent)
    return "".join(out) + "\n"


def _emit(v: Any, out: list[str], level: int, indent: int) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        out.append("null")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        out.append(_float(v))
    elif isinstance(v, complex):
        out.append(f'{{"re": {_float(v.real)}, "im": {_float(v.imag)}}}')
    elif isinstance(v, str):
        out.append(json.dumps(v))
    elif isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        for n, (k, x) in enumerate(v.items()):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(x, out, level + 1, indent)
            out.append(",\n" if n < len(v) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(v, list):
        if not v:
            out.append("[]")
            return
        # short scalar lists stay on one line
        if all(not isinstance(x, (dict, list)) for x in v):
            parts = []
            for x in v:
                buf: list[str] = []
                _emit(x, buf, level + 1, indent)
                parts.append("".join(buf))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for n, x in enumerate(v):
            out.append(pad)
            _emit(x, out, level + 1, indent)
            out.append(",\n" if n < len(v) - 1 else "\n")
        out.append(end + "]")
    else:  # pragma: no cover - to_plain has already normalised everything
        raise TypeError(type(v).__name__)
