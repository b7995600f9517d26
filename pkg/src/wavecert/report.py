"""Deterministic report serialization.

Reports are emitted as a stable key-value tree: keys sorted, floats printed
with 17 significant digits, two-space indentation.  Identical inputs yield
byte-identical documents, which CI snapshot tests rely on; the wall-clock
duration field is the single intentionally nondeterministic entry and
consumers strip it before comparing.
"""

import math

import numpy as np


def fmt_float(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    if math.isnan(v):
        return "NaN"
    return format(v, ".17g")


def _escape(text: str) -> str:
    out = ["\""]
    for ch in text:
        if ch == "\"":
            out.append("\\\"")
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append("\"")
    return "".join(out)


def _write(obj, indent: int, pieces: list):
    pad = "  " * indent
    if obj is None:
        pieces.append("null")
    elif obj is True:
        pieces.append("true")
    elif obj is False:
        pieces.append("false")
    elif isinstance(obj, str):
        pieces.append(_escape(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        pieces.append(fmt_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        keys = sorted(obj.keys())
        for idx, key in enumerate(keys):
            pieces.append(f"{pad}  {_escape(str(key))}: ")
            _write(obj[key], indent + 1, pieces)
            pieces.append(",\n" if idx + 1 < len(keys) else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for idx, item in enumerate(items):
            pieces.append(pad + "  ")
            _write(item, indent + 1, pieces)
            pieces.append(",\n" if idx + 1 < len(items) else "\n")
        pieces.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_stable(obj) -> str:
    """Serialize to the stable JSON-style document, newline terminated."""
    pieces = []
    _write(obj, 0, pieces)
    pieces.append("\n")
    return "".join(pieces)


def strip_duration(text: str) -> str:
    """Drop the duration line so two runs of the same config compare equal."""
    return "".join(
        line
        for line in text.splitlines(keepends=True)
        if "\"duration_seconds\"" not in line
    )
