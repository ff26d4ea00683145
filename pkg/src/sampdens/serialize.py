"""Deterministic JSON emission: sorted keys, floats at 17 significant digits.

Artifacts must be byte-identical across runs with the same inputs, so the
writer below renders everything itself instead of relying on json.dumps
float formatting.
"""

from __future__ import annotations

import json
import math


def _render(value, parts, indent):
    pad = " " * indent
    if isinstance(value, dict):
        if not value:
            parts.append("{}")
            return
        parts.append("{\n")
        keys = sorted(value)
        for i, key in enumerate(keys):
            parts.append(pad + "  " + json.dumps(str(key)) + ": ")
            _render(value[key], parts, indent + 2)
            parts.append(",\n" if i + 1 < len(keys) else "\n")
        parts.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, item in enumerate(value):
            parts.append(pad + "  ")
            _render(item, parts, indent + 2)
            parts.append(",\n" if i + 1 < len(value) else "\n")
        parts.append(pad + "]")
    elif isinstance(value, bool):
        parts.append("true" if value else "false")
    elif isinstance(value, float):
        if math.isnan(value):
            parts.append('"nan"')
        elif math.isinf(value):
            parts.append('"inf"' if value > 0 else '"-inf"')
        else:
            parts.append(format(value, ".17g"))
    elif isinstance(value, int):
        parts.append(str(value))
    elif value is None:
        parts.append("null")
    else:
        parts.append(json.dumps(str(value)))


def dumps_json(data) -> str:
    parts: list[str] = []
    _render(data, parts, 0)
    parts.append("\n")
    return "".join(parts)


def dump_json(data, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_json(data))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
