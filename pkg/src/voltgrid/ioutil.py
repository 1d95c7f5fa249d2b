"""Deterministic number and JSON formatting shared by the CLI and reports."""

from __future__ import annotations

import json
import math

import numpy as np


def fmt12(x: float) -> str:
    """Render a float with 12 significant digits.

    Reruns must be byte-identical, so every number the package writes goes
    through here. NaN renders as the empty string (the CSV missing marker).
    """
    v = float(x)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def json_ready(obj):
    """Recursively convert to JSON-safe types with 12-significant-digit floats.

    Infinities become None: JSON has no literal for them and ``json.dump``
    would otherwise emit nonstandard ``Infinity`` tokens.
    """
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return None
        return float(fmt12(v))
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, fileobj) -> None:
    """Stable JSON: sorted keys, no trailing whitespace jitter."""
    json.dump(json_ready(obj), fileobj, indent=2, sort_keys=True)
    fileobj.write("\n")
