"""Canonical structured output.

Every number crosses the interface boundary as a decimal string, so the
command line and the service produce byte-identical documents and no
client ever parses a float out of JSON. Keys are sorted, indent is two
spaces, documents end with a newline.
"""

from __future__ import annotations

import json

import numpy as np


def decimal(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if f != f or f in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {f} in structured output")
        return np.format_float_positional(f, unique=True, trim="-")
    raise TypeError(f"not a number: {value!r}")


def stringify(doc):
    """Recursively replace every number with its decimal string."""
    if isinstance(doc, dict):
        return {k: stringify(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [stringify(v) for v in doc]
    if isinstance(doc, (bool, np.bool_)):
        return bool(doc)
    if isinstance(doc, (int, float, np.integer, np.floating)):
        return decimal(doc)
    return doc


def render_structured(doc) -> str:
    return json.dumps(stringify(doc), indent=2, sort_keys=True) + "\n"
