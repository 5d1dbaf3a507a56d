"""JSON report serialization and schema validation.

Floats are written with 17 significant digits so every value reads back
bit-for-bit.  JSON has no spelling for non-finite numbers, so infinities
and NaN are written as the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""
import json
import math
from importlib import resources

import numpy as np

SCHEMA_FILE = "report.schema.json"


def _float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    # keep floats recognizable as floats
    if all(ch not in s for ch in ".eEn"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.generic)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, indent, 0) + "\n"


def load_schema():
    return json.loads(resources.files("eqkit").joinpath(SCHEMA_FILE).read_text())


def validate(report):
    """Raise ``jsonschema.ValidationError`` if ``report`` breaks the shipped schema."""
    import jsonschema

    jsonschema.validate(json.loads(dumps(report)), load_schema())
