"""Deterministic JSON writing with fixed-precision floats, plus atomic file writes.

The stdlib encoder offers no public hook to control float formatting, and the
persisted stores/models promise decimals with 17 significant digits (enough to
round-trip any IEEE-754 double bit-exactly). This writer covers the small JSON
subset those files use: dict / list / str / int / float / bool / None.
"""

import json
import math
import os
import tempfile
from pathlib import Path


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite float not representable in JSON: {x!r}")
    if x == int(x) and abs(x) < 1e16:
        # keep integral floats readable and unambiguous as floats
        return f"{x:.1f}"
    return format(x, ".17g")


def dumps(obj, indent: int | None = None) -> str:
    out: list[str] = []
    _write(obj, out)
    text = "".join(out)
    if indent is not None:
        # re-indent through the stdlib parser; floats survive because 17g
        # strings parse back to the exact same double
        return json.dumps(json.loads(text), indent=indent)
    return text


def _write(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _write(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(", ")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {type(key).__name__}")
            out.append(json.dumps(key))
            out.append(": ")
            _write(value, out)
        out.append("}")
    else:
        raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def dump_file(obj, path: Path | str) -> None:
    atomic_write_text(path, dumps(obj) + "\n")


def load_file(path: Path | str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
