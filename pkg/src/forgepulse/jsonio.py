"""Deterministic output writing.

All JSON emitted by the toolkit goes through ``dumps_stable`` so that two runs
over identical inputs produce byte-identical files: keys are sorted and every
float is rounded to 6 significant digits before encoding.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path


def round_floats(obj):
    """Return a copy of a JSON-ish structure with floats at 6 significant digits.

    NaN and infinities become None (JSON null).
    """
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {key: round_floats(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(value) for value in obj]
    return obj


def dumps_stable(obj, indent: int | None = 2) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=indent)


@contextmanager
def atomic_writer(path: Path | str):
    """Text handle that lands at ``path`` via temp file + rename, so readers
    and concurrent runs never see partial files."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path: Path | str, text: str) -> None:
    with atomic_writer(path) as handle:
        handle.write(text)


def write_json_atomic(path: Path | str, obj) -> None:
    write_text_atomic(path, dumps_stable(obj) + "\n")
