"""Atomic, byte-stable serialization of time series and reports."""
import json
import math
import os
import tempfile

import numpy as np


def atomic_write(path, text):
    """Write ``text`` next to ``path`` and rename over it."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(value):
    """17 significant digits, enough to round-trip a double."""
    return format(float(value), ".17g")


def timeseries_csv(ts, columns=None):
    columns = list(columns if columns is not None else ts.columns)
    lines = [",".join(["t", *columns])]
    data = [ts.t] + [np.asarray(ts.columns[c]) for c in columns]
    for row in zip(*data):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_timeseries_csv(path, ts, columns=None):
    atomic_write(path, timeseries_csv(ts, columns))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps(obj))
