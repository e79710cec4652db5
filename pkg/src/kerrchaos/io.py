"""CSV/JSON output with ``#`` metadata headers and atomic writes."""

import contextlib
import json
import math
import os
import tempfile

import numpy as np


@contextlib.contextmanager
def atomic_open(path, mode="w"):
    """Write to a temporary file in the target directory, rename on success."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=os.path.basename(path), dir=directory)
    try:
        with os.fdopen(fd, mode, newline="") as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def format_number(value):
    """Round-trip text for a scalar: ints as ints, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def _meta_value(text):
    text = text.strip()
    if text in ("true", "false"):
        return text == "true"
    if text == "None":
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def write_csv_table(path, columns, metadata=None, delimiter=","):
    """Write equal-length columns with ``# key = value`` header lines."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    with atomic_open(path) as fh:
        for key, value in (metadata or {}).items():
            if isinstance(value, (float, int, np.floating, np.integer)) and not isinstance(value, bool):
                value = format_number(value)
            elif isinstance(value, bool):
                value = format_number(value)
            fh.write(f"# {key} = {value}\n")
        fh.write(delimiter.join(names) + "\n")
        for row in zip(*arrays):
            fh.write(delimiter.join(format_number(v) for v in row) + "\n")


def read_csv_table(path, delimiter=","):
    """Inverse of :func:`write_csv_table`; returns ``(metadata, columns)``."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:]
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = _meta_value(value)
                continue
            if header is None:
                header = line.split(delimiter)
                continue
            rows.append([float(v) for v in line.split(delimiter)])
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header or []))
    return meta, {name: data[:, i] for i, name in enumerate(header or [])}


def write_json(path, obj):
    with atomic_open(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
