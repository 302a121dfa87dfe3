"""Canonical JSON/CSV emission and run manifests."""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
import csv
import hashlib
import io
import json
import math

import numpy as np

from .errors import DomainError


def _plain(obj):
    """Convert results to JSON-ready builtins (dicts, lists, str, int, float, bool, None)."""
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise DomainError(f"cannot serialize {type(obj).__name__}")


def _float_text(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _dump(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _dump(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float_text(obj))
    else:
        out.append(json.dumps(obj))


def canonical_json(results):
    """Sorted keys, 17 significant digits, no whitespace, trailing newline."""
    out = []
    _dump(_plain(results), out)
    out.append("\n")
    return "".join(out).encode()


def _csv_cell(v):
    if isinstance(v, float):
        return _float_text(v).strip('"')
    if isinstance(v, (list, dict)):
        return canonical_json(v).decode().rstrip("\n")
    return "" if v is None else v


def canonical_csv(rows, columns=None):
    """CSV of a list of flat dicts; ``columns`` fixes the header when rows may be empty."""
    rows = [_plain(r) for r in rows]
    if columns is None:
        if not rows:
            raise DomainError("cannot infer CSV columns from an empty table")
        columns = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue().encode()


def emit_report(results, fmt="json", columns=None):
    if fmt == "json":
        return canonical_json(results)
    if fmt == "csv":
        if isinstance(results, (bytes, str)):
            return results.encode() if isinstance(results, str) else results
        return canonical_csv(results, columns)
    raise DomainError(f"unsupported format {fmt!r}")


def digest(data):
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    argv: tuple
    params: dict
    seed: int | None
    version: str
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    digest: str = ""

    def to_json(self):
        return {"argv": list(self.argv), "params": self.params, "seed": self.seed,
                "version": self.version, "timestamp": self.timestamp, "digest": self.digest}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["argv"]), obj["params"], obj["seed"], obj["version"],
                   obj["timestamp"], obj["digest"])
