"""Canonical serialization of analysis reports."""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

__all__ = ["to_data", "render_json", "render_text"]


def _num(x: float) -> float | str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    y = float(f"{x:.12g}")
    return 0.0 if y == 0 else y


def to_data(obj: Any) -> Any:
    """Convert to JSON-ready data; complex numbers become ``[re, im]``, floats keep 12 digits."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            key = "|".join(str(p) for p in k) if isinstance(k, tuple) else str(k)
            out[key] = to_data(v)
        return out
    if isinstance(obj, (list, tuple)):
        return [to_data(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_data(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_json(report: dict) -> str:
    return json.dumps(to_data(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _scalar(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None or isinstance(v, str):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return str(_num(float(v)))
    if isinstance(v, (complex, np.complexfloating)):
        re, im = _num(float(v.real)), _num(float(v.imag))
        return str(re) if im == 0 else f"{re}{'+' if not str(im).startswith('-') else ''}{im}i"
    raise TypeError(f"cannot render {type(v).__name__}")


def _inline(v) -> str:
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{_key(k)}: {_inline(v[k])}" for k in sorted(v, key=_key)) + "}"
    return _scalar(v)


def _key(k) -> str:
    return "|".join(str(p) for p in k) if isinstance(k, tuple) else str(k)


def _lines(data: dict, indent: int) -> list[str]:
    pad = "  " * indent
    out = []
    for k in sorted(data, key=_key):
        v = data[k]
        if isinstance(v, dict) and v:
            out.append(f"{pad}{_key(k)}:")
            out.extend(_lines(v, indent + 1))
        else:
            out.append(f"{pad}{_key(k)}: {_inline(v)}")
    return out


def render_text(report: dict) -> str:
    """Human-readable rendering carrying the same rounded numbers as the JSON form."""
    lines = [f"sectorlab {report['version']}", f"input sha256 {report['input_sha256']}",
             f"seed {report['seed']}  tol {_scalar(report['tol'])}", ""]
    for entry in report["results"]:
        lines.append(f"== {entry['name']} [{entry['status']}]")
        body = entry.get("result") if entry["status"] == "ok" else entry.get("error")
        lines.extend(_lines(body or {}, 1))
        lines.append("")
    lines.append("warnings:" if report["warnings"] else "warnings: none")
    lines.extend(f"  - {w}" for w in report["warnings"])
    return "\n".join(lines) + "\n"
