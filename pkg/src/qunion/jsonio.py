"""JSON wire formats and round-trippable numeric output.

Operator: ``{"dim": d, "re": [[...]], "im": [[...]]}`` (row-major).
Channel: ``{"dim_in": a, "dim_out": b, "kraus": [op, ...]}`` where each
Kraus entry uses the operator layout with an extra ``"cols"`` field when it
is not square.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .operators import QuantumChannel, ValidationError


def fmt(x) -> str:
    """17 significant digits; non-finite values as ``inf``/``-inf``/``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def operator_to_json(op: np.ndarray) -> dict:
    op = np.asarray(op, dtype=complex)
    out = {"dim": int(op.shape[0]), "re": op.real.tolist(), "im": op.imag.tolist()}
    if op.shape[0] != op.shape[1]:
        out["cols"] = int(op.shape[1])
    return out


def operator_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed operator JSON: {exc}") from exc
    cols = int(obj.get("cols", dim))
    if re.shape != (dim, cols) or im.shape != (dim, cols):
        raise ValidationError(f"operator JSON shape {re.shape} does not match dim {dim}x{cols}")
    return re + 1j * im


def channel_to_json(ch: QuantumChannel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [operator_to_json(k) for k in ch.kraus],
    }


def channel_from_json(obj: dict) -> QuantumChannel:
    kraus = tuple(operator_from_json(k) for k in obj["kraus"])
    ch = QuantumChannel(kraus)
    if ("dim_in" in obj and int(obj["dim_in"]) != ch.dim_in) or (
        "dim_out" in obj and int(obj["dim_out"]) != ch.dim_out
    ):
        raise ValidationError("channel JSON dims disagree with its Kraus operators")
    return ch


def load_operator(path) -> np.ndarray:
    return operator_from_json(json.loads(Path(path).read_text()))


def load_channel(path) -> QuantumChannel:
    return channel_from_json(json.loads(Path(path).read_text()))


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt(obj)
        return s if math.isfinite(float(obj)) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def parse_number(value) -> float:
    """Inverse of :func:`fmt` for values read back from our own JSON/CSV."""
    if isinstance(value, str):
        return float(value)
    return float(value)
