"""Deterministic I/O helpers: seeded point streams and byte-stable emission.

Probe points for the verification commands come from SplitMix64, a counter
based generator simple enough to restate in any language (the README carries
the specification), so identical seeds reproduce identical point sets across
implementations.  CSV and JSON writers serialize floats with 17 significant
digits (round-trip exact for binary64) and fixed ordering, making artifacts
byte-identical across runs and thread counts.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["SplitMix64", "format_float", "emit_csv", "emit_json", "read_csv"]

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream: state advances by 0x9E3779B97F4A7C15 per draw;
    the output mix is z ^= z>>30, z *= 0xBF58476D1CE4E5B9, z ^= z>>27,
    z *= 0x94D049BB133111EB, z ^= z>>31.  Floats are (z >> 11) * 2^-53."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def floats(self, n: int) -> np.ndarray:
        return np.array([self.next_float() for _ in range(n)])

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        return lo + (hi - lo) * self.floats(n)


def format_float(x) -> str:
    """17-significant-digit decimal, round-trip exact for float64."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def emit_csv(path, header, rows):
    """Write rows of mixed ints/floats/strings with stable formatting."""
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            out = []
            for v in row:
                if isinstance(v, (bool, np.bool_)):
                    out.append(str(bool(v)).lower())
                elif isinstance(v, (int, np.integer)):
                    out.append(str(int(v)))
                elif isinstance(v, (float, np.floating)):
                    out.append(format_float(v))
                else:
                    out.append(str(v))
            f.write(",".join(out) + "\n")


def _json_dump(obj, out, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f'{pad_in}"{k}": ')
            _json_dump(v, out, indent, level + 1)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad_in)
            _json_dump(v, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            out.append(f'"{format_float(x)}"')
        else:
            out.append(format_float(x))
    elif obj is None:
        out.append("null")
    else:
        out.append('"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"')


def emit_json(path, obj, indent: int = 2):
    """Stable JSON with 17-significant-digit floats and insertion order."""
    out = []
    _json_dump(obj, out, indent, 0)
    with open(path, "w", newline="\n") as f:
        f.write("".join(out) + "\n")


def read_csv(path):
    """Read back an emitted CSV as (header, list of string rows)."""
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
