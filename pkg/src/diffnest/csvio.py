"""CSV float formatting shared by all writers.

Floats are serialized with 17 significant digits, which is lossless for
IEEE doubles: parsing the string recovers the identical bit pattern. That
makes every output file byte-deterministic and round-trippable.
"""

from __future__ import annotations

import math

__all__ = ["fmt_float", "parse_float"]


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.17g}"


def parse_float(s: str) -> float:
    return float(s)
