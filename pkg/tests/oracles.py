"""Brute-force reference implementations used only by the tests.

None of these import the code paths they check.
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import numpy as np


def column_scan(ks, height):
    """Classify one column by materializing it as a boolean array.

    Returns (surface, above, gap) as sets of z indices.
    """
    col = [False] * height
    for k in ks:
        col[k] = True
    surface, above, gap = set(), set(), set()
    top = max(ks)
    state = "below"
    for k in range(height):
        if state == "below":
            if col[k]:
                state = "surface"
                surface.add(k)
        elif state == "surface":
            if col[k]:
                surface.add(k)
            else:
                state = "beyond"
                if k < top:
                    gap.add(k)
        else:
            if col[k]:
                above.add(k)
            elif k < top:
                gap.add(k)
    return surface, above, gap


def bucket(addresses):
    """Group (level, i, j, k) tuples by (i, j) with a dict of sorted lists."""
    out = {}
    for _, i, j, k in addresses:
        out.setdefault((i, j), []).append(k)
    return {key: sorted(v) for key, v in sorted(out.items())}


def minmax_scan(coords):
    lo = [float("inf")] * 3
    hi = [float("-inf")] * 3
    for row in coords.tolist():
        for a in range(3):
            lo[a] = min(lo[a], row[a])
            hi[a] = max(hi[a], row[a])
    return lo, hi


def distinct_ancestors(leaf_indices, level):
    """Occupied cuboid count per level from the set of leaf (i, j, k)."""
    leaves = {tuple(map(int, t)) for t in leaf_indices}
    return [len({(i >> (level - l), j >> (level - l), k >> (level - l))
                 for i, j, k in leaves}) for l in range(level + 1)]


def membership_centroids(coords, indices):
    """Mean position of every distinct index triple, by scanning all points."""
    out = {}
    for cell in {tuple(map(int, t)) for t in indices}:
        mask = (indices == np.array(cell)).all(axis=1)
        out[cell] = coords[mask].mean(axis=0)
    return out


def decimal_normalize(value: float, keep_digits: int = 3, scale_exp: int = 4) -> float:
    """Truncation and scaling done on the exact decimal string of ``value``."""
    text = format(Decimal(repr(value)), "f")
    sign = -1 if text.startswith("-") else 1
    whole, _, frac = text.lstrip("-").partition(".")
    frac = frac.ljust(keep_digits, "0")
    exact = Fraction(text)
    kept = Fraction(int(whole + frac[:keep_digits]), 10 ** keep_digits) * sign
    if sign < 0 and exact != kept:
        kept -= Fraction(1, 10 ** keep_digits)  # floor, not truncation toward zero
    return float((exact - kept) * 10 ** scale_exp)
