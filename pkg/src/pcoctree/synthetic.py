"""Synthetic point clouds with known cuboid occupancy.

Each generator first designs the set of occupied max-level cells, then
scatters points strictly inside them, away from cell faces. Two anchor
points pin the bounding box to the designed grid: one on the minimum
corner of cell ``(0, 0, 0)`` and one on the maximum corner of cell
``(n-1, n-1, n-1)``, so both those cells must be part of every design.

Expected counts are derived from the design alone, with a plain
boolean-column scan, and never touch the octree or classifier code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .point_io import AxisOrder, PointCloud

#: lat/lon-like origin (degrees, degrees, meters) and cuboid span of the grid.
DEFAULT_ORIGIN = (41.7231, 44.7831, 812.0)
DEFAULT_SPAN = (0.0006, 0.0008, 2.0)
EDGE_MARGIN = 0.15


@dataclass
class Fixture:
    kind: str
    level: int
    cloud: PointCloud
    cells: np.ndarray  # (M, 3) designed occupied cells, lexicographically sorted

    def expected(self) -> dict:
        """Counts the pipeline must reproduce on this cloud."""
        n = 2 ** self.level
        level_counts = [int(len(np.unique(self.cells >> (self.level - l), axis=0)))
                        for l in range(self.level + 1)]
        surface = above = gap = 0
        occ = np.zeros((n, n, n), dtype=bool)
        occ[tuple(self.cells.T)] = True
        for i, j in np.unique(self.cells[:, :2], axis=0):
            col = occ[i, j]
            ks = np.flatnonzero(col)
            lowest = ks[0]
            run_end = lowest
            while run_end + 1 < n and col[run_end + 1]:
                run_end += 1
            surface += int(run_end - lowest + 1)
            above += int(col[run_end + 1:].sum())
            gap += int((~col[run_end + 1:ks[-1] + 1]).sum())
        return {
            "kind": self.kind,
            "level": self.level,
            "points": len(self.cloud),
            "level_counts": level_counts,
            "total_cuboids": sum(level_counts),
            "occupied_leaves": len(self.cells),
            "surface": surface,
            "above": above,
            "gap": gap,
            "cells": self.cells.tolist(),
        }


def _terraced_cells(n: int, rng: np.random.Generator) -> set[tuple[int, int, int]]:
    cells = set()
    step = max(1, n // 8)
    for i in range(n):
        for j in range(n):
            top = min(n - 1, ((i + j) // 2 // step) * step)
            if i == j == n - 1:
                top = n - 1
            for k in range(max(0, top - 1), top + 1):
                cells.add((i, j, k))
    cells.add((0, 0, 0))
    return cells


def _canopy_cells(n: int, rng: np.random.Generator) -> set[tuple[int, int, int]]:
    cells = {(i, j, 0) for i in range(n) for j in range(n)}
    c = (n - 1) / 2
    radius = n / 4
    lo, hi = max(2, n // 2), max(2, 3 * n // 4)
    for i in range(n):
        for j in range(n):
            if (i - c) ** 2 + (j - c) ** 2 <= radius ** 2:
                cells.update((i, j, k) for k in range(lo, hi + 1))
    # a mast in the far corner reaches the top of the box
    cells.update((n - 1, n - 1, k) for k in range(n))
    return cells


def _noise_cells(n: int, rng: np.random.Generator) -> set[tuple[int, int, int]]:
    cells = _terraced_cells(n, rng)
    count = max(1, n * n // 4)
    stray = rng.integers(0, n, size=(count, 3))
    cells.update(map(tuple, stray.tolist()))
    return cells


def _trace_cells(n: int, rng: np.random.Generator) -> set[tuple[int, int, int]]:
    if n < 16:
        raise ValueError("trace fixture needs level >= 4")
    cells = {(0, 0, k) for k in (0, 1, 2, 5, 6, 9)}
    cells.update((n - 1, n - 1, k) for k in range(n))
    return cells


KINDS: dict[str, Callable[[int, np.random.Generator], set]] = {
    "terraced": _terraced_cells,
    "canopy": _canopy_cells,
    "noise": _noise_cells,
    "trace": _trace_cells,
}


def generate(kind: str, level: int = 5, points: int = 20000, seed: int = 0,
             origin: tuple[float, float, float] = DEFAULT_ORIGIN,
             span: tuple[float, float, float] = DEFAULT_SPAN,
             color: bool = True) -> Fixture:
    """Build a fixture cloud of ``points`` points (two of them anchors)."""
    if kind not in KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}; choose from {sorted(KINDS)}")
    rng = np.random.default_rng(seed)
    n = 2 ** level
    cells = np.array(sorted(KINDS[kind](n, rng)), dtype=np.int64).reshape(-1, 3)
    if points < len(cells) + 2:
        raise ValueError(f"{kind} at level {level} needs at least {len(cells) + 2} points")

    owner = np.concatenate([np.arange(len(cells)),
                            rng.integers(0, len(cells), size=points - 2 - len(cells))])
    frac = rng.uniform(EDGE_MARGIN, 1 - EDGE_MARGIN, size=(len(owner), 3))
    cell_size = np.asarray(span, dtype=np.float64) / n
    coords = np.asarray(origin) + (cells[owner] + frac) * cell_size
    anchors = np.array([origin, np.asarray(origin) + np.asarray(span)])
    coords = np.vstack([anchors[:1], coords, anchors[1:]])

    colors = None
    if color:
        # earthy tones low in the column, greener higher up
        height = (coords[:, 2] - origin[2]) / span[2]
        colors = np.column_stack([0.55 - 0.35 * height, 0.4 + 0.4 * height,
                                  np.full(len(coords), 0.2)])
        colors = np.clip(colors + rng.normal(0, 0.03, colors.shape), 0, 1)
    return Fixture(kind, level, PointCloud(coords, colors, AxisOrder.GEO_YXZ), cells)
