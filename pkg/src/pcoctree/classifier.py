"""Per-column classification of occupied leaf cuboids.

Leaves sharing an ``(i, j)`` footprint form a column scanned bottom-up
along ``k``. Two cuboids whose ``k`` indices differ by one share a face
and count as touching; any larger difference is a gap.

* surface: the touching run that starts at the lowest occupied cuboid,
* above: every occupied cuboid past the first gap,
* gap: the empty cuboids between consecutive occupied ones past that point.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .grid import BoundingBox, CuboidAddress
from .point_io import DEFAULT_CLASS_COLORS, PointCloud


class CellClass(str, enum.Enum):
    SURFACE = "surface"
    ABOVE = "above"
    GAP = "gap"


@dataclass(frozen=True)
class Column:
    level: int
    key: tuple[int, int]
    occupied_k: tuple[int, ...]

    def __post_init__(self):
        ks = self.occupied_k
        if not ks:
            raise ValueError(f"column {self.key} is empty")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError(f"column {self.key} z-indices not strictly increasing: {ks}")

    def address(self, k: int) -> CuboidAddress:
        return CuboidAddress(self.level, self.key[0], self.key[1], k)


@dataclass
class ClassifiedGrid:
    """Class of every labelled max-level cuboid.

    ``gap_bounds`` records, for each gap cell, the ``(k_below, k_above)``
    pair of occupied cells that enclose it.
    """

    level: int
    classes: dict[CuboidAddress, CellClass] = field(default_factory=dict)
    gap_bounds: dict[CuboidAddress, tuple[int, int]] = field(default_factory=dict)

    def cells(self, cls: CellClass) -> list[CuboidAddress]:
        return [a for a, c in self.classes.items() if c is cls]

    def counts(self) -> dict[CellClass, int]:
        out = dict.fromkeys(CellClass, 0)
        for c in self.classes.values():
            out[c] += 1
        return out

    @property
    def surface(self) -> set[CuboidAddress]:
        return set(self.cells(CellClass.SURFACE))

    def to_cloud(self, bbox: BoundingBox,
                 color_map: Mapping[str, tuple[int, int, int]] | None = None) -> PointCloud:
        """Cell centers colored by class, ready for :func:`~pcoctree.point_io.write_ply`."""
        color_map = {**DEFAULT_CLASS_COLORS, **(color_map or {})}
        addresses = list(self.classes)
        if not addresses:
            return PointCloud(np.empty((0, 3)))
        idx = np.array([a[1:] for a in addresses], dtype=np.int64)
        centers = bbox.cell_centers(self.level, idx)
        colors = np.array([color_map[self.classes[a].value] for a in addresses],
                          dtype=np.float64) / 255.0
        return PointCloud(centers, colors)


def columnize(leaves: Iterable[CuboidAddress]) -> list[Column]:
    """Group leaf addresses into columns sorted by ``(i, j)``."""
    groups: dict[tuple[int, int], list[int]] = defaultdict(list)
    level = None
    for a in leaves:
        if level is None:
            level = a.level
        elif a.level != level:
            raise ValueError(f"mixed levels in leaf set: {level} and {a.level}")
        groups[(a.i, a.j)].append(a.k)
    return [Column(level, key, tuple(sorted(groups[key]))) for key in sorted(groups)]


def surface_run(ks: Sequence[int]) -> list[int]:
    """Walk consecutive pairs bottom-up, marking the lower one, until a gap."""
    if len(ks) == 1:
        return [ks[0]]
    marked = []
    for a, b in zip(ks, ks[1:]):
        marked.append(a)
        if b - a > 1:
            break
    else:
        # no gap anywhere: the top cuboid belongs to the run too
        marked.append(ks[-1])
    return marked


def classify_column(ks: Sequence[int]) -> tuple[list[int], list[int], list[tuple[int, int, int]]]:
    """Split one column into surface, above and gap indices.

    Gap entries are ``(k, k_below, k_above)`` with the enclosing occupied pair.
    """
    above: list[int] = []
    gaps: list[tuple[int, int, int]] = []
    past_gap = False
    for a, b in zip(ks, ks[1:]):
        if b - a > 1:
            past_gap = True
            gaps.extend((k, a, b) for k in range(a + 1, b))
        if past_gap:
            above.append(b)
    n_surface = len(ks) - len(above)
    # a gap always closes the surface run, so none can sit between two surface cells
    assert all(lo >= ks[n_surface - 1] for _, lo, _ in gaps)
    return list(ks[:n_surface]), above, gaps


def classify_surface(columns: Iterable[Column]) -> ClassifiedGrid:
    """Mark only the surface run of each column."""
    grid = None
    for col in columns:
        if grid is None:
            grid = ClassifiedGrid(col.level)
        for k in surface_run(col.occupied_k):
            grid.classes[col.address(k)] = CellClass.SURFACE
    return grid if grid is not None else ClassifiedGrid(0)


def classify_full(columns: Iterable[Column]) -> ClassifiedGrid:
    """Label occupied cells surface or above and fill the gaps between them.

    Every column is visited once and work is bounded by its ``k`` span.
    """
    grid = None
    for col in columns:
        if grid is None:
            grid = ClassifiedGrid(col.level)
        surface, above, gaps = classify_column(col.occupied_k)
        for k in surface:
            grid.classes[col.address(k)] = CellClass.SURFACE
        for k in above:
            grid.classes[col.address(k)] = CellClass.ABOVE
        for k, lo, hi in gaps:
            addr = col.address(k)
            grid.classes[addr] = CellClass.GAP
            grid.gap_bounds[addr] = (lo, hi)
    if grid is None:
        return ClassifiedGrid(0)
    grid.classes = dict(sorted(grid.classes.items()))
    return grid


def agreement_check(surface_grid: ClassifiedGrid, full_grid: ClassifiedGrid) -> bool:
    """True when both grids mark exactly the same surface cells."""
    return surface_grid.surface == full_grid.surface
