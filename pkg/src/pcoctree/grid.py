"""Bounding cuboid, coordinate normalization and the occupancy octree.

A cuboid at level ``l`` splits every edge of the root box into ``2**l``
equal parts, so its address is ``(l, i, j, k)`` with indices along
``y``, ``x`` and ``z``. Cells are half-open ``[lo, hi)``; points on the
maximum face of the root box go to the last cell of that axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import EmptyCloudError, LevelError
from .point_io import GeoPoint, PointCloud

#: Default upper bound on octree depth; memory grows as 8**level.
MAX_LEVEL = 10

NORMALIZE_KEEP_DIGITS = 3
NORMALIZE_SCALE = 1e4


class CuboidAddress(NamedTuple):
    level: int
    i: int
    j: int
    k: int

    def parent(self) -> CuboidAddress:
        if self.level == 0:
            raise ValueError("root cuboid has no parent")
        return CuboidAddress(self.level - 1, self.i >> 1, self.j >> 1, self.k >> 1)


@dataclass(frozen=True)
class BoundingBox:
    y_min: float
    y_max: float
    x_min: float
    x_max: float
    z_min: float
    z_max: float

    def __post_init__(self):
        for lo, hi in zip(self.mins, self.maxs):
            if not lo <= hi:
                raise ValueError(f"bounding box has min > max: {self}")

    @property
    def mins(self) -> np.ndarray:
        return np.array([self.y_min, self.x_min, self.z_min])

    @property
    def maxs(self) -> np.ndarray:
        return np.array([self.y_max, self.x_max, self.z_max])

    @property
    def extent(self) -> np.ndarray:
        return self.maxs - self.mins

    def cell_size(self, level: int) -> np.ndarray:
        return self.extent / 2 ** level

    def contains(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        return ((coords >= self.mins) & (coords <= self.maxs)).all(axis=1)

    def cell_bounds(self, address: CuboidAddress) -> tuple[np.ndarray, np.ndarray]:
        """Closed extent ``(lo, hi)`` of the cuboid at ``address``."""
        idx = np.array(address[1:], dtype=np.float64)
        s = self.cell_size(address.level)
        return self.mins + idx * s, self.mins + (idx + 1) * s

    def cell_centers(self, level: int, indices: np.ndarray) -> np.ndarray:
        """Centers of the level-``level`` cells given as an ``(M, 3)`` index array."""
        indices = np.asarray(indices, dtype=np.float64).reshape(-1, 3)
        return self.mins + (indices + 0.5) * self.cell_size(level)


def compute_bbox(cloud: PointCloud) -> BoundingBox:
    """Exact per-axis min/max over all points."""
    if len(cloud) == 0:
        raise EmptyCloudError("cannot bound an empty point cloud")
    lo = cloud.coords.min(axis=0)
    hi = cloud.coords.max(axis=0)
    return BoundingBox(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]),
                       float(lo[2]), float(hi[2]))


def normalize(cloud: PointCloud) -> tuple[PointCloud, bool]:
    """Shift and scale the horizontal coordinates into a small local frame.

    For ``y`` and ``x`` the digits down to the third decimal place are
    dropped and the remainder is multiplied by ``10**4``, so the fourth
    decimal becomes the units digit: ``v' = (v - floor(v*1e3)/1e3) * 1e4``.
    ``z`` is left alone.

    If the points of an axis do not share the same truncated prefix the
    mapping would wrap around; that axis falls back to
    ``v' = (v - min(v)) * 1e4``. Both branches subtract one constant per
    axis, so cell addresses are preserved.

    Returns:
        The normalized cloud and whether any axis used the fallback.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("cannot normalize an empty point cloud")
    coords = cloud.coords.copy()
    unit = 10.0 ** NORMALIZE_KEEP_DIGITS
    fallback = False
    for axis in (0, 1):
        v = coords[:, axis]
        prefix = np.floor(v * unit)
        if prefix.min() != prefix.max():
            offset = v.min()
            fallback = True
        else:
            offset = prefix[0] / unit
        coords[:, axis] = (v - offset) * NORMALIZE_SCALE
    colors = None if cloud.colors is None else cloud.colors.copy()
    return PointCloud(coords, colors, cloud.axis_convention), fallback


def check_level(level: int, max_level: int = MAX_LEVEL) -> int:
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise LevelError(f"level must be an integer, got {level!r}")
    if not 0 <= level <= max_level:
        raise LevelError(f"level {level} outside [0, {max_level}]")
    return int(level)


def _scaled(coords: np.ndarray, bbox: BoundingBox, level: int) -> np.ndarray:
    """Coordinates in units of level-``level`` cells, measured from the box minimum."""
    ext = bbox.extent
    s = ext / 2 ** level
    d = coords - bbox.mins
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(ext > 0, d / np.where(ext > 0, s, 1.0), 0.0)
    return q


def cell_indices(coords: np.ndarray, bbox: BoundingBox, level: int) -> np.ndarray:
    """Vectorized :func:`cell_address`; returns an ``(N, 3)`` int64 index array."""
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
    if not bbox.contains(coords).all():
        raise ValueError("point outside bounding box")
    q = _scaled(coords, bbox, level)
    return np.minimum(np.floor(q).astype(np.int64), 2 ** level - 1)


def cell_address(p: GeoPoint, bbox: BoundingBox, level: int) -> CuboidAddress:
    """Address of the level-``level`` cuboid containing ``p``.

    ``idx = min(floor((v - v_min) / s), 2**level - 1)`` per axis with
    ``s = (v_max - v_min) / 2**level``; an axis of zero extent gets index 0.
    """
    last = 2 ** level - 1
    out = []
    for v, lo, hi in ((p.y, bbox.y_min, bbox.y_max), (p.x, bbox.x_min, bbox.x_max),
                      (p.z, bbox.z_min, bbox.z_max)):
        if not lo <= v <= hi:
            raise ValueError(f"point {p} outside bounding box")
        ext = hi - lo
        if ext == 0:
            out.append(0)
            continue
        out.append(min(math.floor((v - lo) / (ext / 2 ** level)), last))
    return CuboidAddress(level, *out)


@dataclass(eq=False)
class OctreeNode:
    """An occupied cuboid. Empty children are not stored."""

    address: CuboidAddress
    children: list[OctreeNode] = field(default_factory=list)
    indices: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(eq=False)
class OccupancyOctree:
    bbox: BoundingBox
    max_level: int
    root: OctreeNode
    n_points: int

    def nodes(self) -> Iterator[OctreeNode]:
        """Depth-first walk over occupied nodes, children in octant order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def build_octree(cloud: PointCloud, lev: int, bbox: BoundingBox | None = None,
                 max_level: int = MAX_LEVEL) -> OccupancyOctree:
    """Recursively split occupied cuboids into 8 children down to depth ``lev``.

    The root box is ``compute_bbox(cloud)`` unless ``bbox`` is given (it
    must contain every point). A node is split only when it holds at least
    one point; leaves at depth ``lev`` keep their point indices in
    ascending order.
    """
    lev = check_level(lev, max_level)
    if len(cloud) == 0:
        raise EmptyCloudError("cannot build an octree over an empty cloud")
    if bbox is None:
        bbox = compute_bbox(cloud)
    elif not bbox.contains(cloud.coords).all():
        raise ValueError("bounding box does not contain every point")

    # Descend in leaf-cell units: the node at level l with index i spans
    # [i * 2**(lev-l), (i+1) * 2**(lev-l)) and splits at its integer midpoint.
    q = _scaled(cloud.coords, bbox, lev)
    root = OctreeNode(CuboidAddress(0, 0, 0, 0))
    stack = [(root, np.arange(len(cloud), dtype=np.int64))]
    while stack:
        node, idx = stack.pop()
        level, i, j, k = node.address
        if level == lev:
            node.indices = idx
            continue
        half = 2 ** (lev - level - 1)
        mid = np.array([(2 * i + 1) * half, (2 * j + 1) * half, (2 * k + 1) * half],
                       dtype=np.float64)
        upper = q[idx] >= mid
        octant = (upper[:, 0].astype(np.int8) << 2) | (upper[:, 1].astype(np.int8) << 1) \
            | upper[:, 2].astype(np.int8)
        order = np.argsort(octant, kind="stable")
        counts = np.bincount(octant, minlength=8)
        start = 0
        for o in range(8):
            n = counts[o]
            if n == 0:
                continue
            child = OctreeNode(CuboidAddress(level + 1, 2 * i + (o >> 2),
                                             2 * j + ((o >> 1) & 1), 2 * k + (o & 1)))
            node.children.append(child)
            stack.append((child, idx[order[start:start + n]]))
            start += n
    return OccupancyOctree(bbox, lev, root, len(cloud))


def occupied_leaves(tree: OccupancyOctree) -> dict[CuboidAddress, np.ndarray]:
    """Max-depth cuboids holding points, keyed by address in ``(i, j, k)`` order."""
    leaves = [(n.address, n.indices) for n in tree.nodes()
              if n.address.level == tree.max_level]
    leaves.sort(key=lambda item: item[0])
    return dict(leaves)


@dataclass(frozen=True)
class LevelStats:
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def occupied_leaves(self) -> int:
        return self.counts[-1]

    @property
    def max_level(self) -> int:
        return len(self.counts) - 1


def level_stats(tree: OccupancyOctree) -> LevelStats:
    """Number of occupied cuboids on each level ``0..max_level``."""
    counts = [0] * (tree.max_level + 1)
    for node in tree.nodes():
        counts[node.address.level] += 1
    return LevelStats(tuple(counts))
