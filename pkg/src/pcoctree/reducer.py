"""Size reduction: merge the points sharing a max-level cuboid into one."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyCloudError
from .grid import CuboidAddress, OccupancyOctree, occupied_leaves
from .point_io import AxisOrder, PointCloud


@dataclass(frozen=True)
class MergedPoint:
    position: tuple[float, float, float]  # (y, x, z)
    color: tuple[float, float, float] | None
    multiplicity: int
    cell: CuboidAddress


def reduce(cloud: PointCloud, tree: OccupancyOctree) -> list[MergedPoint]:
    """One representative per occupied leaf of ``tree``.

    The representative sits at the unweighted centroid of its members,
    clipped to their coordinate range so rounding cannot push it out of
    the cell. Its color averages the members that have one. Members are
    summed in ascending index order.
    """
    if tree.n_points != len(cloud):
        raise ValueError(f"octree built over {tree.n_points} points, cloud has {len(cloud)}")
    leaves = occupied_leaves(tree)
    cells = list(leaves)
    members = list(leaves.values())
    sizes = np.array([len(m) for m in members], dtype=np.int64)
    order = np.concatenate(members)
    if len(order) and (order.min() < 0 or order.max() >= len(cloud)):
        raise ValueError("octree references point indices outside the cloud")
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])

    pts = cloud.coords[order]
    centroid = np.add.reduceat(pts, starts, axis=0) / sizes[:, None]
    centroid = np.clip(centroid, np.minimum.reduceat(pts, starts, axis=0),
                       np.maximum.reduceat(pts, starts, axis=0))

    mean_color = None
    if cloud.colors is not None:
        cols = cloud.colors[order]
        has = ~np.isnan(cols).any(axis=1)
        n_col = np.add.reduceat(has.astype(np.int64), starts)
        sums = np.add.reduceat(np.where(has[:, None], cols, 0.0), starts, axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_color = np.clip(sums / n_col[:, None], 0.0, 1.0)
        mean_color[n_col == 0] = np.nan

    out = []
    for n, cell in enumerate(cells):
        color = None
        if mean_color is not None and not np.isnan(mean_color[n, 0]):
            color = tuple(mean_color[n].tolist())
        out.append(MergedPoint(tuple(centroid[n].tolist()), color, int(sizes[n]), cell))
    return out


def merged_cloud(merged: Sequence[MergedPoint],
                 axis_convention: AxisOrder | str = AxisOrder.GEO_YXZ) -> PointCloud:
    """Pack merged points back into a :class:`PointCloud` for export."""
    coords = np.array([m.position for m in merged], dtype=np.float64).reshape(-1, 3)
    colors = None
    if any(m.color is not None for m in merged):
        colors = np.array([m.color if m.color is not None else (np.nan,) * 3
                           for m in merged], dtype=np.float64)
    return PointCloud(coords, colors, axis_convention)


def reduction_ratio(cloud: PointCloud, merged: Sequence[MergedPoint]) -> float:
    if len(cloud) == 0:
        raise EmptyCloudError("reduction ratio of an empty cloud is undefined")
    return len(merged) / len(cloud)
