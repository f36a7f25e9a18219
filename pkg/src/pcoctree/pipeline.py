"""End-to-end run: ingest, normalize, octree, classify, reduce."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import classifier, grid, reducer
from .point_io import AxisOrder, PointCloud, read_obj, read_ply
from .report import RunReport, build_report


@dataclass
class PipelineResult:
    cloud: PointCloud
    bbox: grid.BoundingBox
    tree: grid.OccupancyOctree
    stats: grid.LevelStats
    leaves: dict[grid.CuboidAddress, np.ndarray]
    classified: classifier.ClassifiedGrid
    merged: list[reducer.MergedPoint] | None
    normalization_fallback: bool
    timings: dict[str, float] = field(default_factory=dict)

    def report(self) -> RunReport:
        return build_report(self.stats, self.classified, self.merged, self.timings,
                            input_points=len(self.cloud),
                            normalization_fallback=self.normalization_fallback)


def load_cloud(path: str | os.PathLike, axis_order: AxisOrder | str = AxisOrder.GEO_YXZ) -> PointCloud:
    if str(path).lower().endswith(".ply"):
        return read_ply(path)
    return read_obj(path, axis_order)


def run_pipeline(source: PointCloud | str | os.PathLike, level: int = 5, *,
                 axis_order: AxisOrder | str = AxisOrder.GEO_YXZ,
                 normalize: bool = True, reduce: bool = False,
                 max_level: int = grid.MAX_LEVEL) -> PipelineResult:
    grid.check_level(level, max_level)
    timings: dict[str, float] = {}

    t = time.perf_counter()
    cloud = source if isinstance(source, PointCloud) else load_cloud(source, axis_order)
    timings["parse"] = time.perf_counter() - t

    fallback = False
    if normalize:
        t = time.perf_counter()
        cloud, fallback = grid.normalize(cloud)
        timings["normalize"] = time.perf_counter() - t

    t = time.perf_counter()
    bbox = grid.compute_bbox(cloud)
    tree = grid.build_octree(cloud, level, bbox, max_level=max_level)
    leaves = grid.occupied_leaves(tree)
    stats = grid.level_stats(tree)
    timings["build"] = time.perf_counter() - t

    t = time.perf_counter()
    classified = classifier.classify_full(classifier.columnize(leaves))
    timings["classify"] = time.perf_counter() - t

    merged = None
    if reduce:
        t = time.perf_counter()
        merged = reducer.reduce(cloud, tree)
        timings["reduce"] = time.perf_counter() - t

    return PipelineResult(cloud, bbox, tree, stats, leaves, classified, merged,
                          fallback, timings)
