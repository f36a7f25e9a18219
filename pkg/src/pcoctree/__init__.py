"""Occupancy octrees over georeferenced point clouds.

Builds a cuboid octree over a cloud, classifies the occupied max-depth
cuboids of every vertical column as surface, above or gap, and merges
points sharing a cuboid to shrink the cloud.
"""

from .classifier import (CellClass, ClassifiedGrid, Column, agreement_check,
                         classify_full, classify_surface, columnize)
from .errors import EmptyCloudError, IntegrityError, LevelError, ParseError
from .grid import (BoundingBox, CuboidAddress, LevelStats, OccupancyOctree, build_octree,
                   cell_address, cell_indices, compute_bbox, level_stats, normalize,
                   occupied_leaves)
from .pipeline import run_pipeline
from .point_io import (AxisOrder, GeoPoint, PointCloud, parse_obj, parse_ply, read_obj,
                       read_ply, write_obj, write_ply)
from .reducer import MergedPoint, merged_cloud, reduce, reduction_ratio
from .report import RunReport, build_report, parse_report, render_report

__version__ = "0.1.0"
