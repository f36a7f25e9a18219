"""Point cloud containers and ASCII OBJ / PLY input-output.

Coordinates are held internally in geographic order: column 0 is ``y``
(northing), column 1 is ``x`` (easting), column 2 is ``z`` (elevation).
The axis order of a source file only matters when reading or writing OBJ.
"""

from __future__ import annotations

import enum
import io
import math
import os
import re
import warnings
from dataclasses import dataclass
from typing import IO, Iterator, Sequence

import numpy as np

from .errors import EmptyCloudError, ParseError

#: RGB (0-255) defaults used when exporting classified cells.
DEFAULT_CLASS_COLORS: dict[str, tuple[int, int, int]] = {
    "surface": (0, 255, 0),
    "above": (255, 0, 0),
    "gap": (0, 0, 255),
}

#: PLY color for points that carry no RGB.
DEFAULT_POINT_COLOR = (255, 255, 255)

COORD_DECIMALS = 6


class AxisOrder(str, enum.Enum):
    """Order in which a file lists the two horizontal coordinates."""

    GEO_YXZ = "geo_yxz"
    XYZ = "xyz"

    @classmethod
    def coerce(cls, value: str | AxisOrder) -> AxisOrder:
        if isinstance(value, cls):
            return value
        aliases = {"yxz": cls.GEO_YXZ, "geo_yxz": cls.GEO_YXZ, "xyz": cls.XYZ}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown axis order {value!r}") from None


@dataclass(frozen=True)
class GeoPoint:
    """One georeferenced vertex. ``color`` channels are in [0, 1]."""

    y: float
    x: float
    z: float
    color: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.y, self.x, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")
        if self.color is not None:
            if len(self.color) != 3 or not all(0.0 <= c <= 1.0 for c in self.color):
                raise ValueError(f"color channels must lie in [0, 1]: {self.color!r}")


@dataclass
class PointCloud:
    """Array-backed point cloud.

    ``coords`` is an ``(N, 3)`` float64 array in ``(y, x, z)`` order.
    ``colors`` is ``None`` or an ``(N, 3)`` array with channels in [0, 1];
    a row of NaN marks a point without color.
    """

    coords: np.ndarray
    colors: np.ndarray | None = None
    axis_convention: AxisOrder = AxisOrder.GEO_YXZ

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 3)
        if self.colors is not None:
            self.colors = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
            if len(self.colors) != len(self.coords):
                raise ValueError("colors and coords differ in length")
        self.axis_convention = AxisOrder.coerce(self.axis_convention)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, n: int) -> GeoPoint:
        y, x, z = (float(v) for v in self.coords[n])
        color = None
        if self.colors is not None and not np.isnan(self.colors[n]).any():
            color = tuple(float(c) for c in self.colors[n])
        return GeoPoint(y, x, z, color)

    def __iter__(self) -> Iterator[GeoPoint]:
        for n in range(len(self)):
            yield self[n]

    @classmethod
    def from_points(cls, points: Sequence[GeoPoint],
                    axis_convention: AxisOrder | str = AxisOrder.GEO_YXZ) -> PointCloud:
        coords = np.array([(p.y, p.x, p.z) for p in points], dtype=np.float64).reshape(-1, 3)
        colors = None
        if any(p.color is not None for p in points):
            colors = np.array([p.color if p.color is not None else (np.nan,) * 3
                               for p in points], dtype=np.float64)
        return cls(coords, colors, axis_convention)

    @property
    def has_color(self) -> np.ndarray:
        """Boolean mask of points carrying a color."""
        if self.colors is None:
            return np.zeros(len(self), dtype=bool)
        return ~np.isnan(self.colors).any(axis=1)


# ---------------------------------------------------------------------------
# OBJ

_VERTEX_RE = re.compile(r"^[ \t]*v[ \t]+([^\r\n]*)\r?$", re.MULTILINE)


def _read_text(stream: IO | str | bytes) -> str:
    data = stream if isinstance(stream, (str, bytes)) else stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    return data


def _check_vertex_line(line: str, lineno: int) -> None:
    """Raise ParseError if ``line`` (a ``v`` record) is malformed."""
    fields = line.split()[1:]
    if len(fields) < 3:
        raise ParseError(f"vertex needs at least 3 coordinates, got {len(fields)}", lineno)
    if len(fields) not in (3, 4, 6):
        raise ParseError(f"unsupported vertex field count {len(fields)}", lineno)
    try:
        values = [float(f) for f in fields]
    except ValueError:
        raise ParseError(f"non-numeric vertex field in {line.strip()!r}", lineno) from None
    if not all(math.isfinite(v) for v in values):
        raise ParseError("non-finite vertex value", lineno)
    if len(values) == 6 and not all(0.0 <= c <= 1.0 for c in values[3:]):
        raise ParseError("vertex color channel outside [0, 1]", lineno)


def _locate_bad_vertex(text: str) -> None:
    for lineno, line in enumerate(text.splitlines(), 1):
        if _VERTEX_RE.match(line):
            _check_vertex_line(line, lineno)


def _vertex_values(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Vertex fields as a float array padded with NaN, plus per-line widths."""
    bodies = _VERTEX_RE.findall(text)
    if not bodies:
        raise EmptyCloudError("no vertex records found")
    fields = [b.split() for b in bodies]
    widths = np.fromiter(map(len, fields), dtype=np.int64, count=len(fields))
    if not np.isin(widths, (3, 4, 6)).all():
        _locate_bad_vertex(text)
    try:
        if (widths == widths[0]).all():
            return np.array(fields, dtype=np.float64), widths
        values = np.full((len(fields), 6), np.nan)
        for w in (3, 4, 6):
            sel = np.flatnonzero(widths == w)
            if len(sel):
                values[sel, :w] = np.array([fields[i] for i in sel], dtype=np.float64)
        return values, widths
    except ValueError:
        _locate_bad_vertex(text)
        raise  # pragma: no cover - the scan above always finds the culprit


def _vertex_values_fast(text: str) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Bulk path for files whose vertex lines are ``v`` plus single-space fields.

    Returns ``(None, None)`` whenever the file needs the line-by-line path.
    """
    lines = text.split("\n")
    if any(l[:1] in (" ", "\t") or l.startswith("v\t") for l in lines):
        return None, None
    bodies = [l[2:] for l in lines if l.startswith("v ")]
    if not bodies:
        return None, None
    widths = np.fromiter((b.count(" ") + 1 for b in bodies), dtype=np.int64, count=len(bodies))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            flat = np.fromstring("\n".join(bodies), sep=" ")
        except (ValueError, DeprecationWarning):
            return None, None
    # extra whitespace inflates the width estimate, so equal totals mean exact widths
    if len(flat) != widths.sum() or not np.isin(widths, (3, 4, 6)).all():
        return None, None
    if (widths == widths[0]).all():
        return flat.reshape(len(bodies), widths[0]), widths
    values = np.full((len(bodies), 6), np.nan)
    ends = np.cumsum(widths)
    for w in (3, 4, 6):
        sel = np.flatnonzero(widths == w)
        if len(sel):
            cols = (ends[sel] - w)[:, None] + np.arange(w)
            values[sel, :w] = flat[cols]
    return values, widths


def parse_obj(stream: IO | str | bytes,
              axis_order: AxisOrder | str = AxisOrder.GEO_YXZ) -> PointCloud:
    """Read the vertex records of a Wavefront OBJ stream.

    Only ``v`` lines are used; faces, normals, texture coordinates and
    comments are skipped. A vertex line carries 3 coordinates, optionally
    a homogeneous weight (ignored) or an RGB triple in [0, 1].

    Args:
        stream: binary or text file object, or the file contents.
        axis_order: ``geo_yxz`` if the file lists northing first.

    Raises:
        ParseError: malformed vertex line (message carries the line number).
        EmptyCloudError: no vertex lines at all.
    """
    axis_order = AxisOrder.coerce(axis_order)
    text = _read_text(stream)
    values, widths = _vertex_values_fast(text)
    if values is None:
        values, widths = _vertex_values(text)

    coords = values[:, :3]
    colors = None
    if values.shape[1] == 6:
        colors = values[:, 3:6].copy()
        colors[widths != 6] = np.nan
    if not np.isfinite(coords).all():
        _locate_bad_vertex(text)
    if colors is not None:
        present = ~np.isnan(colors).any(axis=1)
        if ((colors[present] < 0) | (colors[present] > 1)).any():
            _locate_bad_vertex(text)
        if not present.any():
            colors = None

    if axis_order is AxisOrder.XYZ:
        coords = coords[:, [1, 0, 2]]
    return PointCloud(np.ascontiguousarray(coords), colors, axis_order)


def read_obj(path: str | os.PathLike,
             axis_order: AxisOrder | str = AxisOrder.GEO_YXZ) -> PointCloud:
    with open(path, "rb") as fh:
        try:
            return parse_obj(fh, axis_order)
        except ParseError as exc:
            exc.path = str(path)
            raise


def _format_rows(values: np.ndarray, decimals: int) -> list[str]:
    fmt = " ".join([f"%.{decimals}f"] * values.shape[1])
    return [fmt % tuple(row) for row in values.tolist()]


def _obj_lines(cloud: PointCloud, axis_order: AxisOrder) -> list[str]:
    coords = cloud.coords
    if axis_order is AxisOrder.XYZ:
        coords = coords[:, [1, 0, 2]]
    mask = cloud.has_color
    if not mask.any():
        return ["v " + s for s in _format_rows(coords, COORD_DECIMALS)]
    if mask.all():
        rows = np.hstack([coords, cloud.colors])
        return ["v " + s for s in _format_rows(rows, COORD_DECIMALS)]
    lines = []
    for c, col, has in zip(_format_rows(coords, COORD_DECIMALS),
                           cloud.colors.tolist(), mask.tolist()):
        if has:
            c += " %.6f %.6f %.6f" % tuple(col)
        lines.append("v " + c)
    return lines


def write_obj(cloud: PointCloud, path: str | os.PathLike,
              axis_order: AxisOrder | str | None = None,
              faces: Sequence[Sequence[int]] | None = None) -> None:
    """Write ``cloud`` as OBJ vertex records with six decimal places.

    ``axis_order`` defaults to the cloud's own convention. ``faces`` holds
    optional 1-based vertex index lists, written as ``f`` records.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("refusing to write an empty point cloud")
    order = AxisOrder.coerce(axis_order) if axis_order is not None else cloud.axis_convention
    lines = _obj_lines(cloud, order)
    if faces:
        lines.extend("f " + " ".join(str(i) for i in f) for f in faces)
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str | os.PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# PLY

def write_ply(cloud: PointCloud, path: str | os.PathLike,
              default_color: tuple[int, int, int] = DEFAULT_POINT_COLOR) -> None:
    """Write ``cloud`` as ASCII PLY with float x/y/z and uchar RGB.

    PLY names axes explicitly, so ``x`` is easting and ``y`` is northing
    regardless of the cloud's source axis order. Points without color get
    ``default_color``. Classified cells are exported by first turning them
    into a cloud with :meth:`pcoctree.classifier.ClassifiedGrid.to_cloud`.
    """
    n = len(cloud)
    if n == 0:
        raise EmptyCloudError("refusing to write an empty point cloud")
    rgb = np.tile(np.asarray(default_color, dtype=np.int64), (n, 1))
    mask = cloud.has_color
    if mask.any():
        rgb[mask] = np.rint(cloud.colors[mask] * 255).astype(np.int64)
    xyz = cloud.coords[:, [1, 0, 2]]
    fmt = f"%.{COORD_DECIMALS}f %.{COORD_DECIMALS}f %.{COORD_DECIMALS}f %d %d %d"
    body = [fmt % (a, b, c, r, g, bl)
            for (a, b, c), (r, g, bl) in zip(xyz.tolist(), rgb.tolist())]
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {n}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ]
    _write_text(path, "\n".join(header + body) + "\n")


def parse_ply(stream: IO | str | bytes) -> PointCloud:
    """Read the vertex element of an ASCII PLY stream.

    Extra vertex properties and any further elements are ignored. Color
    properties stored as ``uchar`` are scaled to [0, 1].
    """
    lines = io.StringIO(_read_text(stream))
    if lines.readline().strip() != "ply":
        raise ParseError("missing 'ply' magic", 1)
    elements: list[tuple[str, int, list[tuple[str, str]]]] = []
    lineno = 1
    for raw in lines:
        lineno += 1
        parts = raw.split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        if parts[0] == "format":
            if parts[1:2] != ["ascii"]:
                raise ParseError(f"only ASCII PLY is supported, got {parts[1:]}", lineno)
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before element", lineno)
            if parts[1] == "list":
                elements[-1][2].append((parts[-1], "list"))
            else:
                elements[-1][2].append((parts[2], parts[1]))
        elif parts[0] == "end_header":
            break
        else:
            raise ParseError(f"unexpected header line {raw.strip()!r}", lineno)
    else:
        raise ParseError("missing end_header")

    body = lines.read().splitlines()
    offset = 0
    for name, count, props in elements:
        if name != "vertex":
            offset += count
            continue
        if count == 0:
            raise EmptyCloudError("PLY vertex element is empty")
        rows = [r.split() for r in body[offset:offset + count]]
        if len(rows) < count:
            raise ParseError(f"expected {count} vertices, found {len(rows)}")
        names = [p[0] for p in props]
        try:
            cols = [names.index(a) for a in ("x", "y", "z")]
        except ValueError:
            raise ParseError("vertex element lacks x/y/z") from None
        try:
            data = np.array([r[:len(names)] for r in rows], dtype=np.float64)
        except ValueError:
            for n, r in enumerate(rows):
                if len(r) < len(names) or not all(_is_number(v) for v in r[:len(names)]):
                    raise ParseError(f"malformed vertex row {' '.join(r)!r}",
                                     lineno + offset + n + 1) from None
            raise
        coords = data[:, [cols[1], cols[0], cols[2]]]
        colors = None
        if all(c in names for c in ("red", "green", "blue")):
            idx = [names.index(c) for c in ("red", "green", "blue")]
            colors = data[:, idx]
            if props[idx[0]][1] in ("uchar", "uint8"):
                colors = colors / 255.0
        return PointCloud(coords, colors, AxisOrder.GEO_YXZ)
    raise EmptyCloudError("PLY has no vertex element")


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_ply(path: str | os.PathLike) -> PointCloud:
    with open(path, "rb") as fh:
        try:
            return parse_ply(fh)
        except ParseError as exc:
            exc.path = str(path)
            raise
