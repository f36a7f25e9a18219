"""Command-line front end.

    pcoctree stats    --input cloud.obj [--level 5]
    pcoctree classify --input cloud.obj --output classes.ply
    pcoctree reduce   --input cloud.obj --output merged.ply
    pcoctree voxelize --input cloud.obj --output cells.obj --format obj [--boxes]
    pcoctree generate --kind canopy --output fixture.obj [--expected fixture.json]

Exit codes: 0 ok, 2 usage, 3 parse, 4 I/O, 5 integrity.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import grid, synthetic
from .errors import IntegrityError, LevelError, ParseError
from .pipeline import PipelineResult, run_pipeline
from .point_io import DEFAULT_CLASS_COLORS, PointCloud, write_obj, write_ply
from .reducer import merged_cloud
from .report import render_report

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_IO, EXIT_INTEGRITY = 0, 2, 3, 4, 5

log = logging.getLogger("pcoctree")

NAMED_COLORS = {
    "red": (255, 0, 0), "green": (0, 255, 0), "blue": (0, 0, 255),
    "yellow": (255, 255, 0), "cyan": (0, 255, 255), "magenta": (255, 0, 255),
    "white": (255, 255, 255), "black": (0, 0, 0), "gray": (128, 128, 128),
    "orange": (255, 165, 0), "brown": (139, 69, 19),
}

# corner offsets and quad faces of a unit box, for --boxes
_BOX_CORNERS = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)],
                        dtype=np.float64)
_BOX_FACES = ((1, 2, 4, 3), (5, 7, 8, 6), (1, 5, 6, 2), (3, 4, 8, 7), (1, 3, 7, 5), (2, 6, 8, 4))


class UsageError(Exception):
    pass


def parse_color(text: str) -> tuple[int, int, int]:
    text = text.strip().lower()
    if text in NAMED_COLORS:
        return NAMED_COLORS[text]
    if text.startswith("#") and len(text) == 7:
        try:
            return tuple(int(text[n:n + 2], 16) for n in (1, 3, 5))
        except ValueError:
            pass
    parts = text.split(":")
    if len(parts) == 3 and all(p.isdigit() and int(p) <= 255 for p in parts):
        return tuple(int(p) for p in parts)
    raise UsageError(f"cannot read color {text!r} (use a name, #rrggbb or r:g:b)")


def parse_color_map(text: str) -> dict[str, tuple[int, int, int]]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError("--color-map takes three colors: surface,above,gap")
    return dict(zip(("surface", "above", "gap"), map(parse_color, parts)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcoctree", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, help="OBJ (or ASCII PLY) point cloud")
    common.add_argument("--level", type=int, default=5, help="octree depth (default 5)")
    common.add_argument("--max-level", type=int, default=grid.MAX_LEVEL, help=argparse.SUPPRESS)
    common.add_argument("--axis-order", choices=("yxz", "xyz"), default="yxz",
                        help="coordinate order of the OBJ vertex lines (default yxz)")
    common.add_argument("--no-normalize", action="store_true",
                        help="keep raw horizontal coordinates")
    common.add_argument("--report", choices=("text", "structured"), default="text")
    common.add_argument("--report-file", help="write the report here instead of stdout")

    export = argparse.ArgumentParser(add_help=False)
    export.add_argument("--output", "-o", required=True)
    export.add_argument("--format", choices=("ply", "obj"), default=None,
                        help="export format (default: from --output suffix, else ply)")

    sub.add_parser("stats", parents=[common], help="print cuboid statistics")
    p = sub.add_parser("classify", parents=[common, export],
                       help="export class-colored cell centers")
    p.add_argument("--color-map", default=None,
                   help="surface,above,gap colors (default green,red,blue)")
    sub.add_parser("reduce", parents=[common, export], help="merge points per occupied cell")
    p = sub.add_parser("voxelize", parents=[common, export], help="export occupied cells")
    p.add_argument("--boxes", action="store_true", help="write 8-corner boxes (OBJ only)")

    p = sub.add_parser("generate", help="write a synthetic fixture cloud")
    p.add_argument("--kind", choices=sorted(synthetic.KINDS), default="terraced")
    p.add_argument("--level", type=int, default=5)
    p.add_argument("--points", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--expected", help="write expected counts as JSON here")
    p.add_argument("--no-color", action="store_true")
    return parser


def _export_format(args) -> str:
    if args.format:
        return args.format
    return "obj" if args.output.lower().endswith(".obj") else "ply"


def _write(cloud: PointCloud, args, faces=None) -> None:
    if _export_format(args) == "obj":
        write_obj(cloud, args.output, faces=faces)
    else:
        write_ply(cloud, args.output)


def _emit_report(result: PipelineResult, args) -> None:
    text = render_report(result.report(), args.report)
    if args.report_file:
        Path(args.report_file).write_text(text)
    else:
        sys.stdout.write(text)


def _run(args, reduce: bool = False) -> PipelineResult:
    return run_pipeline(args.input, args.level, axis_order=args.axis_order,
                        normalize=not args.no_normalize, reduce=reduce,
                        max_level=args.max_level)


def cmd_stats(args) -> None:
    _emit_report(_run(args), args)


def cmd_classify(args) -> None:
    colors = parse_color_map(args.color_map) if args.color_map else DEFAULT_CLASS_COLORS
    result = _run(args)
    t = time.perf_counter()
    _write(result.classified.to_cloud(result.bbox, colors), args)
    result.timings["export"] = time.perf_counter() - t
    _emit_report(result, args)


def cmd_reduce(args) -> None:
    result = _run(args, reduce=True)
    t = time.perf_counter()
    _write(merged_cloud(result.merged, result.cloud.axis_convention), args)
    result.timings["export"] = time.perf_counter() - t
    _emit_report(result, args)


def cmd_voxelize(args) -> None:
    if args.boxes and _export_format(args) != "obj":
        raise UsageError("--boxes requires OBJ output")
    result = _run(args)
    idx = np.array([a[1:] for a in result.leaves], dtype=np.int64)
    level = result.tree.max_level
    t = time.perf_counter()
    if args.boxes:
        size = result.bbox.cell_size(level)
        lo = result.bbox.mins + idx * size
        corners = (lo[:, None, :] + _BOX_CORNERS[None, :, :] * size).reshape(-1, 3)
        faces = [tuple(8 * n + v for v in f) for n in range(len(idx)) for f in _BOX_FACES]
        write_obj(PointCloud(corners, None, result.cloud.axis_convention), args.output,
                  faces=faces)
    else:
        centers = result.bbox.cell_centers(level, idx)
        _write(PointCloud(centers, None, result.cloud.axis_convention), args)
    result.timings["export"] = time.perf_counter() - t
    _emit_report(result, args)


def cmd_generate(args) -> None:
    try:
        fixture = synthetic.generate(args.kind, args.level, args.points, args.seed,
                                     color=not args.no_color)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_obj(fixture.cloud, args.output)
    if args.expected:
        Path(args.expected).write_text(json.dumps(fixture.expected(), indent=1) + "\n")


COMMANDS = {
    "stats": cmd_stats,
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "voxelize": cmd_voxelize,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (UsageError, LevelError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except IntegrityError as exc:
        log.error("integrity error: %s", exc)
        return EXIT_INTEGRITY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
