"""Run statistics: cuboid counts per level, class tallies, reduction, timings.

Two renderings are supported, a ``key: value`` text form meant for people
and a JSON form with stable keys. Both parse back to an equal report.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from .classifier import CellClass, ClassifiedGrid
from .errors import IntegrityError
from .grid import LevelStats
from .reducer import MergedPoint

STAGES = ("parse", "normalize", "build", "classify", "reduce", "export")


@dataclass
class RunReport:
    input_points: int
    level: int
    level_counts: list[int]
    total_cuboids: int
    occupied_leaves: int
    surface: int
    above: int
    gap: int
    merged_points: int | None = None
    reduction_ratio: float | None = None
    normalization_fallback: bool = False
    timings: dict[str, float] = field(default_factory=dict)

    def check(self) -> None:
        """Raise :class:`IntegrityError` unless all totals agree."""
        problems = []
        if len(self.level_counts) != self.level + 1:
            problems.append(f"{len(self.level_counts)} level counts for level {self.level}")
        if not self.level_counts or self.level_counts[0] != 1:
            problems.append("level 0 must hold exactly one cuboid")
        if sum(self.level_counts) != self.total_cuboids:
            problems.append(f"level counts sum to {sum(self.level_counts)}, "
                            f"total is {self.total_cuboids}")
        if self.level_counts and self.level_counts[-1] != self.occupied_leaves:
            problems.append("last level count differs from occupied leaves")
        for lo, hi in zip(self.level_counts, self.level_counts[1:]):
            if not lo <= hi <= 8 * lo:
                problems.append(f"occupancy jumps from {lo} to {hi} between levels")
        if self.surface + self.above != self.occupied_leaves:
            problems.append(f"surface {self.surface} + above {self.above} != "
                            f"occupied leaves {self.occupied_leaves}")
        if self.occupied_leaves > self.input_points:
            problems.append("more occupied leaves than points")
        if self.merged_points is not None and self.merged_points != self.occupied_leaves:
            problems.append(f"{self.merged_points} merged points for "
                            f"{self.occupied_leaves} occupied leaves")
        if problems:
            raise IntegrityError("; ".join(problems))


def build_report(stats: LevelStats, grid: ClassifiedGrid,
                 merged: Sequence[MergedPoint] | None = None,
                 timings: Mapping[str, float] | None = None, *,
                 input_points: int, normalization_fallback: bool = False) -> RunReport:
    """Assemble and validate the report of one pipeline run."""
    tally = grid.counts()
    merged_points = ratio = None
    if merged is not None:
        merged_points = len(merged)
        if sum(m.multiplicity for m in merged) != input_points:
            raise IntegrityError(f"merged multiplicities do not add up to {input_points}")
        ratio = merged_points / input_points
    report = RunReport(
        input_points=input_points,
        level=stats.max_level,
        level_counts=list(stats.counts),
        total_cuboids=stats.total,
        occupied_leaves=stats.occupied_leaves,
        surface=tally[CellClass.SURFACE],
        above=tally[CellClass.ABOVE],
        gap=tally[CellClass.GAP],
        merged_points=merged_points,
        reduction_ratio=ratio,
        normalization_fallback=normalization_fallback,
        timings={k: float(v) for k, v in (timings or {}).items()},
    )
    report.check()
    return report


def render_report(r: RunReport, fmt: str = "text") -> str:
    if fmt == "structured":
        return json.dumps(asdict(r), sort_keys=True, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"input points: {r.input_points}",
        f"level: {r.level}",
    ]
    lines += [f"cuboids at level {n}: {c}" for n, c in enumerate(r.level_counts)]
    lines += [
        f"total cuboids (levels 0-{r.level}): {r.total_cuboids}",
        f"occupied cuboids at level {r.level}: {r.occupied_leaves}",
        f"surface: {r.surface}",
        f"above: {r.above}",
        f"gap: {r.gap}",
        f"merged points: {'-' if r.merged_points is None else r.merged_points}",
        f"reduction ratio: {'-' if r.reduction_ratio is None else repr(r.reduction_ratio)}",
        f"normalization fallback: {'yes' if r.normalization_fallback else 'no'}",
    ]
    lines += [f"time {stage}: {r.timings[stage]!r} s" for stage in _ordered(r.timings)]
    return "\n".join(lines) + "\n"


def _ordered(timings: Mapping[str, float]) -> list[str]:
    known = [s for s in STAGES if s in timings]
    return known + sorted(set(timings) - set(known))


def parse_report(text: str) -> RunReport:
    """Inverse of :func:`render_report` for either format."""
    if text.lstrip().startswith("{"):
        return RunReport(**json.loads(text))
    fields: dict[str, str] = {}
    counts: dict[int, int] = {}
    timings: dict[str, float] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(": ")
        if key.startswith("cuboids at level "):
            counts[int(key.rsplit(" ", 1)[1])] = int(value)
        elif key.startswith("time "):
            timings[key[5:]] = float(value.removesuffix(" s"))
        elif key.startswith("total cuboids"):
            fields["total"] = value
        elif key.startswith("occupied cuboids"):
            fields["occupied"] = value
        else:
            fields[key] = value

    def opt(v: str, conv):
        return None if v == "-" else conv(v)

    return RunReport(
        input_points=int(fields["input points"]),
        level=int(fields["level"]),
        level_counts=[counts[n] for n in sorted(counts)],
        total_cuboids=int(fields["total"]),
        occupied_leaves=int(fields["occupied"]),
        surface=int(fields["surface"]),
        above=int(fields["above"]),
        gap=int(fields["gap"]),
        merged_points=opt(fields["merged points"], int),
        reduction_ratio=opt(fields["reduction ratio"], float),
        normalization_fallback=fields["normalization fallback"] == "yes",
        timings=timings,
    )
