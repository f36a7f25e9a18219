import sys
from pathlib import Path

import numpy as np
import pytest

from pcoctree import PointCloud

sys.path.insert(0, str(Path(__file__).parent))


def random_cloud(rng, n, scale=1.0, color=False):
    coords = rng.uniform(0, scale, size=(n, 3))
    colors = rng.uniform(0, 1, size=(n, 3)) if color else None
    return PointCloud(coords, colors)


def corner_cloud():
    return PointCloud(np.array([[a, b, c] for a in (0.0, 1.0) for b in (0.0, 2.0)
                                for c in (0.0, 3.0)]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def corners():
    return corner_cloud()


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
