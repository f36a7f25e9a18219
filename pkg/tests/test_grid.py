import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cloud
from oracles import decimal_normalize, distinct_ancestors, minmax_scan
from pcoctree import (BoundingBox, CuboidAddress, EmptyCloudError, GeoPoint, LevelError,
                      PointCloud, build_octree, cell_address, cell_indices, compute_bbox,
                      level_stats, normalize, occupied_leaves)


class TestBoundingBox:

    def test_single_point_is_degenerate(self):
        box = compute_bbox(PointCloud([[1.0, 2.0, 3.0]]))
        assert box == BoundingBox(1, 1, 2, 2, 3, 3)

    def test_two_points(self):
        box = compute_bbox(PointCloud([[0, 0, 0], [1, 2, 3]]))
        assert box == BoundingBox(0, 1, 0, 2, 0, 3)

    def test_matches_linear_scan(self, rng):
        cloud = random_cloud(rng, 1000)
        lo, hi = minmax_scan(cloud.coords)
        box = compute_bbox(cloud)
        assert box.mins.tolist() == lo and box.maxs.tolist() == hi
        assert (box.mins >= 0).all() and (box.maxs <= 1).all()
        assert box.contains(cloud.coords).all()

    def test_empty(self):
        with pytest.raises(EmptyCloudError):
            compute_bbox(PointCloud(np.empty((0, 3))))

    def test_cell_bounds(self):
        box = BoundingBox(0, 8, 0, 4, 10, 12)
        lo, hi = box.cell_bounds(CuboidAddress(2, 3, 0, 1))
        assert lo.tolist() == [6, 0, 10.5] and hi.tolist() == [8, 1, 11]


class TestNormalize:

    def test_worked_value(self):
        cloud = PointCloud([[41.1234567, 44.7831234, 812.25]])
        out, fallback = normalize(cloud)
        assert not fallback
        assert out.coords[0, 0] == pytest.approx(4.567, abs=1e-9)
        assert out.coords[0, 0] == pytest.approx(decimal_normalize(41.1234567), abs=1e-9)
        assert out.coords[0, 1] == pytest.approx(decimal_normalize(44.7831234), abs=1e-9)
        assert out.coords[0, 2] == 812.25

    @settings(max_examples=200, deadline=None)
    @given(prefix=st.integers(0, 89_999), tail=st.integers(1, 99_998))
    def test_agrees_with_decimal_oracle(self, prefix, tail):
        # values with 8 decimals, away from the 1e-3 boundary
        v = float(f"{prefix / 1000:.3f}{tail:05d}")
        out, _ = normalize(PointCloud([[v, v, 0.0]]))
        assert out.coords[0, 0] == pytest.approx(decimal_normalize(v), abs=1e-7)

    def test_small_values_are_only_scaled(self):
        cloud = PointCloud([[0.0002, 0.0007, 5.0], [0.0009, 0.0001, 6.0]])
        out, fallback = normalize(cloud)
        assert not fallback
        np.testing.assert_allclose(out.coords[:, :2], cloud.coords[:, :2] * 1e4, atol=1e-12)
        np.testing.assert_array_equal(out.coords[:, 2], cloud.coords[:, 2])

    def test_wide_cloud_falls_back_to_min_offset(self):
        cloud = PointCloud([[4_612_345.12, 512_000.5, 1.0], [4_612_350.62, 512_003.0, 2.0]])
        out, fallback = normalize(cloud)
        assert fallback
        np.testing.assert_allclose(out.coords[:, 0], [0.0, 55_000.0], atol=1e-4)
        np.testing.assert_allclose(out.coords[:, 1], [0.0, 25_000.0], atol=1e-4)

    def test_straddling_a_thousandth_falls_back(self):
        cloud = PointCloud([[41.12299, 1e-4, 0.0], [41.12301, 2e-4, 0.0]])
        out, fallback = normalize(cloud)
        assert fallback
        assert out.coords[0, 0] == 0.0
        assert out.coords[1, 0] == pytest.approx(0.2, abs=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), level=st.integers(1, 6),
           wide=st.booleans())
    def test_preserves_cell_addresses(self, seed, level, wide):
        rng = np.random.default_rng(seed)
        base = np.array([41.7231, 44.7831, 800.0])
        span = np.array([40.0, 70.0, 3.0]) if wide else np.array([6e-4, 8e-4, 3.0])
        coords = base + rng.uniform(0, 1, (300, 3)) * span
        cloud = PointCloud(coords)
        out, fallback = normalize(cloud)
        assert fallback == wide
        before = cell_indices(cloud.coords, compute_bbox(cloud), level)
        after = cell_indices(out.coords, compute_bbox(out), level)
        np.testing.assert_array_equal(before, after)


class TestCellAddress:

    box = BoundingBox(0, 8, -4, 4, 100, 116)

    def test_min_corner(self):
        assert cell_address(GeoPoint(0, -4, 100), self.box, 3) == (3, 0, 0, 0)

    def test_max_corner_is_clamped(self):
        assert cell_address(GeoPoint(8, 4, 116), self.box, 3) == (3, 7, 7, 7)

    def test_midpoint_goes_to_upper_half(self, ):
        p = GeoPoint(4, 0, 108)
        assert cell_address(p, self.box, 1) == (1, 1, 1, 1)
        # same answer by descending the tree
        cloud = PointCloud([[0, -4, 100], [8, 4, 116], [4, 0, 108]])
        tree = build_octree(cloud, 1)
        holder = [a for a, idx in occupied_leaves(tree).items() if 2 in idx.tolist()]
        assert holder == [CuboidAddress(1, 1, 1, 1)]

    def test_degenerate_axis_is_zero(self):
        flat = BoundingBox(0, 8, 0, 8, 5, 5)
        assert cell_address(GeoPoint(8, 3, 5), flat, 2) == (2, 3, 1, 0)

    def test_outside_box(self):
        with pytest.raises(ValueError):
            cell_address(GeoPoint(9, 0, 100), self.box, 2)

    def test_vectorized_matches_scalar(self, rng):
        cloud = random_cloud(rng, 500, scale=3.0)
        box = compute_bbox(cloud)
        vec = cell_indices(cloud.coords, box, 4)
        scalar = [cell_address(p, box, 4)[1:] for p in cloud]
        assert vec.tolist() == [list(s) for s in scalar]


class TestOctree:

    def test_corners_level_one(self, corners):
        tree = build_octree(corners, 1)
        leaves = occupied_leaves(tree)
        assert len(leaves) == 8
        assert all(len(idx) == 1 for idx in leaves.values())
        assert level_stats(tree).counts == (1, 8)
        assert level_stats(tree).total == 9

    @pytest.mark.parametrize("lev", [0, 1, 5, 10])
    def test_single_point_is_a_chain(self, lev):
        tree = build_octree(PointCloud([[3.0, 1.0, 2.0]]), lev)
        stats = level_stats(tree)
        assert stats.counts == (1,) * (lev + 1)
        assert stats.occupied_leaves == 1
        leaves = occupied_leaves(tree)
        assert [idx.tolist() for idx in leaves.values()] == [[0]]

    def test_single_point_level_five_totals(self):
        stats = level_stats(build_octree(PointCloud([[0.0, 0.0, 0.0]]), 5))
        assert list(stats.counts) == [1, 1, 1, 1, 1, 1] and stats.total == 6

    def test_random_matches_direct_addressing(self, rng):
        cloud = random_cloud(rng, 5000)
        tree = build_octree(cloud, 4)
        box = compute_bbox(cloud)
        expected = {cell_address(p, box, 4) for p in cloud}
        assert set(occupied_leaves(tree)) == expected

    def test_leaves_partition_indices(self, rng):
        cloud = random_cloud(rng, 5000)
        leaves = occupied_leaves(build_octree(cloud, 5))
        allidx = np.concatenate(list(leaves.values()))
        assert len(allidx) == 5000
        assert sorted(allidx.tolist()) == list(range(5000))
        assert all((np.diff(idx) > 0).all() for idx in leaves.values())

    def test_flat_grid_counts_match_ancestors(self):
        # one point at the center of every cell of a 4x4x1 layer at level 2,
        # plus corner anchors that pin the box to [0, 4]^3
        pts = [[i + 0.5, j + 0.5, 0.5] for i in range(4) for j in range(4)]
        pts += [[0, 0, 0], [4, 4, 4]]
        tree = build_octree(PointCloud(pts), 2)
        box = compute_bbox(PointCloud(pts))
        idx = cell_indices(np.array(pts), box, 2)
        stats = level_stats(tree)
        assert list(stats.counts) == distinct_ancestors(idx, 2)
        assert stats.total == sum(distinct_ancestors(idx, 2))
        assert stats.occupied_leaves == 17

    def test_planar_cloud(self, rng):
        coords = rng.uniform(0, 1, (200, 3))
        coords[:, 2] = 7.0
        tree = build_octree(PointCloud(coords), 3)
        assert {a.k for a in occupied_leaves(tree)} == {0}

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 400), lev=st.integers(0, 6))
    def test_invariants(self, seed, n, lev):
        rng = np.random.default_rng(seed)
        # mix continuous points with grid-aligned ones to hit cell faces
        coords = rng.uniform(0, 1, (n, 3))
        snap = rng.random(n) < 0.3
        coords[snap] = np.round(coords[snap] * 2 ** lev) / 2 ** lev
        cloud = PointCloud(coords)
        tree = build_octree(cloud, lev)
        stats = level_stats(tree)
        counts = stats.counts
        assert counts[0] == 1
        assert all(a <= b <= 8 * a for a, b in zip(counts, counts[1:]))
        assert stats.occupied_leaves <= min(n, 8 ** lev)
        leaves = occupied_leaves(tree)
        assert all(a.level == lev for a in leaves)
        box = compute_bbox(cloud)
        direct = cell_indices(cloud.coords, box, lev)
        for addr, idx in leaves.items():
            assert (direct[idx] == addr[1:]).all()
        assert sum(len(i) for i in leaves.values()) == n

    def test_nodes_are_nested(self, rng):
        tree = build_octree(random_cloud(rng, 300), 4)
        for node in tree.nodes():
            assert len(node.children) <= 8
            for child in node.children:
                assert child.address.parent() == node.address
            assert node.is_leaf == (node.address.level == 4)

    @pytest.mark.parametrize("lev", [-1, 11, 2.5, True])
    def test_level_guard(self, corners, lev):
        with pytest.raises(LevelError):
            build_octree(corners, lev)

    def test_level_cap_is_configurable(self):
        tree = build_octree(PointCloud([[0.0, 0.0, 0.0]]), 12, max_level=12)
        assert level_stats(tree).total == 13

    def test_explicit_bbox_must_contain_points(self, corners):
        with pytest.raises(ValueError):
            build_octree(corners, 1, BoundingBox(0, 0.5, 0, 2, 0, 3))

    def test_explicit_bbox_is_used(self):
        tree = build_octree(PointCloud([[0.1, 0.1, 0.1]]), 2, BoundingBox(0, 4, 0, 4, 0, 4))
        assert list(occupied_leaves(tree)) == [CuboidAddress(2, 0, 0, 0)]
        tree = build_octree(PointCloud([[3.9, 0.1, 2.0]]), 2, BoundingBox(0, 4, 0, 4, 0, 4))
        assert list(occupied_leaves(tree)) == [CuboidAddress(2, 3, 0, 2)]
