import numpy as np
import pytest

from umclust.errors import ClusterTooSmall, SubsetTooSmall
from umclust.kmeans import cluster_round
from umclust.numerics import rng_stream
from umclust.selection import (
    SelectionConfig,
    ZERO_DIST_EPS,
    cohesion,
    density,
    knear_candidates,
    rank_indices,
    select_all,
    select_cluster,
)


class TestDensity:
    def test_hand_computed_line(self):
        pts = np.array([[0.0], [1.0], [2.0], [10.0]])
        rho = density(pts, k_near=2)
        np.testing.assert_allclose(rho, [2 / 3, 1.0, 2 / 3, 2 / 17])

    def test_identical_points(self):
        rho = density(np.ones((4, 3)), k_near=2)
        np.testing.assert_array_equal(rho, np.full(4, 1.0 / ZERO_DIST_EPS))

    def test_duplicated_points_k1(self):
        pts = np.repeat(np.random.default_rng(0).standard_normal((5, 2)), 2, axis=0)
        rho = density(pts, k_near=1)
        np.testing.assert_array_equal(rho, np.full(10, 1.0 / ZERO_DIST_EPS))

    def test_too_small(self):
        with pytest.raises(ClusterTooSmall):
            density(np.ones((1, 2)), 1)

    def test_translation_invariant_scale_reciprocal(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((20, 3))
        rho = density(pts, 4)
        np.testing.assert_allclose(density(pts + 7.5, 4), rho, rtol=1e-9)
        np.testing.assert_allclose(density(pts * 3.0, 4), rho / 3.0, rtol=1e-9)
        np.testing.assert_array_equal(rank_indices(density(pts * 3.0, 4)),
                                      rank_indices(rho))


class TestRankIndices:
    def test_from_density_example(self):
        assert rank_indices(np.array([2 / 3, 1.0, 2 / 3, 2 / 17])).tolist() == [3, 0, 2, 1]

    def test_increasing_is_identity(self):
        assert rank_indices(np.array([1.0, 2.0, 3.0])).tolist() == [0, 1, 2]

    def test_all_equal_stable(self):
        assert rank_indices(np.ones(5)).tolist() == [0, 1, 2, 3, 4]


class TestKnearCandidates:
    def test_default_scale_constants(self):
        cfg = SelectionConfig(lower_bound=0.1, interval=0.02, num_candidates=10)
        assert knear_candidates(100, cfg) == [10, 12, 14, 16, 18, 20, 22, 24, 26, 28]

    def test_small_cluster_clamps(self):
        cfg = SelectionConfig()
        assert all(1 <= k <= 4 for k in knear_candidates(5, cfg))

    def test_n2_all_one(self):
        cfg = SelectionConfig()
        assert knear_candidates(2, cfg) == [1] * 10


class TestCohesion:
    def test_two_points(self):
        assert cohesion(np.array([[0.0], [5.0]])) == pytest.approx(10.0)

    def test_identical(self):
        assert cohesion(np.ones((4, 2))) == 0.0

    def test_equilateral_triangle(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        assert cohesion(pts) == pytest.approx(3.0)

    def test_too_small(self):
        with pytest.raises(SubsetTooSmall):
            cohesion(np.ones((1, 2)))


class TestSelectCluster:
    def test_tie_prefers_smallest_candidate(self):
        # a tight quad plus four mutually far points: every candidate's top-4
        # is the quad, so cohesion ties and the smallest neighbor count wins
        quad = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1]])
        far = np.array([[100.0, 0.0], [0.0, 100.0], [100.0, 100.0], [-100.0, 0.0]])
        pts = np.vstack([quad, far])
        cfg = SelectionConfig(t=0.5)  # m = 4
        candidates = knear_candidates(len(pts), cfg)
        assert len(set(candidates)) > 1  # tie is across genuinely distinct counts
        k, sel = select_cluster(pts, cfg)
        assert sorted(sel.tolist()) == [0, 1, 2, 3]
        assert k == candidates[0]

    def test_m1_fallback(self):
        pts = np.vstack([np.zeros((3, 2)), [[5.0, 5.0]]])
        cfg = SelectionConfig(t=0.1)  # m = max(1, floor(4*0.1)) = 1
        k, sel = select_cluster(pts, cfg)
        assert len(sel) == 1
        assert sel[0] in (0, 1, 2)  # a densest point, never the outlier
        assert k == knear_candidates(4, cfg)[0]

    def test_outliers_excluded(self):
        rng = np.random.default_rng(2)
        inliers = rng.standard_normal((50, 4))
        outliers = rng.standard_normal((5, 4)) + 40.0  # 10x the noise scale away
        pts = np.vstack([inliers, outliers])
        cfg = SelectionConfig(t=0.5)
        _, sel = select_cluster(pts, cfg)
        assert len(sel) == 27  # floor(55 * 0.5)
        assert all(i < 50 for i in sel)

    def test_random_mode_size_and_seed(self):
        pts = np.random.default_rng(0).standard_normal((20, 2))
        cfg = SelectionConfig(t=0.5, mode="random")
        _, a = select_cluster(pts, cfg, rng_stream(0, "sel"))
        _, b = select_cluster(pts, cfg, rng_stream(0, "sel"))
        assert len(a) == 10
        np.testing.assert_array_equal(a, b)


class TestSelectAll:
    def _state(self, seed=0, n_per=40, k=3):
        rng = np.random.default_rng(seed)
        centers = rng.standard_normal((k, 4)) * 8
        pts = np.concatenate([centers[i] + rng.standard_normal((n_per, 4))
                              for i in range(k)])
        return pts, cluster_round(pts, None, k, rng_stream(seed, "km"))

    def test_t1_selects_everything(self):
        pts, state = self._state()
        res = select_all(pts, state, SelectionConfig(t=1.0))
        assert len(res.high_quality) == len(pts)
        assert len(res.low_quality) == 0

    def test_t_near_zero_one_per_cluster(self):
        pts, state = self._state()
        res = select_all(pts, state, SelectionConfig(t=1e-9))
        assert len(res.high_quality) == 3

    def test_partition(self):
        pts, state = self._state(seed=5)
        res = select_all(pts, state, SelectionConfig(t=0.4))
        combined = np.sort(np.concatenate([res.high_quality, res.low_quality]))
        np.testing.assert_array_equal(combined, np.arange(len(pts)))
        assert len(np.intersect1d(res.high_quality, res.low_quality)) == 0

    def test_size_formula(self):
        pts, state = self._state(seed=2)
        t = 0.3
        res = select_all(pts, state, SelectionConfig(t=t))
        expected = sum(max(1, int(np.floor(len(m) * t))) for m in state.members
                       if len(m) >= 2) + sum(len(m) for m in state.members if len(m) < 2)
        assert len(res.high_quality) == expected

    def test_selection_stays_inside_cluster(self):
        pts, state = self._state(seed=3)
        res = select_all(pts, state, SelectionConfig(t=0.5))
        member_sets = [set(m.tolist()) for m in state.members]
        for i in res.high_quality:
            assert any(i in s for s in member_sets)

    def test_planted_outliers_precision(self):
        precisions = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            centers = rng.standard_normal((4, 4)) * 30
            chunks, flags = [], []
            for c in range(4):
                chunks.append(centers[c] + rng.standard_normal((50, 4)))
                flags.extend([True] * 50)
                chunks.append(centers[c] + 10.0 * rng.standard_normal((5, 4)))
                flags.extend([False] * 5)
            pts = np.concatenate(chunks)
            inlier = np.array(flags)
            state = cluster_round(pts, None, 4, rng_stream(seed, "km"))
            res = select_all(pts, state, SelectionConfig(t=0.5))
            precisions.append(inlier[res.high_quality].mean())
        assert np.mean(precisions) >= 0.9
