import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from umclust.errors import DimMismatch, NormZero
from umclust.numerics import euclidean, grad_check, l2_normalize, rng_stream, torch_gen


class TestL2Normalize:
    def test_3_4_5_triangle(self):
        np.testing.assert_allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8])

    def test_already_unit(self):
        np.testing.assert_allclose(l2_normalize([1.0, 0.0, 0.0]), [1, 0, 0])

    def test_zero_vector_raises(self):
        with pytest.raises(NormZero):
            l2_normalize([0.0, 0.0])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=10))
    def test_unit_norm(self, values):
        v = np.array(values)
        if np.linalg.norm(v) == 0:
            return
        assert abs(np.linalg.norm(l2_normalize(v)) - 1.0) < 1e-6


class TestEuclidean:
    def test_3_4_5(self):
        assert euclidean([0.0, 0.0], [3.0, 4.0]) == 5.0

    def test_identity(self):
        assert euclidean([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_computed(self):
        # sqrt(3^2 + 4^2 + 0^2)
        assert euclidean([1.0, 2.0, 3.0], [4.0, 6.0, 3.0]) == pytest.approx(5.0)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            euclidean([1.0], [1.0, 2.0])

    @settings(max_examples=50)
    @given(st.integers(0, 10_000))
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = rng.standard_normal((3, 5))
        assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9


class TestRngStreams:
    def test_same_seed_stream_bitwise_identical(self):
        a = rng_stream(42, "kmeans").random(100)
        b = rng_stream(42, "kmeans").random(100)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = rng_stream(42, "kmeans").random(100)
        b = rng_stream(42, "dropout").random(100)
        assert not np.array_equal(a, b)

    def test_torch_gen_reproducible(self):
        x = torch.rand(10, generator=torch_gen(7, "init"))
        y = torch.rand(10, generator=torch_gen(7, "init"))
        assert torch.equal(x, y)


class TestGradCheck:
    def test_linear_layer_passes(self):
        w = torch.randn(3, 4, dtype=torch.float64)
        x = torch.randn(5, 4, dtype=torch.float64)
        res = grad_check(lambda: (x @ w.T).sum(), {"w": w, "x": x}, tol=1e-4)
        assert res.passed

    def test_corrupted_backward_fails(self):
        class BadDouble(torch.autograd.Function):
            @staticmethod
            def forward(ctx, x):
                return 2.0 * x

            @staticmethod
            def backward(ctx, g):
                return 3.0 * g  # deliberately wrong

        x = torch.randn(4, dtype=torch.float64)
        res = grad_check(lambda: BadDouble.apply(x).sum(), {"x": x}, tol=1e-4)
        assert not res.passed
