"""Accuracy, relative error and SSIM."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rvfldl.metrics import ImageBuffer, accuracy, relative_reconstruction_error, ssim

images = arrays(np.float64, (8, 9), elements=st.floats(0, 255, allow_nan=False))


def ssim_scalar(a, b, R):
    """Global SSIM written out with plain Python sums."""
    a, b = list(np.ravel(a)), list(np.ravel(b))
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    va = sum((x - ma) ** 2 for x in a) / n
    vb = sum((y - mb) ** 2 for y in b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / n
    c1, c2 = (0.01 * R) ** 2, (0.03 * R) ** 2
    return (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2))


class TestAccuracy:
    def test_values(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0
        assert accuracy([0, 0], [1, 1]) == 0.0
        assert accuracy([1, 2, 3, 4], [1, 2, 3, 0]) == 0.75

    def test_errors(self):
        with pytest.raises(ValueError):
            accuracy([1, 2], [1])
        with pytest.raises(ValueError):
            accuracy([], [])

    def test_permutation_equivariant(self, rng):
        p, t = rng.integers(0, 3, 50), rng.integers(0, 3, 50)
        perm = rng.permutation(50)
        assert accuracy(p[perm], t[perm]) == accuracy(p, t)


class TestRelativeError:
    def test_exact_and_zero_dictionary(self, rng):
        D1, X1 = rng.standard_normal((4, 5)), rng.standard_normal((5, 3))
        assert relative_reconstruction_error(D1 @ X1, D1, X1) == 0.0
        Y = rng.standard_normal((4, 3))
        assert relative_reconstruction_error(Y, np.zeros((4, 5)), X1) == 1.0

    def test_elementwise_oracle(self, rng):
        Y, D1, X1 = rng.standard_normal((3, 4)), rng.standard_normal((3, 2)), rng.standard_normal((2, 4))
        num = sum((Y[i, j] - sum(D1[i, k] * X1[k, j] for k in range(2))) ** 2 for i in range(3) for j in range(4))
        den = sum(v * v for v in Y.ravel())
        assert relative_reconstruction_error(Y, D1, X1) == pytest.approx((num / den) ** 0.5, rel=1e-12)

    def test_joint_scale_invariance(self, rng):
        Y, D1, X1 = rng.standard_normal((3, 4)), rng.standard_normal((3, 2)), rng.standard_normal((2, 4))
        assert relative_reconstruction_error(7.5 * Y, 7.5 * D1, X1) == pytest.approx(
            relative_reconstruction_error(Y, D1, X1), rel=1e-12)

    def test_zero_data_rejected(self):
        with pytest.raises(ValueError):
            relative_reconstruction_error(np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 2)))


class TestSSIM:
    def test_constant_zero_images(self):
        assert ssim(np.zeros((4, 4)), np.zeros((4, 4))) == 1.0

    def test_four_by_four_oracle(self):
        a = np.array([[10, 20, 30, 40], [50, 60, 70, 80], [90, 100, 110, 120], [130, 140, 150, 160]], float)
        b = a[::-1].copy() * 0.5 + 7
        # means 85 / 49.5, variances 2125 / 531.25, covariance (-1600 + 100) * 1.25 / 2 = -937.5
        assert a.mean() == 85 and b.mean() == 49.5
        assert np.var(a) == 2125 and np.var(b) == 531.25
        assert np.mean((a - 85) * (b - 49.5)) == -937.5
        c1, c2 = 2.55 ** 2, 7.65 ** 2
        expected = (2 * 85 * 49.5 + c1) * (2 * -937.5 + c2) / ((85 ** 2 + 49.5 ** 2 + c1) * (2125 + 531.25 + c2))
        assert ssim(a, b) == pytest.approx(expected, rel=1e-12)
        assert ssim(a, b) == pytest.approx(ssim_scalar(a, b, 255.0), rel=1e-12)

    @given(images)
    @settings(max_examples=40, deadline=None)
    def test_self_similarity(self, a):
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
        assert ssim(a, a, windowed=True) == pytest.approx(1.0, abs=1e-12)

    @given(images, images)
    @settings(max_examples=40, deadline=None)
    def test_symmetry_and_range(self, a, b):
        s = ssim(a, b)
        assert s == pytest.approx(ssim(b, a), abs=1e-12)
        assert -1.0 - 1e-12 <= s <= 1.0 + 1e-12

    def test_windowed_matches_window_loop(self, rng):
        a, b = rng.uniform(0, 255, (10, 11)), rng.uniform(0, 255, (10, 11))
        vals = [ssim_scalar(a[i:i + 8, j:j + 8], b[i:i + 8, j:j + 8], 255.0)
                for i in range(3) for j in range(4)]
        assert ssim(a, b, windowed=True) == pytest.approx(np.mean(vals), rel=1e-10)

    def test_clamping(self):
        a = np.full((3, 3), 100.0)
        a[0, 0] = 0.0
        b = a.copy()
        b[1, 1] = 300.0  # clamps to 255
        b2 = a.copy()
        b2[1, 1] = 255.0
        assert ssim(a, b) == ssim(a, b2)
        assert ImageBuffer(np.array([[-5.0, 500.0]])).pixels.tolist() == [[0.0, 255.0]]

    def test_errors(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((3, 3)), np.zeros((3, 4)))
        with pytest.raises(ValueError):
            ssim(ImageBuffer(np.zeros((2, 2)), 1.0), ImageBuffer(np.zeros((2, 2)), 255.0))
        with pytest.raises(ValueError):
            ssim(np.zeros((4, 4)), np.zeros((4, 4)), windowed=True)
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((0, 3)))
