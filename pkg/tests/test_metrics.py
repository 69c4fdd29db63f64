import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_image
from sr_forge.errors import DimensionMismatchError, InvalidParameterError
from sr_forge.imagecore import RasterImage
from sr_forge.metrics import SsimParams, evaluate, mse, psnr, psnr_from_mse, ssim


def _img(arr):
    return RasterImage(np.asarray(arr, np.float32))


def test_mse_examples(rng):
    a = random_image(rng, 4, 4, 1)
    assert mse(a, a) == 0.0
    assert mse(_img([[0.0, 1.0]]), _img([[1.0, 0.0]])) == 65025.0


def test_mse_matches_double_loop(rng):
    for _ in range(20):
        a, b = random_image(rng, 4, 4, 3), random_image(rng, 4, 4, 3)
        assert abs(mse(a, b) - oracles.mse(a.data, b.data)) <= 1e-3


def test_psnr_examples():
    a = _img(np.full((3, 3), 0.2))
    assert psnr(a, a) == math.inf
    assert psnr(_img(np.zeros((2, 2))), _img(np.ones((2, 2)))) == 0.0
    assert abs(psnr_from_mse(1.0) - 48.1308) <= 1e-3
    lo = RasterImage.from_u8(np.full((4, 4, 1), 100, np.uint8))
    hi = RasterImage.from_u8(np.full((4, 4, 1), 101, np.uint8))
    assert abs(psnr(lo, hi) - 48.1308) <= 1e-3


def test_psnr_decreases_with_noise(rng):
    base = random_image(rng, 32, 32, 1)
    noise = rng.standard_normal(base.shape)
    values = [psnr(base, RasterImage.clipped(base.data + amp * noise))
              for amp in (0.005, 0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_metric_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        mse(_img(np.zeros((2, 2))), _img(np.zeros((2, 3))))
    with pytest.raises(DimensionMismatchError):
        ssim(_img(np.zeros((12, 12))), _img(np.zeros((12, 13))))


def test_ssim_identity_is_exactly_one(rng):
    for c in (1, 3):
        a = random_image(rng, 16, 16, c)
        assert ssim(a, a) == 1.0
        assert ssim(a, a, SsimParams.global_stats()) == 1.0


def test_ssim_global_constants():
    c1 = 6.5025 / 65025
    got = ssim(_img(np.zeros((8, 8))), _img(np.ones((8, 8))), SsimParams.global_stats())
    assert abs(got - c1 / (1 + c1)) <= 1e-9
    assert abs(got - 1.0e-4) <= 1e-7


def test_ssim_matches_window_oracle(rng):
    for _ in range(5):
        a, b = random_image(rng, 16, 16, 1), random_image(rng, 16, 16, 1)
        expect = oracles.ssim_plane(a.data[:, :, 0].astype(np.float64),
                                    b.data[:, :, 0].astype(np.float64))
        assert abs(ssim(a, b) - expect) <= 1e-5


def test_ssim_rgb_is_channel_mean(rng):
    a, b = random_image(rng, 14, 14, 3), random_image(rng, 14, 14, 3)
    per = [ssim(a.plane(c), b.plane(c)) for c in range(3)]
    assert abs(ssim(a, b) - np.mean(per)) <= 1e-12


def test_ssim_window_too_large(rng):
    a = random_image(rng, 8, 8, 1)
    with pytest.raises(DimensionMismatchError):
        ssim(a, a)


def test_ssim_params_validated():
    with pytest.raises(InvalidParameterError):
        SsimParams(c1=0)
    with pytest.raises(InvalidParameterError):
        SsimParams(size=4)
    with pytest.raises(InvalidParameterError):
        SsimParams(window="box")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), global_mode=st.booleans())
def test_symmetry(seed, global_mode):
    rng = np.random.default_rng(seed)
    a, b = random_image(rng, 12, 13, 1), random_image(rng, 12, 13, 1)
    params = SsimParams.global_stats() if global_mode else SsimParams()
    assert mse(a, b) == mse(b, a)
    assert abs(ssim(a, b, params) - ssim(b, a, params)) <= 1e-9
    assert ssim(a, b, params) <= 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_mse_invariant_under_shared_permutation(seed):
    rng = np.random.default_rng(seed)
    a, b = random_image(rng, 6, 7, 3), random_image(rng, 6, 7, 3)
    perm = rng.permutation(6 * 7)
    pa = a.data.reshape(-1, 3)[perm].reshape(6, 7, 3)
    pb = b.data.reshape(-1, 3)[perm].reshape(6, 7, 3)
    assert mse(_img(pa), _img(pb)) == pytest.approx(mse(a, b), rel=1e-12)


def test_mse_zero_iff_equal(rng):
    a = random_image(rng, 5, 5, 3)
    b = np.array(a.data)
    b[2, 3, 1] = min(1.0, b[2, 3, 1] + 1e-3)
    assert mse(a, _img(b)) > 0.0


def test_evaluate_uses_luma_by_default(rng):
    a, b = random_image(rng, 16, 16, 3), random_image(rng, 16, 16, 3)
    on_y = evaluate(a, b)
    on_rgb = evaluate(a, b, on_luma=False)
    assert on_rgb.mse == mse(a, b)
    assert on_y.mse != on_rgb.mse
    assert on_y.psnr == psnr_from_mse(on_y.mse)
