import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_image
from sr_forge.errors import InvalidParameterError
from sr_forge.imagecore import RasterImage
from sr_forge.pipeline import DenoiseParams, apply_denoise, bilateral_filter, nlm_denoise, sharpen
from sr_forge.pipeline.filters import gaussian_blur


def _const(v, h=10, w=12, c=3):
    return RasterImage(np.full((h, w, c), v, np.float32))


def test_sharpen_kernel_and_clamp():
    img = np.full((5, 5, 1), 0.5, np.float32)
    img[2, 2] = 0.6
    out = sharpen(RasterImage(img)).data[:, :, 0]
    assert out[2, 2] == pytest.approx(0.5 + 5 * 0.1)
    assert out[1, 2] == pytest.approx(0.4)
    assert out[0, 0] == 0.5
    spike = np.zeros((3, 3, 1), np.float32)
    spike[1, 1] = 1.0
    assert sharpen(RasterImage(spike)).data.max() == 1.0


def test_bilateral_constant_unchanged():
    img = _const(0.42)
    assert np.allclose(bilateral_filter(img, 5, 0.1, 2.0).data, img.data, atol=1e-7)


def test_bilateral_matches_nested_loops(rng):
    for c in (1, 3):
        for _ in range(4):
            img = random_image(rng, 8, 8, c)
            d = int(rng.choice([3, 5]))
            sc, ss = float(rng.uniform(0.05, 0.5)), float(rng.uniform(0.5, 3.0))
            got = bilateral_filter(img, d, sc, ss).data
            assert np.max(np.abs(got - oracles.bilateral(img.data, d, sc, ss))) <= 1e-5


def test_bilateral_infinite_range_sigma_is_gaussian_blur(rng):
    img = random_image(rng, 12, 10, 3)
    got = bilateral_filter(img, 5, 1e6, 1.5).data
    assert np.max(np.abs(got - oracles.gaussian_blur(img.data, 5, 1.5))) <= 1e-3
    assert np.max(np.abs(got - gaussian_blur(img, 5, 1.5).data)) <= 1e-3


def test_bilateral_preserves_edges():
    step = np.zeros((8, 8, 1), np.float32)
    step[:, 4:] = 1.0
    out = bilateral_filter(RasterImage(step), 5, 0.05, 2.0).data
    assert np.max(np.abs(out - step)) <= 1e-6


def test_nlm_constant_unchanged():
    img = _const(0.7, 9, 9)
    assert np.allclose(nlm_denoise(img, 0.05, 3, 7).data, img.data, atol=1e-7)


def test_nlm_matches_nested_loops(rng):
    for c in (1, 3):
        for _ in range(3):
            img = random_image(rng, 8, 8, c)
            t, s = [(1, 3), (3, 5), (3, 7)][int(rng.integers(3))]
            h = float(rng.uniform(0.05, 0.5))
            got = nlm_denoise(img, h, t, s).data
            assert np.max(np.abs(got - oracles.nlm(img.data, h, t, s))) <= 1e-4


def test_nlm_small_h_is_identity(rng):
    img = random_image(rng, 10, 10, 3)
    assert np.max(np.abs(nlm_denoise(img, 1e-4, 3, 7).data - img.data)) <= 1e-4


def test_nlm_reduces_noise(rng):
    clean = np.tile(np.linspace(0.2, 0.8, 24, dtype=np.float32), (24, 1))[:, :, None]
    noisy = RasterImage.clipped(clean + 0.05 * rng.standard_normal(clean.shape))
    out = nlm_denoise(noisy, 0.08, 5, 11)
    assert np.mean((out.data - clean) ** 2) < np.mean((noisy.data - clean) ** 2)


def test_invalid_parameters(rng):
    img = random_image(rng, 6, 6)
    for args in ((4, 0.1, 1.0), (1, 0.1, 1.0), (3, 0.0, 1.0), (3, 0.1, -1.0)):
        with pytest.raises(InvalidParameterError):
            bilateral_filter(img, *args)
    for args in ((0.0, 3, 7), (0.1, 4, 7), (0.1, 7, 7), (0.1, 9, 7)):
        with pytest.raises(InvalidParameterError):
            nlm_denoise(img, *args)
    with pytest.raises(InvalidParameterError):
        DenoiseParams(method="median")


def test_apply_denoise_dispatch(rng):
    img = random_image(rng, 9, 9)
    assert apply_denoise(img, None) is img
    assert apply_denoise(img, DenoiseParams.none()) is img
    assert np.array_equal(apply_denoise(img, DenoiseParams.bilateral(3, 0.2, 1.0)).data,
                          bilateral_filter(img, 3, 0.2, 1.0).data)
    assert np.array_equal(apply_denoise(img, DenoiseParams.nlm(0.1, 3, 5)).data,
                          nlm_denoise(img, 0.1, 3, 5).data)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), h=st.integers(3, 14), w=st.integers(3, 14),
       c=st.sampled_from([1, 3]), use_nlm=st.booleans())
def test_filters_keep_dims_and_range(seed, h, w, c, use_nlm):
    img = random_image(np.random.default_rng(seed), h, w, c)
    out = nlm_denoise(img, 0.1, 3, 5) if use_nlm else bilateral_filter(img, 5, 0.1, 2.0)
    assert out.shape == img.shape
    assert 0.0 <= out.data.min() and out.data.max() <= 1.0
