"""MSE, PSNR and SSIM.

MSE and PSNR work in the 8-bit domain (samples times 255) so that the PSNR
peak is 255.  SSIM works on the stored [0, 1] samples, with its stabilisers
scaled to match (L = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatchError, InvalidParameterError
from .imagecore import RasterImage, rgb_to_ycbcr

__all__ = [
    "SsimParams",
    "MetricValue",
    "mse",
    "psnr",
    "ssim",
    "gaussian_window",
    "luma",
    "evaluate",
]

PEAK = 255.0


@dataclass(frozen=True)
class SsimParams:
    c1: float = 0.01**2
    c2: float = 0.03**2
    window: str = "gaussian"  # "gaussian" or "global"
    size: int = 11
    sigma: float = 1.5

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise InvalidParameterError("SSIM stabilisers must be positive")
        if self.window not in ("gaussian", "global"):
            raise InvalidParameterError(f"unknown SSIM window: {self.window!r}")
        if self.window == "gaussian":
            if self.size < 3 or self.size % 2 == 0:
                raise InvalidParameterError("Gaussian window size must be odd and >= 3")
            if self.sigma <= 0:
                raise InvalidParameterError("Gaussian sigma must be positive")

    @classmethod
    def global_stats(cls) -> "SsimParams":
        return cls(window="global")


@dataclass(frozen=True)
class MetricValue:
    mse: float
    psnr: float
    ssim: float


def _as_array(img) -> np.ndarray:
    arr = img.data if isinstance(img, RasterImage) else np.asarray(img, dtype=np.float32)
    return arr if arr.ndim == 3 else arr[:, :, None]


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    a, b = _check_pair(a, b)
    diff = a.astype(np.float64) * PEAK - b.astype(np.float64) * PEAK
    return float(np.mean(diff * diff))


def psnr_from_mse(value: float) -> float:
    if value == 0.0:
        return math.inf
    return 20.0 * math.log10(PEAK / math.sqrt(value))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical images."""
    return psnr_from_mse(mse(a, b))


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax * ax) / (2.0 * sigma * sigma))
    g2 = np.outer(g, g)
    return g2 / g2.sum()


def _ssim_plane(x: np.ndarray, y: np.ndarray, p: SsimParams) -> float:
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    if p.window == "global":
        mx, my = x.mean(), y.mean()
        vx = np.mean((x - mx) ** 2)
        vy = np.mean((y - my) ** 2)
        cxy = np.mean((x - mx) * (y - my))
    else:
        if p.size > min(x.shape):
            raise DimensionMismatchError(
                f"SSIM window {p.size} larger than image {x.shape[0]}x{x.shape[1]}"
            )
        w = gaussian_window(p.size, p.sigma)

        def filt(z):
            return np.einsum("ijkl,kl->ij", sliding_window_view(z, w.shape), w)

        mx, my = filt(x), filt(y)
        vx = filt(x * x) - mx * mx
        vy = filt(y * y) - my * my
        cxy = filt(x * y) - mx * my
    num = (2.0 * mx * my + p.c1) * (2.0 * cxy + p.c2)
    den = (mx * mx + my * my + p.c1) * (vx + vy + p.c2)
    return float(np.mean(num / den))


def ssim(a, b, params: SsimParams | None = None) -> float:
    """Structural similarity, averaged over channels for multi-channel input."""
    params = params or SsimParams()
    a, b = _check_pair(a, b)
    return float(np.mean([_ssim_plane(a[:, :, c], b[:, :, c], params) for c in range(a.shape[2])]))


def luma(img: RasterImage) -> RasterImage:
    return img if img.channels == 1 else rgb_to_ycbcr(img).y


def evaluate(reference: RasterImage, test: RasterImage, *, on_luma: bool = True,
             params: SsimParams | None = None) -> MetricValue:
    if on_luma:
        reference, test = luma(reference), luma(test)
    m = mse(reference, test)
    return MetricValue(m, psnr_from_mse(m), ssim(reference, test, params))
