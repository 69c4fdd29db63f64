"""Nearest, bilinear and bicubic image scaling.

All methods share one convention: half-pixel centres
(``src = (dst + 0.5) / ratio - 0.5``) with clamp-to-edge sampling.  Scaling is
separable, so each axis is resampled from a small (index, weight) table.
Arithmetic runs in float64 and is rounded to float32 once at the end, which
keeps constant images bit-exact.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

from .errors import InvalidParameterError
from .imagecore import RasterImage

__all__ = [
    "ScaleMethod",
    "parse_factor",
    "scaled_dim",
    "scale",
    "resize",
    "degrade",
    "cubic_weight",
]

BICUBIC_A = -0.5


class ScaleMethod(str, enum.Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"

    @classmethod
    def parse(cls, value) -> "ScaleMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParameterError(f"unknown scale method: {value!r}") from None


def parse_factor(value) -> float:
    """Turn "2", "0.5", "1/3", or the shorthands "0.33"/"0.25" into a float.

    ``0.33`` is read as exactly one third so that a later 3x enlargement
    restores the original size.
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        f = float(value)
    else:
        text = str(value).strip().lower().rstrip("x")
        f = float(Fraction(text)) if "/" in text else float(text)
    if abs(f - 0.33) < 1e-9 or abs(f - 0.333) < 1e-9:
        f = 1.0 / 3.0
    if not math.isfinite(f) or f <= 0:
        raise InvalidParameterError(f"scale factor must be positive, got {value!r}")
    return f


def scaled_dim(dim: int, factor: float) -> int:
    # round-half-up; Python's round() would send 2.5 -> 2
    return max(1, int(math.floor(dim * factor + 0.5)))


def cubic_weight(x, a: float = BICUBIC_A):
    """Keys cubic convolution kernel."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    near = (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0
    far = a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def _axis_table(n_in: int, n_out: int, ratio: float, method: ScaleMethod):
    """Return (indices, weights), each shaped (taps, n_out)."""
    dst = np.arange(n_out, dtype=np.float64)
    src = (dst + 0.5) / ratio - 0.5
    if method is ScaleMethod.NEAREST:
        idx = np.floor((dst + 0.5) / ratio).astype(np.int64)
        return np.clip(idx, 0, n_in - 1)[None, :], np.ones((1, n_out))
    base = np.floor(src)
    frac = src - base
    base = base.astype(np.int64)
    if method is ScaleMethod.BILINEAR:
        offsets = np.array([0, 1])
        weights = np.stack([1.0 - frac, frac])
    else:
        offsets = np.array([-1, 0, 1, 2])
        weights = cubic_weight(offsets[:, None] - frac[None, :])
    idx = np.clip(base[None, :] + offsets[:, None], 0, n_in - 1)
    return idx, weights


def _resample_axis(arr: np.ndarray, axis: int, n_out: int, ratio: float, method):
    idx, w = _axis_table(arr.shape[axis], n_out, ratio, method)
    shape = [1] * arr.ndim
    shape[axis] = n_out
    out = np.zeros(arr.shape[:axis] + (n_out,) + arr.shape[axis + 1 :], dtype=np.float64)
    for t in range(idx.shape[0]):
        out += np.take(arr, idx[t], axis=axis) * w[t].reshape(shape)
    return out


def _resample(img: RasterImage, out_h: int, out_w: int, ratio_y: float, ratio_x: float, method):
    method = ScaleMethod.parse(method)
    arr = img.data.astype(np.float64)
    if (out_h, out_w) == (img.height, img.width) and ratio_y == 1.0 and ratio_x == 1.0:
        return RasterImage(img.data)
    arr = _resample_axis(arr, 0, out_h, ratio_y, method)
    arr = _resample_axis(arr, 1, out_w, ratio_x, method)
    return RasterImage(np.clip(arr, 0.0, 1.0).astype(np.float32))


def scale(img: RasterImage, factor, method) -> RasterImage:
    """Scale both axes by ``factor``; output dims are ``max(1, round(dim * factor))``."""
    f = parse_factor(factor)
    return _resample(img, scaled_dim(img.height, f), scaled_dim(img.width, f), f, f, method)


def resize(img: RasterImage, size: tuple[int, int], method) -> RasterImage:
    """Resample to an exact ``(height, width)``; the per-axis ratio is out/in."""
    out_h, out_w = (int(s) for s in size)
    if out_h < 1 or out_w < 1:
        raise InvalidParameterError(f"target size must be positive, got {size}")
    return _resample(img, out_h, out_w, out_h / img.height, out_w / img.width, method)


def degrade(img: RasterImage, down, method) -> RasterImage:
    """Synthesise a low-resolution twin: shrink by ``down``, enlarge back to the original size."""
    f = parse_factor(down)
    if not f < 1.0:
        raise InvalidParameterError(f"degradation factor must be below 1, got {down!r}")
    small = scale(img, f, method)
    return resize(small, (img.height, img.width), method)
