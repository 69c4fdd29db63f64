"""Inference: pre-upsample, enhance luma with the network, merge chroma back."""

from __future__ import annotations

import enum

import numpy as np

from ..errors import ChannelMismatchError, InvalidParameterError
from ..imagecore import RasterImage, YCbCrImage, rgb_to_ycbcr, ycbcr_to_rgb
from ..interp import ScaleMethod, scale
from ..neuralnet import Checkpoint, Network
from .filters import DenoiseParams, apply_denoise

__all__ = [
    "PostProcessMode",
    "as_network",
    "run_network",
    "enhance",
    "upscale",
    "post_process",
    "receptive_radius",
]

UPSCALE_FACTORS = (2, 3, 4)
# Above this many pixels the network runs over horizontal bands to bound memory.
BAND_PIXELS = 1 << 15


class PostProcessMode(str, enum.Enum):
    ENHANCE_ONLY = "enhance-only"
    ENLARGE_ENHANCE = "enlarge-enhance"
    DOUBLE_ENHANCE = "double-enhance"
    DOUBLE_ENLARGE = "double-enlarge"

    @classmethod
    def parse(cls, value) -> "PostProcessMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("_", "-"))
        except ValueError:
            raise InvalidParameterError(f"unknown post-processing mode {value!r}") from None


def as_network(model) -> Network:
    if isinstance(model, Network):
        return model
    if isinstance(model, Checkpoint):
        return model.network()
    raise TypeError(f"expected a Network or Checkpoint, got {type(model).__name__}")


def receptive_radius(net: Network) -> int:
    return sum(layer.kernel // 2 for layer in net.spec.layers)


def run_network(net: Network, planes: np.ndarray) -> np.ndarray:
    """Apply ``net`` to an (H, W, C) array and return (H, W, C_out).

    Large inputs go through in row bands padded by the receptive radius, so
    every kept output row sees exactly the context it would see in one pass.
    """
    h, w, _ = planes.shape
    x = np.ascontiguousarray(planes.transpose(2, 0, 1)[None], dtype=net.dtype)
    strided = any(layer.stride != 1 for layer in net.spec.layers)
    if h * w <= BAND_PIXELS or strided:
        return net.forward(x, cache=False)[0].transpose(1, 2, 0)
    halo = receptive_radius(net)
    rows = max(1, BAND_PIXELS // w - 2 * halo)
    out = []
    for r0 in range(0, h, rows):
        r1 = min(h, r0 + rows)
        a0, a1 = max(0, r0 - halo), min(h, r1 + halo)
        y = net.forward(x[:, :, a0:a1], cache=False)
        out.append(y[0, :, r0 - a0 : r0 - a0 + (r1 - r0)])
    return np.concatenate(out, axis=1).transpose(1, 2, 0)


def _enhance_planes(img: RasterImage, net: Network) -> RasterImage:
    """Network pass at the current size, on luma (1-channel nets) or all YCbCr planes."""
    cin = net.spec.input_channels
    if img.channels == 1:
        if cin != 1:
            raise ChannelMismatchError(f"a {cin}-channel network cannot enhance a grayscale image")
        return RasterImage.clipped(run_network(net, img.data))
    ycc = rgb_to_ycbcr(img)
    if cin == 1:
        y = RasterImage.clipped(run_network(net, ycc.y.data)[:, :, :1])
        return ycbcr_to_rgb(YCbCrImage(y, ycc.cb, ycc.cr))
    if cin == 3:
        out = RasterImage.clipped(run_network(net, ycc.stacked().data))
        return ycbcr_to_rgb(YCbCrImage.from_stacked(out))
    raise ChannelMismatchError(f"unsupported network input channels: {cin}")


def enhance(img: RasterImage, model, denoise: DenoiseParams | None = None) -> RasterImage:
    """Enhance without resizing, then optionally denoise."""
    return apply_denoise(_enhance_planes(img, as_network(model)), denoise)


def upscale(img: RasterImage, model, factor: int = 2,
            denoise: DenoiseParams | None = None) -> RasterImage:
    """Enlarge by ``factor`` with bicubic interpolation, then enhance.

    Chroma keeps its bicubic values; only luma passes through a 1-channel
    network.  Output size is exactly ``factor`` times the input.
    """
    if factor not in UPSCALE_FACTORS:
        raise InvalidParameterError(f"upscale factor must be one of {UPSCALE_FACTORS}, "
                                    f"got {factor!r}")
    big = scale(img, factor, ScaleMethod.BICUBIC)
    return enhance(big, model, denoise)


def post_process(img: RasterImage, mode, model, denoise: DenoiseParams | None = None,
                 factor: int = 2) -> RasterImage:
    mode = PostProcessMode.parse(mode)
    net = as_network(model)
    if mode is PostProcessMode.ENHANCE_ONLY:
        return enhance(img, net, denoise)
    if mode is PostProcessMode.ENLARGE_ENHANCE:
        return upscale(img, net, factor, denoise)
    if mode is PostProcessMode.DOUBLE_ENHANCE:
        once = post_process(img, PostProcessMode.ENHANCE_ONLY, net, denoise)
        return post_process(once, PostProcessMode.ENHANCE_ONLY, net, denoise)
    once = upscale(img, net, 2, denoise)
    return upscale(once, net, 2, denoise)
