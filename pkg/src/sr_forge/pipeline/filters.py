"""Sharpening, Gaussian blur, bilateral filter and non-local means.

Borders are handled by clamping coordinates to the nearest edge pixel
(``np.pad(mode="edge")``).  Every filter keeps the image size and clamps its
output to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidParameterError
from ..imagecore import RasterImage

__all__ = [
    "SHARPEN_KERNEL",
    "DenoiseParams",
    "sharpen",
    "gaussian_kernel",
    "gaussian_blur",
    "bilateral_filter",
    "nlm_denoise",
    "apply_denoise",
    "template_sigma",
]

SHARPEN_KERNEL = np.array([[0, -1, 0], [-1, 5, -1], [0, -1, 0]], dtype=np.float64)


@dataclass(frozen=True)
class DenoiseParams:
    """Which denoiser to run and its settings.

    ``method`` is ``"none"``, ``"bilateral"`` or ``"nlm"``; fields for the
    other methods are ignored.
    """

    method: str = "bilateral"
    diameter: int = 5
    sigma_color: float = 0.1
    sigma_space: float = 2.0
    h: float = 0.04
    template_size: int = 7
    search_size: int = 21

    def __post_init__(self):
        if self.method not in ("none", "bilateral", "nlm"):
            raise InvalidParameterError(f"unknown denoise method {self.method!r}")
        if self.method == "bilateral":
            _check_bilateral(self.diameter, self.sigma_color, self.sigma_space)
        elif self.method == "nlm":
            _check_nlm(self.h, self.template_size, self.search_size)

    @classmethod
    def none(cls) -> "DenoiseParams":
        return cls(method="none")

    @classmethod
    def bilateral(cls, diameter=5, sigma_color=0.1, sigma_space=2.0) -> "DenoiseParams":
        return cls("bilateral", diameter, sigma_color, sigma_space)

    @classmethod
    def nlm(cls, h=0.04, template_size=7, search_size=21) -> "DenoiseParams":
        return cls("nlm", h=h, template_size=template_size, search_size=search_size)


def _check_bilateral(diameter, sigma_color, sigma_space):
    if diameter < 3 or diameter % 2 == 0:
        raise InvalidParameterError(f"bilateral diameter must be odd and >= 3, got {diameter}")
    if not (sigma_color > 0 and sigma_space > 0):
        raise InvalidParameterError("bilateral sigmas must be positive")


def _check_nlm(h, template_size, search_size):
    if not h > 0:
        raise InvalidParameterError(f"NLM strength h must be positive, got {h}")
    for name, v in (("template_size", template_size), ("search_size", search_size)):
        if v < 1 or v % 2 == 0:
            raise InvalidParameterError(f"{name} must be odd and positive, got {v}")
    if template_size >= search_size:
        raise InvalidParameterError("template window must be smaller than the search window")


def _correlate_edge(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2-D correlation of an (H, W, C) float64 array with clamp-to-edge borders."""
    kh, kw = kernel.shape
    pad = ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0))
    padded = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr)
    h, w = arr.shape[:2]
    for i in range(kh):
        for j in range(kw):
            if kernel[i, j] != 0.0:
                out += kernel[i, j] * padded[i : i + h, j : j + w]
    return out


def sharpen(img: RasterImage) -> RasterImage:
    return RasterImage.clipped(_correlate_edge(img.data.astype(np.float64), SHARPEN_KERNEL))


def gaussian_kernel(diameter: int, sigma: float) -> np.ndarray:
    ax = np.arange(diameter, dtype=np.float64) - diameter // 2
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_blur(img: RasterImage, diameter: int, sigma: float) -> RasterImage:
    return RasterImage.clipped(_correlate_edge(img.data.astype(np.float64),
                                               gaussian_kernel(diameter, sigma)))


def bilateral_filter(img: RasterImage, diameter: int = 5, sigma_color: float = 0.1,
                     sigma_space: float = 2.0) -> RasterImage:
    """Edge-preserving smoothing over a square ``diameter`` window.

    Neighbour weight is ``exp(-d_space^2 / 2 sigma_space^2) * exp(-d_color^2 / 2 sigma_color^2)``
    where ``d_color`` is the Euclidean distance across channels.
    """
    _check_bilateral(diameter, sigma_color, sigma_space)
    x = img.data.astype(np.float64)
    r = diameter // 2
    padded = np.pad(x, ((r, r), (r, r), (0, 0)), mode="edge")
    h, w = x.shape[:2]
    num = np.zeros_like(x)
    den = np.zeros((h, w, 1))
    inv_space = 1.0 / (2.0 * sigma_space * sigma_space)
    inv_color = 1.0 / (2.0 * sigma_color * sigma_color)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            nb = padded[r + dy : r + dy + h, r + dx : r + dx + w]
            d2 = np.sum((nb - x) ** 2, axis=2, keepdims=True)
            wgt = np.exp(-(dy * dy + dx * dx) * inv_space - d2 * inv_color)
            num += wgt * nb
            den += wgt
    return RasterImage.clipped(num / den)


def template_sigma(template_size: int) -> float:
    """Spread of the Gaussian that weights squared differences inside an NLM template."""
    return max(template_size / 4.0, 0.5)


def nlm_denoise(img: RasterImage, h: float = 0.04, template_size: int = 7,
                search_size: int = 21) -> RasterImage:
    """Non-local means.

    For every pixel and every offset in the ``search_size`` window, the
    Gaussian-weighted mean squared difference ``d2`` between the two
    ``template_size`` patches (averaged over channels) gives the weight
    ``exp(-d2 / h^2)``.  The output is the weight-normalised average of the
    offset pixels.  The centre pixel always has weight 1, so ``h -> 0``
    tends to the identity.
    """
    _check_nlm(h, template_size, search_size)
    x = img.data.astype(np.float64)
    hgt, wid, ch = x.shape
    rs, rt = search_size // 2, template_size // 2
    pad = rs + rt
    padded = np.pad(x, ((pad, pad), (pad, pad), (0, 0)), mode="edge")
    g = gaussian_kernel(template_size, template_sigma(template_size))
    # region whose template-filtered values land on the image: (hgt + 2rt, wid + 2rt)
    core = padded[rs : rs + hgt + 2 * rt, rs : rs + wid + 2 * rt]
    num = np.zeros_like(x)
    den = np.zeros((hgt, wid, 1))
    inv_h2 = 1.0 / (h * h)
    for dy in range(-rs, rs + 1):
        for dx in range(-rs, rs + 1):
            shifted = padded[rs + dy : rs + dy + hgt + 2 * rt, rs + dx : rs + dx + wid + 2 * rt]
            diff = np.mean((core - shifted) ** 2, axis=2)
            d2 = np.einsum("ijkl,kl->ij", sliding_window_view(diff, g.shape), g)
            wgt = np.exp(-d2 * inv_h2)[:, :, None]
            num += wgt * shifted[rt : rt + hgt, rt : rt + wid]
            den += wgt
    return RasterImage.clipped(num / den)


def apply_denoise(img: RasterImage, params: DenoiseParams | None) -> RasterImage:
    if params is None or params.method == "none":
        return img
    if params.method == "bilateral":
        return bilateral_filter(img, params.diameter, params.sigma_color, params.sigma_space)
    return nlm_denoise(img, params.h, params.template_size, params.search_size)
