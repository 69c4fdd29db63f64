"""Raster images, YCbCr conversion, training-patch extraction and file I/O.

Pixels live as float32 in ``[0, 1]`` with layout ``(height, width, channels)``.
Files store 8-bit samples; loading divides by 255 and saving rounds
``v * 255`` and clamps.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    ChannelMismatchError,
    CorruptFileError,
    DataError,
    DimensionMismatchError,
    ImageNotFoundError,
    InvalidParameterError,
    IOFailure,
    UnsupportedFormatError,
)

__all__ = [
    "RasterImage",
    "YCbCrImage",
    "PatchPair",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "extract_patches",
    "patch_count",
    "load_image",
    "save_image",
    "READ_SUFFIXES",
    "WRITE_SUFFIXES",
]

# Full-range (JPEG / JFIF) BT.601 matrix. Chroma rows get a +0.5 offset.
_RGB_TO_YCBCR = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ],
    dtype=np.float64,
)
_YCBCR_TO_RGB = np.array(
    [
        [1.0, 0.0, 1.402],
        [1.0, -0.344136, -0.714136],
        [1.0, 1.772, 0.0],
    ],
    dtype=np.float64,
)

READ_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm", ".jpg", ".jpeg")
WRITE_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable H x W x C grid of float32 samples in [0, 1], C in {1, 3}."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise DataError(f"expected an (H, W, C) array, got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise ChannelMismatchError(f"channels must be 1 or 3, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"empty image of shape {arr.shape}")
        arr = np.array(arr, dtype=np.float32, copy=True)
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise DataError("pixel values must be finite and lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def clipped(cls, arr) -> "RasterImage":
        """Build from arbitrary floats, clamping into [0, 1]."""
        return cls(np.clip(np.asarray(arr, dtype=np.float32), 0.0, 1.0))

    @classmethod
    def from_u8(cls, arr) -> "RasterImage":
        arr = np.asarray(arr)
        if arr.dtype != np.uint8:
            raise DataError(f"expected uint8 samples, got {arr.dtype}")
        return cls(arr.astype(np.float32) / np.float32(255.0))

    def to_u8(self) -> np.ndarray:
        return np.clip(np.rint(self.data * np.float32(255.0)), 0, 255).astype(np.uint8)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def plane(self, c: int) -> "RasterImage":
        return RasterImage(self.data[:, :, c : c + 1])

    def crop(self, top: int, left: int, height: int, width: int) -> "RasterImage":
        if top < 0 or left < 0 or top + height > self.height or left + width > self.width:
            raise DimensionMismatchError(
                f"crop ({top}, {left}, {height}, {width}) outside {self.height}x{self.width}"
            )
        return RasterImage(self.data[top : top + height, left : left + width])

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True)
class YCbCrImage:
    y: RasterImage
    cb: RasterImage
    cr: RasterImage

    def __post_init__(self):
        dims = {(p.height, p.width) for p in (self.y, self.cb, self.cr)}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Y/Cb/Cr planes differ in size: {sorted(dims)}")
        for p in (self.y, self.cb, self.cr):
            if p.channels != 1:
                raise ChannelMismatchError("YCbCr planes must be single-channel")

    def stacked(self) -> RasterImage:
        """The three planes as one 3-channel image (Y, Cb, Cr order)."""
        return RasterImage(np.concatenate([self.y.data, self.cb.data, self.cr.data], axis=2))

    @classmethod
    def from_stacked(cls, img: RasterImage) -> "YCbCrImage":
        if img.channels != 3:
            raise ChannelMismatchError("stacked YCbCr needs 3 channels")
        return cls(img.plane(0), img.plane(1), img.plane(2))


@dataclass(frozen=True)
class PatchPair:
    lr: RasterImage
    hr: RasterImage

    def __post_init__(self):
        if self.lr.shape != self.hr.shape:
            raise DimensionMismatchError(f"patch shapes differ: {self.lr.shape} vs {self.hr.shape}")


def rgb_to_ycbcr(img: RasterImage) -> YCbCrImage:
    if img.channels != 3:
        raise ChannelMismatchError(f"rgb_to_ycbcr needs 3 channels, got {img.channels}")
    rgb = img.data.astype(np.float64)
    out = rgb @ _RGB_TO_YCBCR.T
    out[:, :, 1:] += 0.5
    out = np.clip(out, 0.0, 1.0).astype(np.float32)
    return YCbCrImage(
        RasterImage(out[:, :, 0:1]), RasterImage(out[:, :, 1:2]), RasterImage(out[:, :, 2:3])
    )


def ycbcr_to_rgb(img: YCbCrImage) -> RasterImage:
    ycc = img.stacked().data.astype(np.float64)
    ycc[:, :, 1:] -= 0.5
    rgb = ycc @ _YCBCR_TO_RGB.T
    return RasterImage(np.clip(rgb, 0.0, 1.0).astype(np.float32))


def patch_count(height: int, width: int, size: int, stride: int) -> int:
    return ((height - size) // stride + 1) * ((width - size) // stride + 1)


def patch_origins(height: int, width: int, size: int, stride: int) -> list[tuple[int, int]]:
    """Top-left corners of the patches, row-major; residual borders are dropped."""
    return [
        (top, left)
        for top in range(0, height - size + 1, stride)
        for left in range(0, width - size + 1, stride)
    ]


def extract_patches(
    lr: RasterImage, hr: RasterImage, size: int = 32, stride: int = 16
) -> list[PatchPair]:
    """Cut co-located ``size`` x ``size`` patches out of an aligned LR/HR pair."""
    if lr.shape != hr.shape:
        raise DimensionMismatchError(f"LR {lr.shape} and HR {hr.shape} must match")
    if size < 1 or stride < 1:
        raise InvalidParameterError("size and stride must be positive")
    if size > min(lr.height, lr.width):
        raise DimensionMismatchError(
            f"patch size {size} exceeds image {lr.height}x{lr.width}"
        )
    return [
        PatchPair(lr.crop(t, l, size, size), hr.crop(t, l, size, size))
        for t, l in patch_origins(lr.height, lr.width, size, stride)
    ]


# ---------------------------------------------------------------------------
# File I/O


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos : pos + 1]
        if ch == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise CorruptFileError("PNM header ended early")
    return buf[start:pos], pos


def _decode_pnm(buf: bytes) -> np.ndarray:
    magic, pos = _read_token(buf, 0)
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormatError(f"only binary P5/P6 PNM is supported, got {magic!r}")
    try:
        width_tok, pos = _read_token(buf, pos)
        height_tok, pos = _read_token(buf, pos)
        maxval_tok, pos = _read_token(buf, pos)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError as exc:
        raise CorruptFileError(f"bad PNM header: {exc}") from exc
    if maxval != 255:
        raise UnsupportedFormatError(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise CorruptFileError("PNM has empty dimensions")
    channels = 3 if magic == b"P6" else 1
    pos += 1  # exactly one whitespace byte separates header and raster
    expected = width * height * channels
    raster = buf[pos : pos + expected]
    if len(raster) != expected:
        raise CorruptFileError(f"PNM raster truncated: {len(raster)} of {expected} bytes")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)


def _encode_pnm(u8: np.ndarray) -> bytes:
    h, w, c = u8.shape
    magic = b"P6" if c == 3 else b"P5"
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(u8).tobytes()


def load_image(path) -> RasterImage:
    """Read PNG, binary PPM/PGM or (decode-only) JPEG into a RasterImage.

    Grayscale stays single-channel; palette, alpha and 16-bit inputs are
    reduced to 8-bit RGB.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if not path.exists():
        raise ImageNotFoundError(f"no such image: {path}")
    if suffix not in READ_SUFFIXES:
        raise UnsupportedFormatError(f"unsupported image format: {suffix or '<none>'}")
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc

    if suffix in (".ppm", ".pgm", ".pnm"):
        return RasterImage.from_u8(_decode_pnm(raw))

    try:
        with Image.open(io.BytesIO(raw)) as im:
            im.load()
            if im.mode not in ("L", "RGB"):
                im = im.convert("L" if im.mode in ("1", "I", "I;16", "F") else "RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise CorruptFileError(f"cannot decode {path}: {exc}") from exc
    return RasterImage.from_u8(arr)


def save_image(img: RasterImage, path) -> None:
    """Write PNG or binary PNM. JPEG is never written (recompression loss)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in WRITE_SUFFIXES:
        raise UnsupportedFormatError(f"cannot write format: {suffix or '<none>'}")
    u8 = img.to_u8()
    try:
        if suffix in (".ppm", ".pgm", ".pnm"):
            if suffix == ".ppm" and img.channels != 3:
                u8 = np.repeat(u8, 3, axis=2)
            if suffix == ".pgm" and img.channels != 1:
                raise ChannelMismatchError("PGM output needs a single-channel image")
            path.write_bytes(_encode_pnm(u8))
        else:
            Image.fromarray(u8 if img.channels == 3 else u8[:, :, 0]).save(path, format="PNG")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def list_images(directory) -> list[Path]:
    """Readable-looking image files in ``directory``, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageNotFoundError(f"not a directory: {directory}")
    return sorted(
        p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in READ_SUFFIXES
    )


def as_raster(arr) -> RasterImage:
    return arr if isinstance(arr, RasterImage) else RasterImage(arr)

