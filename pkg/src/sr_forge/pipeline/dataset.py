"""Training-pair synthesis and the packed dataset archive.

Archive layout (little-endian)::

    "SRDS"          magic
    u32             version (= 1)
    u32             patch_size
    u32             channels
    u64             pair count
    pairs           LR patch then HR patch, each patch_size^2 * channels f32 (H, W, C order)
    u32 + bytes     manifest, UTF-8 JSON list of entries

Each manifest entry records ``filename``, ``degradation``, ``split``
("train", "val" or "test") and the ``[first, count]`` slice of pairs it owns.
Test-split images are listed but contribute no pairs.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagicError,
    ChannelMismatchError,
    CorruptFileError,
    DataError,
    DimensionMismatchError,
    IOFailure,
    InvalidParameterError,
    ShapeInconsistencyError,
    TruncatedFileError,
    VersionMismatchError,
)
from ..imagecore import PatchPair, RasterImage, patch_origins, rgb_to_ycbcr
from ..interp import ScaleMethod, degrade
from .filters import DenoiseParams, apply_denoise, sharpen

log = logging.getLogger(__name__)

__all__ = [
    "DatasetArchive",
    "make_training_pair",
    "preprocess_corpus",
    "assign_splits",
    "save_archive",
    "load_archive",
    "encode_archive",
    "decode_archive",
]

MAGIC = b"SRDS"
VERSION = 1
SPLITS = ("train", "val", "test")


@dataclass
class DatasetArchive:
    """Aligned LR/HR patches stored as two (N, size, size, C) float32 arrays."""

    patch_size: int
    channels: int
    lr: np.ndarray
    hr: np.ndarray
    manifest: list[dict] = field(default_factory=list)

    def __post_init__(self):
        shape = (len(self.lr), self.patch_size, self.patch_size, self.channels)
        self.lr = np.ascontiguousarray(self.lr, dtype=np.float32).reshape(shape)
        self.hr = np.ascontiguousarray(self.hr, dtype=np.float32).reshape(shape)
        if self.lr.shape != self.hr.shape:
            raise ShapeInconsistencyError("LR and HR patch stacks differ in shape")

    def __len__(self) -> int:
        return len(self.lr)

    @property
    def pairs(self) -> list[PatchPair]:
        return [PatchPair(RasterImage(a), RasterImage(b)) for a, b in zip(self.lr, self.hr)]

    def indices(self, split: str) -> np.ndarray:
        """Pair indices owned by manifest entries of one split."""
        idx = []
        for entry in self.manifest:
            if entry.get("split", "train") == split:
                first, count = entry["pairs"]
                idx.extend(range(first, first + count))
        return np.asarray(idx, dtype=np.int64)

    def nchw(self, idx=None) -> tuple[np.ndarray, np.ndarray]:
        lr = self.lr if idx is None else self.lr[idx]
        hr = self.hr if idx is None else self.hr[idx]
        return (np.ascontiguousarray(lr.transpose(0, 3, 1, 2)),
                np.ascontiguousarray(hr.transpose(0, 3, 1, 2)))


def assign_splits(names, ratios=(8, 1, 1)) -> dict[str, str]:
    """Deterministic train/val/test assignment in the given proportions.

    Names are sorted; the last ``val`` and ``test`` shares (rounded) go to
    validation and test, and training always keeps at least one image.
    """
    names = sorted(names)
    n = len(names)
    total = float(sum(ratios))
    n_test = int(round(n * ratios[2] / total))
    n_val = int(round(n * ratios[1] / total))
    while n_val + n_test >= n and (n_val or n_test):
        if n_test >= n_val and n_test:
            n_test -= 1
        else:
            n_val -= 1
    out = {}
    for i, name in enumerate(names):
        if i >= n - n_test:
            out[name] = "test"
        elif i >= n - n_test - n_val:
            out[name] = "val"
        else:
            out[name] = "train"
    return out


def make_training_pair(img: RasterImage, degradation, *, sharpen_first: bool = True,
                       denoise: DenoiseParams | None = None, down: float = 0.5,
                       channels: int = 1) -> tuple[RasterImage, RasterImage]:
    """Clean an image into HR ground truth and synthesise its LR twin, in YCbCr.

    HR is the image sharpened and then denoised; LR is HR shrunk by ``down``
    and enlarged back with the same interpolation.  Returns the Y planes
    (``channels=1``) or full Y/Cb/Cr stacks (``channels=3``).
    """
    if channels not in (1, 3):
        raise ChannelMismatchError(f"archive channels must be 1 or 3, got {channels}")
    hr = sharpen(img) if sharpen_first else img
    hr = apply_denoise(hr, denoise)
    lr = degrade(hr, down, ScaleMethod.parse(degradation))
    if hr.channels == 1:
        if channels == 3:
            raise ChannelMismatchError("3-channel archives need RGB sources")
        return lr, hr
    lr_ycc, hr_ycc = rgb_to_ycbcr(lr), rgb_to_ycbcr(hr)
    if channels == 1:
        return lr_ycc.y, hr_ycc.y
    return lr_ycc.stacked(), hr_ycc.stacked()


def preprocess_corpus(images, degradation="bilinear", *, sharpen_first: bool = True,
                      denoise: DenoiseParams | None = None, patch_size: int = 32,
                      stride: int = 16, channels: int = 1, down: float = 0.5,
                      splits: dict[str, str] | None = None) -> DatasetArchive:
    """Build a training archive from ``images``.

    ``images`` is a sequence of RasterImages or ``(name, RasterImage)`` pairs;
    order is preserved.  ``splits`` maps names to "train"/"val"/"test"
    (default: everything trains).
    """
    items = []
    for i, item in enumerate(images):
        if isinstance(item, RasterImage):
            items.append((f"image_{i:04d}", item))
        else:
            items.append((str(item[0]), item[1]))
    if not items:
        raise DataError("cannot preprocess an empty corpus")
    method = ScaleMethod.parse(degradation)
    if stride < 1 or patch_size < 1:
        raise InvalidParameterError("patch size and stride must be positive")

    lr_patches, hr_patches, manifest = [], [], []
    for name, img in items:
        if min(img.height, img.width) < patch_size:
            raise DimensionMismatchError(
                f"{name}: {img.width}x{img.height} is smaller than the {patch_size}px patch"
            )
        split = (splits or {}).get(name, "train")
        if split not in SPLITS:
            raise InvalidParameterError(f"unknown split {split!r} for {name}")
        first = len(lr_patches)
        if split != "test":
            lr, hr = make_training_pair(img, method, sharpen_first=sharpen_first,
                                        denoise=denoise, down=down, channels=channels)
            for top, left in patch_origins(lr.height, lr.width, patch_size, stride):
                lr_patches.append(lr.data[top : top + patch_size, left : left + patch_size])
                hr_patches.append(hr.data[top : top + patch_size, left : left + patch_size])
        manifest.append({
            "filename": name,
            "degradation": method.value,
            "split": split,
            "pairs": [first, len(lr_patches) - first],
        })
        log.debug("%s: %d pairs (%s)", name, len(lr_patches) - first, split)

    shape = (0, patch_size, patch_size, channels)
    lr_arr = np.stack(lr_patches) if lr_patches else np.zeros(shape, np.float32)
    hr_arr = np.stack(hr_patches) if hr_patches else np.zeros(shape, np.float32)
    return DatasetArchive(patch_size, channels, lr_arr, hr_arr, manifest)


def encode_archive(archive: DatasetArchive) -> bytes:
    head = MAGIC + struct.pack("<IIIQ", VERSION, archive.patch_size, archive.channels,
                               len(archive))
    body = np.stack([archive.lr, archive.hr], axis=1).astype("<f4").tobytes()
    manifest = json.dumps(archive.manifest, sort_keys=True).encode("utf-8")
    return head + body + struct.pack("<I", len(manifest)) + manifest


def decode_archive(buf: bytes) -> DatasetArchive:
    if len(buf) < 4:
        if MAGIC.startswith(buf):
            raise TruncatedFileError("archive shorter than its magic")
        raise BadMagicError("not a dataset archive")
    if buf[:4] != MAGIC:
        raise BadMagicError(f"not a dataset archive (magic {buf[:4]!r})")
    head = struct.calcsize("<IIIQ")
    if len(buf) < 4 + head:
        raise TruncatedFileError("archive header truncated")
    version, size, channels, count = struct.unpack_from("<IIIQ", buf, 4)
    if version != VERSION:
        raise VersionMismatchError(f"archive version {version}, expected {VERSION}")
    if size < 1 or channels not in (1, 3):
        raise ShapeInconsistencyError(f"bad archive geometry: size={size}, channels={channels}")
    pos = 4 + head
    nbytes = count * 2 * size * size * channels * 4
    if len(buf) < pos + nbytes + 4:
        raise TruncatedFileError(f"archive truncated: {len(buf)} bytes, payload needs "
                                 f"{pos + nbytes + 4}")
    data = np.frombuffer(buf, dtype="<f4", count=nbytes // 4, offset=pos)
    data = data.astype(np.float32).reshape(count, 2, size, size, channels)
    pos += nbytes
    (mlen,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    if len(buf) < pos + mlen:
        raise TruncatedFileError("archive manifest truncated")
    if len(buf) > pos + mlen:
        raise CorruptFileError("unexpected bytes after archive manifest")
    try:
        manifest = json.loads(buf[pos : pos + mlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"bad archive manifest: {exc}") from exc
    return DatasetArchive(size, channels, data[:, 0], data[:, 1], manifest)


def save_archive(archive: DatasetArchive, path) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_archive(archive))
    except OSError as exc:
        raise IOFailure(f"cannot write archive {path}: {exc}") from exc


def load_archive(path) -> DatasetArchive:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise IOFailure(f"cannot read archive {path}: {exc}") from exc
    return decode_archive(buf)
