"""Binary checkpoint files.

Layout (all little-endian)::

    "MSRC"                      magic
    u32   version (= 1)
    u32   input_channels
    u32   layer count
    per layer: u8 kind, u32 filters, u32 kernel, u32 stride, u8 activation, f32 slope, u8 bias
    u32   epoch
    u32   loss-history length, then that many f32
    per layer: u32 x4 weight dims + f32 data, u32 bias length + f32 data

An optional trailer may follow: ``"META"``, u32 byte length, UTF-8 JSON.
It carries training settings (learning rate, batch size, seed, ...).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagicError,
    CorruptFileError,
    IOFailure,
    ShapeInconsistencyError,
    TruncatedFileError,
    VersionMismatchError,
)
from .network import CONV, CONV_TRANSPOSE, LEAKY_RELU, SIGMOID, LayerSpec, Network, NetworkSpec

__all__ = ["Checkpoint", "save_checkpoint", "load_checkpoint", "encode_checkpoint",
           "decode_checkpoint", "MAGIC", "VERSION"]

MAGIC = b"MSRC"
META_MAGIC = b"META"
VERSION = 1

_KINDS = {CONV: 0, CONV_TRANSPOSE: 1}
_ACTS = {LEAKY_RELU: 0, SIGMOID: 1}


@dataclass
class Checkpoint:
    spec: NetworkSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    epoch: int = 0
    loss_history: list[float] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_network(cls, net: Network, epoch: int = 0, loss_history=(), metadata=None):
        return cls(
            net.spec,
            [w.astype(np.float32) for w in net.weights],
            [b.astype(np.float32) for b in net.biases],
            epoch,
            [float(v) for v in loss_history],
            dict(metadata or {}),
        )

    def network(self, dtype=np.float32) -> Network:
        return Network(self.spec, self.weights, self.biases, dtype)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedFileError(
                f"checkpoint truncated at byte {len(self.buf)} (needed {self.pos + n})"
            )
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack("<" + fmt, self.take(struct.calcsize("<" + fmt)))

    def f32(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32)

    @property
    def remaining(self) -> int:
        return len(self.buf) - self.pos


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    spec = ckpt.spec
    parts = [MAGIC, struct.pack("<III", VERSION, spec.input_channels, len(spec.layers))]
    for layer in spec.layers:
        parts.append(struct.pack("<BIIIBfB", _KINDS[layer.kind], layer.filters, layer.kernel,
                                 layer.stride, _ACTS[layer.activation], layer.slope,
                                 int(layer.bias)))
    parts.append(struct.pack("<II", ckpt.epoch, len(ckpt.loss_history)))
    parts.append(np.asarray(ckpt.loss_history, dtype="<f4").tobytes())
    for w, b in zip(ckpt.weights, ckpt.biases):
        w = np.asarray(w, dtype="<f4")
        b = np.asarray(b, dtype="<f4")
        if w.ndim != 4:
            raise ShapeInconsistencyError(f"weight tensors must be 4-D, got {w.shape}")
        parts.append(struct.pack("<IIII", *w.shape))
        parts.append(w.tobytes())
        parts.append(struct.pack("<I", b.size))
        parts.append(b.tobytes())
    if ckpt.metadata:
        meta = json.dumps(ckpt.metadata, sort_keys=True).encode("utf-8")
        parts += [META_MAGIC, struct.pack("<I", len(meta)), meta]
    return b"".join(parts)


def decode_checkpoint(buf: bytes) -> Checkpoint:
    r = _Reader(buf)
    magic = r.take(4) if len(buf) >= 4 else None
    if magic != MAGIC:
        if magic is None and MAGIC.startswith(buf):
            raise TruncatedFileError("checkpoint shorter than its magic")
        raise BadMagicError(f"not a checkpoint file (magic {buf[:4]!r})")
    (version,) = r.unpack("I")
    if version != VERSION:
        raise VersionMismatchError(f"checkpoint version {version}, expected {VERSION}")
    in_ch, n_layers = r.unpack("II")
    kinds = {v: k for k, v in _KINDS.items()}
    acts = {v: k for k, v in _ACTS.items()}
    layers = []
    for _ in range(n_layers):
        kind, filters, kernel, stride, act, slope, bias = r.unpack("BIIIBfB")
        # shortest decimal that maps to the same f32, so 0.3 reads back as 0.3
        slope = float(str(np.float32(slope)))
        if kind not in kinds or act not in acts:
            raise CorruptFileError(f"unknown layer code (kind={kind}, activation={act})")
        try:
            layers.append(LayerSpec(kinds[kind], filters, kernel, acts[act], slope,
                                    bool(bias), stride))
        except ValueError as exc:
            raise ShapeInconsistencyError(f"invalid layer description: {exc}") from exc
    try:
        spec = NetworkSpec(in_ch, tuple(layers))
    except ValueError as exc:
        raise ShapeInconsistencyError(str(exc)) from exc
    epoch, n_hist = r.unpack("II")
    history = [float(v) for v in r.f32(n_hist)]
    weights, biases = [], []
    for i, expected in enumerate(spec.weight_shapes()):
        dims = r.unpack("IIII")
        if tuple(dims) != expected:
            raise ShapeInconsistencyError(f"layer {i}: weight dims {dims}, spec implies {expected}")
        weights.append(r.f32(int(np.prod(dims))).reshape(dims))
        (blen,) = r.unpack("I")
        if blen != spec.layers[i].filters:
            raise ShapeInconsistencyError(f"layer {i}: bias length {blen}, expected "
                                          f"{spec.layers[i].filters}")
        biases.append(r.f32(blen))
    metadata = {}
    if r.remaining:
        if r.remaining < 4:
            raise TruncatedFileError("checkpoint trailer truncated")
        if r.take(4) != META_MAGIC:
            raise CorruptFileError("unexpected bytes after checkpoint payload")
        (mlen,) = r.unpack("I")
        try:
            metadata = json.loads(r.take(mlen).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptFileError(f"bad checkpoint metadata: {exc}") from exc
        if r.remaining:
            raise CorruptFileError("unexpected bytes after checkpoint metadata")
    return Checkpoint(spec, weights, biases, epoch, history, metadata)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    path = Path(path)
    data = encode_checkpoint(ckpt)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        tmp.replace(path)
    except OSError as exc:
        raise IOFailure(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        buf = path.read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise IOFailure(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(buf)
