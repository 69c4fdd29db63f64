"""Declarative network specs, the two presets, and a trainable sequential CNN."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ChannelMismatchError, InvalidParameterError, ShapeMismatchError, StaleCacheError
from . import ops

__all__ = [
    "LayerSpec",
    "NetworkSpec",
    "srcnn_spec",
    "msrcnn_spec",
    "preset",
    "Network",
    "Gradients",
    "DEFAULT_SLOPE",
]

DEFAULT_SLOPE = 0.3

CONV = "conv"
CONV_TRANSPOSE = "conv_transpose"
LEAKY_RELU = "leaky_relu"
SIGMOID = "sigmoid"


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    filters: int
    kernel: int
    activation: str = LEAKY_RELU
    slope: float = DEFAULT_SLOPE
    bias: bool = True
    stride: int = 1

    def __post_init__(self):
        if self.kind not in (CONV, CONV_TRANSPOSE):
            raise InvalidParameterError(f"unknown layer kind {self.kind!r}")
        if self.activation not in (LEAKY_RELU, SIGMOID):
            raise InvalidParameterError(f"unknown activation {self.activation!r}")
        if self.filters < 1:
            raise InvalidParameterError("filters must be >= 1")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise InvalidParameterError(f"kernel size must be odd, got {self.kernel}")
        if self.stride < 1:
            raise InvalidParameterError("stride must be >= 1")
        if self.activation == LEAKY_RELU and not 0.0 < self.slope < 1.0:
            raise InvalidParameterError(f"LeakyReLU slope must be in (0, 1), got {self.slope}")


@dataclass(frozen=True)
class NetworkSpec:
    input_channels: int
    layers: tuple[LayerSpec, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_channels < 1:
            raise InvalidParameterError("input_channels must be >= 1")
        if not self.layers:
            raise InvalidParameterError("a network needs at least one layer")

    @property
    def output_channels(self) -> int:
        return self.layers[-1].filters

    def weight_shapes(self) -> list[tuple[int, int, int, int]]:
        shapes, cin = [], self.input_channels
        for layer in self.layers:
            k = layer.kernel
            if layer.kind == CONV:
                shapes.append((layer.filters, cin, k, k))
            else:
                shapes.append((cin, layer.filters, k, k))
            cin = layer.filters
        return shapes

    def capped(self, max_filters: int) -> "NetworkSpec":
        """Same topology with hidden widths limited to ``max_filters`` (output layer kept)."""
        layers = [replace(l, filters=min(l.filters, max_filters)) for l in self.layers[:-1]]
        return replace(self, layers=tuple(layers) + (self.layers[-1],))


def srcnn_spec(channels: int = 1, slope: float = DEFAULT_SLOPE) -> NetworkSpec:
    """Original SRCNN: 128@9x9, 64@3x3, out@5x5 with a sigmoid head."""
    return NetworkSpec(
        channels,
        (
            LayerSpec(CONV, 128, 9, LEAKY_RELU, slope),
            LayerSpec(CONV, 64, 3, LEAKY_RELU, slope),
            LayerSpec(CONV, channels, 5, SIGMOID, slope),
        ),
        name="srcnn",
    )


def msrcnn_spec(channels: int = 1, slope: float = DEFAULT_SLOPE) -> NetworkSpec:
    """Modified SRCNN: three convolutions, two stride-1 transposed convolutions, 1x1 head."""
    return NetworkSpec(
        channels,
        (
            LayerSpec(CONV, 64, 5, LEAKY_RELU, slope),
            LayerSpec(CONV, 64, 5, LEAKY_RELU, slope),
            LayerSpec(CONV, 16, 3, LEAKY_RELU, slope),
            LayerSpec(CONV_TRANSPOSE, 32, 3, LEAKY_RELU, slope),
            LayerSpec(CONV_TRANSPOSE, 32, 3, LEAKY_RELU, slope),
            LayerSpec(CONV, channels, 1, SIGMOID, slope),
        ),
        name="msrcnn",
    )


PRESETS = {"srcnn": srcnn_spec, "msrcnn": msrcnn_spec}


def preset(name: str, channels: int = 1, slope: float = DEFAULT_SLOPE) -> NetworkSpec:
    key = name.lower().replace("-", "").replace("_", "")
    if key not in PRESETS:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key](channels, slope)


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray | None

    def flat(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out


class Network:
    """A sequential stack of (transposed) convolutions with per-layer activations.

    Tensors crossing the public API are NCHW. ``forward`` caches whatever the
    following ``backward`` needs; inference callers pass ``cache=False``.
    """

    def __init__(self, spec: NetworkSpec, weights=None, biases=None, dtype=np.float32):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        shapes = spec.weight_shapes()
        if weights is None:
            weights = [np.zeros(s, self.dtype) for s in shapes]
        if biases is None:
            biases = [np.zeros(l.filters, self.dtype) for l in spec.layers]
        if len(weights) != len(shapes) or len(biases) != len(shapes):
            raise ShapeMismatchError("one weight tensor and one bias vector per layer expected")
        self.weights = [np.array(w, dtype=self.dtype) for w in weights]
        self.biases = [np.array(b, dtype=self.dtype) for b in biases]
        for i, (w, b, s, l) in enumerate(zip(self.weights, self.biases, shapes, spec.layers)):
            if w.shape != s:
                raise ShapeMismatchError(f"layer {i}: weight shape {w.shape}, expected {s}")
            if b.shape != (l.filters,):
                raise ShapeMismatchError(f"layer {i}: bias shape {b.shape}, expected ({l.filters},)")
        self._cache = None

    @classmethod
    def initialize(cls, spec: NetworkSpec, seed: int = 0, dtype=np.float32) -> "Network":
        """Glorot-uniform weights from a seeded generator; zero biases."""
        rng = np.random.default_rng(seed)
        weights = []
        for layer, shape in zip(spec.layers, spec.weight_shapes()):
            k2 = layer.kernel * layer.kernel
            fan_in = shape[1] * k2 if layer.kind == CONV else shape[0] * k2
            fan_out = shape[0] * k2 if layer.kind == CONV else shape[1] * k2
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=shape))
        return cls(spec, weights, None, dtype)

    def astype(self, dtype) -> "Network":
        return Network(self.spec, self.weights, self.biases, dtype)

    def copy(self) -> "Network":
        return Network(self.spec, self.weights, self.biases, self.dtype)

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    # -- forward / backward --------------------------------------------------

    def forward(self, x, cache: bool = True) -> np.ndarray:
        x = np.asarray(x)
        if x.ndim != 4:
            raise ShapeMismatchError(f"expected NCHW input, got shape {x.shape}")
        if x.shape[1] != self.spec.input_channels:
            raise ChannelMismatchError(
                f"network expects {self.spec.input_channels} channels, got {x.shape[1]}"
            )
        h = np.ascontiguousarray(x.transpose(0, 2, 3, 1), dtype=self.dtype)
        records = []
        for layer, w, b in zip(self.spec.layers, self.weights, self.biases):
            bias = b if layer.bias else None
            if layer.kind == CONV:
                z, col = ops.conv_forward_nhwc(h, w, bias, layer.stride)
            else:
                z, col = ops.conv_transpose_forward_nhwc(h, w, bias, layer.stride)
            if layer.activation == SIGMOID:
                a = ops.sigmoid(z)
            else:
                a = ops.leaky_relu(z, layer.slope)
            if cache:
                records.append((h if layer.kind == CONV_TRANSPOSE else None, h.shape, col, z, a))
            h = a
        self._cache = (x.shape, records) if cache else None
        return np.ascontiguousarray(h.transpose(0, 3, 1, 2))

    __call__ = forward

    def backward(self, grad_out, need_input_grad: bool = True) -> Gradients:
        """Back-propagate ``grad_out`` (dLoss/dOutput, NCHW) through the cached forward pass."""
        if self._cache is None:
            raise StaleCacheError("backward() needs a preceding forward(cache=True)")
        in_shape, records = self._cache
        grad_out = np.asarray(grad_out, dtype=self.dtype)
        expected = records[-1][4].shape
        g = np.ascontiguousarray(grad_out.transpose(0, 2, 3, 1))
        if g.shape != expected:
            raise StaleCacheError(
                f"grad_out shape {grad_out.shape} does not match the cached forward pass"
            )
        n = len(self.spec.layers)
        dws, dbs = [None] * n, [None] * n
        for i in range(n - 1, -1, -1):
            layer, w = self.spec.layers[i], self.weights[i]
            x_in, x_shape, col, z, a = records[i]
            if layer.activation == SIGMOID:
                g = ops.sigmoid_backward(a, g)
            else:
                g = ops.leaky_relu_backward(z, g, layer.slope)
            need_dx = i > 0 or need_input_grad
            if layer.kind == CONV:
                dw, db, g = ops.conv_backward_nhwc(g, col, x_shape, w, layer.stride, need_dx)
            else:
                dw, db, g = ops.conv_transpose_backward_nhwc(g, x_in, w, layer.stride, need_dx)
            dws[i] = dw
            dbs[i] = db if layer.bias else np.zeros_like(db)
        dx = None
        if need_input_grad:
            dx = np.ascontiguousarray(g.transpose(0, 3, 1, 2))
        return Gradients(dws, dbs, dx)

    def preactivations(self) -> list[np.ndarray]:
        """Per-layer pre-activation tensors (NHWC) from the cached forward pass."""
        if self._cache is None:
            raise StaleCacheError("no cached forward pass")
        return [rec[3] for rec in self._cache[1]]

    def clear_cache(self) -> None:
        self._cache = None
