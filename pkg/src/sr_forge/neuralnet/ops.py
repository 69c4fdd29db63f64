"""Convolution kernels and activations.

Internally feature maps are NHWC so that im2col rows are contiguous
``(kh, kw, C)`` runs; one GEMM per layer then does the heavy lifting.  The
public ``conv2d_forward`` / ``conv2d_transpose_forward`` wrappers take NCHW
tensors.

Weight layouts follow the usual convention:

* convolution            ``(out_channels, in_channels, k, k)``
* transposed convolution ``(in_channels, out_channels, k, k)``

A transposed convolution is defined as the input-gradient of a "Same"-padded
convolution whose input is ``stride`` times larger, so at stride 1 it keeps
spatial size and equals a convolution with the flipped kernel.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidParameterError, ShapeMismatchError

__all__ = [
    "same_padding",
    "conv_forward_nhwc",
    "conv_backward_nhwc",
    "conv_transpose_forward_nhwc",
    "conv_transpose_backward_nhwc",
    "conv2d_forward",
    "conv2d_transpose_forward",
    "leaky_relu",
    "leaky_relu_backward",
    "sigmoid",
    "sigmoid_backward",
]


def same_padding(n: int, k: int, stride: int) -> tuple[int, int, int]:
    """Output length and (before, after) zero padding for "Same" convolution."""
    out = -(-n // stride)
    total = max((out - 1) * stride + k - n, 0)
    return out, total // 2, total - total // 2


def _weight_matrix(w: np.ndarray) -> np.ndarray:
    # (Cout, Cin, kh, kw) -> (Cout, kh*kw*Cin), matching im2col column order
    cout = w.shape[0]
    return w.transpose(0, 2, 3, 1).reshape(cout, -1)


def _im2col(x: np.ndarray, k: int, stride: int):
    """Zero-pad an NHWC tensor and unfold it into (N*Ho*Wo, k*k*C) rows."""
    n, h, w, c = x.shape
    ho, pt, pb = same_padding(h, k, stride)
    wo, pl, pr = same_padding(w, k, stride)
    if pt or pb or pl or pr:
        x = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    win = sliding_window_view(x, (k, k), axis=(1, 2))
    if stride > 1:
        win = win[:, ::stride, ::stride]
    win = win[:, :ho, :wo].transpose(0, 1, 2, 4, 5, 3)
    return np.ascontiguousarray(win).reshape(n * ho * wo, k * k * c), (ho, wo)


def _scatter(g: np.ndarray, w: np.ndarray, out_shape, stride: int) -> np.ndarray:
    """Adjoint of im2col followed by a GEMM, done one kernel tap at a time.

    ``g`` is (N*Ho*Wo, A), ``w`` is (A, B, k, k); the result has ``out_shape``
    (N, H, W, B).  Each tap is a small GEMM added into a shifted slice, which
    avoids materialising the (N*Ho*Wo, k*k*B) column buffer.
    """
    n, h, wd, c = out_shape
    k = w.shape[2]
    ho, pt, pb = same_padding(h, k, stride)
    wo, pl, pr = same_padding(wd, k, stride)
    out = np.zeros((n, h + pt + pb, wd + pl + pr, c), dtype=g.dtype)
    hspan = (ho - 1) * stride + 1
    wspan = (wo - 1) * stride + 1
    for i in range(k):
        for j in range(k):
            tap = (g @ np.ascontiguousarray(w[:, :, i, j])).reshape(n, ho, wo, c)
            out[:, i : i + hspan : stride, j : j + wspan : stride, :] += tap
    return out[:, pt : pt + h, pl : pl + wd, :]


def _check_conv(x: np.ndarray, w: np.ndarray, in_axis: int):
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeMismatchError(f"expected 4-D input and weights, got {x.shape} and {w.shape}")
    if w.shape[2] != w.shape[3]:
        raise ShapeMismatchError(f"kernels must be square, got {w.shape[2:]}")
    if x.shape[3] != w.shape[in_axis]:
        raise ShapeMismatchError(
            f"input has {x.shape[3]} channels but weights expect {w.shape[in_axis]}"
        )


def conv_forward_nhwc(x, w, b, stride: int = 1):
    """Cross-correlation plus bias. Returns ``(y, col)``; ``col`` feeds the backward pass."""
    _check_conv(x, w, 1)
    if stride < 1:
        raise InvalidParameterError("stride must be >= 1")
    k = w.shape[2]
    col, (ho, wo) = _im2col(x, k, stride)
    y = col @ _weight_matrix(w).T
    if b is not None:
        y += b
    return y.reshape(x.shape[0], ho, wo, w.shape[0]), col


def conv_backward_nhwc(dy, col, x_shape, w, stride: int = 1, need_dx: bool = True):
    """Gradients of a convolution: ``(dw, db, dx)``; ``dx`` is None when not requested."""
    cout, cin, k, _ = w.shape
    dy2 = dy.reshape(-1, cout)
    dw = (col.T @ dy2).T.reshape(cout, k, k, cin).transpose(0, 3, 1, 2)
    db = dy2.sum(axis=0)
    dx = _scatter(dy2, w, x_shape, stride) if need_dx else None
    return np.ascontiguousarray(dw), db, dx


def _transpose_out_shape(x_shape, w, stride):
    n, h, wd, _ = x_shape
    return (n, h * stride, wd * stride, w.shape[1])


def conv_transpose_forward_nhwc(x, w, b, stride: int = 1):
    """Transposed convolution. ``w`` is ``(Cin, Cout, k, k)``. Returns ``(y, None)``."""
    _check_conv(x, w, 0)
    if stride < 1:
        raise InvalidParameterError("stride must be >= 1")
    out_shape = _transpose_out_shape(x.shape, w, stride)
    y = _scatter(x.reshape(-1, w.shape[0]), w, out_shape, stride)
    if b is not None:
        y = y + b
    return np.ascontiguousarray(y), None


def conv_transpose_backward_nhwc(dy, x, w, stride: int = 1, need_dx: bool = True):
    """Gradients of a transposed convolution: ``(dw, db, dx)``."""
    cin, cout, k, _ = w.shape
    col, _ = _im2col(dy, k, stride)
    x2 = x.reshape(-1, cin)
    dw = (col.T @ x2).T.reshape(cin, k, k, cout).transpose(0, 3, 1, 2)
    db = dy.reshape(-1, cout).sum(axis=0)
    dx = None
    if need_dx:
        dx = (col @ _weight_matrix(w).T).reshape(x.shape)
    return np.ascontiguousarray(dw), db, dx


def conv2d_forward(x, w, b=None, stride: int = 1) -> np.ndarray:
    """NCHW "Same"-padded convolution."""
    x = np.asarray(x)
    if x.ndim != 4:
        raise ShapeMismatchError(f"expected NCHW input, got shape {x.shape}")
    y, _ = conv_forward_nhwc(np.ascontiguousarray(x.transpose(0, 2, 3, 1)), np.asarray(w),
                             None if b is None else np.asarray(b), stride)
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def conv2d_transpose_forward(x, w, b=None, stride: int = 1) -> np.ndarray:
    """NCHW transposed convolution; output spatial size is ``stride`` times the input."""
    x = np.asarray(x)
    if x.ndim != 4:
        raise ShapeMismatchError(f"expected NCHW input, got shape {x.shape}")
    y, _ = conv_transpose_forward_nhwc(np.ascontiguousarray(x.transpose(0, 2, 3, 1)),
                                       np.asarray(w), None if b is None else np.asarray(b), stride)
    return np.ascontiguousarray(y.transpose(0, 3, 1, 2))


def leaky_relu(x, slope: float = 0.3):
    return np.where(x >= 0, x, x * x.dtype.type(slope))


def leaky_relu_backward(x, dy, slope: float = 0.3):
    return np.where(x >= 0, dy, dy * dy.dtype.type(slope))


def sigmoid(x):
    # split by sign so exp never overflows
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(x.dtype, copy=False)


def sigmoid_backward(y, dy):
    """Derivative given the sigmoid *output* ``y``."""
    return dy * y * (1 - y)
