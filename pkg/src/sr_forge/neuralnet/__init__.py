"""A small numpy CNN engine: layers, presets, training step, checkpoints."""

from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .network import (
    DEFAULT_SLOPE,
    Gradients,
    LayerSpec,
    Network,
    NetworkSpec,
    msrcnn_spec,
    preset,
    srcnn_spec,
)
from .ops import (
    conv2d_forward,
    conv2d_transpose_forward,
    leaky_relu,
    leaky_relu_backward,
    sigmoid,
    sigmoid_backward,
)
from .optim import SGD, Adam, make_optimizer, mse_loss, stack_batch, train_step

__all__ = [
    "Adam",
    "Checkpoint",
    "DEFAULT_SLOPE",
    "Gradients",
    "LayerSpec",
    "Network",
    "NetworkSpec",
    "SGD",
    "conv2d_forward",
    "conv2d_transpose_forward",
    "decode_checkpoint",
    "encode_checkpoint",
    "leaky_relu",
    "leaky_relu_backward",
    "load_checkpoint",
    "make_optimizer",
    "msrcnn_spec",
    "mse_loss",
    "preset",
    "save_checkpoint",
    "sigmoid",
    "sigmoid_backward",
    "srcnn_spec",
    "stack_batch",
    "train_step",
]
