"""Optimizers, the MSE loss and a single training step."""

from __future__ import annotations

import numpy as np

from ..errors import DataError, InvalidParameterError
from .network import Network

__all__ = ["SGD", "Adam", "make_optimizer", "mse_loss", "train_step", "stack_batch"]


class SGD:
    kind = "sgd"

    def __init__(self, lr: float = 0.003):
        self.lr = float(lr)
        self.t = 0

    def step(self, params, grads, lr: float | None = None) -> None:
        lr = self.lr if lr is None else float(lr)
        self.t += 1
        if lr == 0.0:
            return
        for p, g in zip(params, grads):
            p -= p.dtype.type(lr) * g

    def state_dict(self) -> dict:
        return {"kind": self.kind, "lr": self.lr, "t": self.t, "arrays": {}}

    def load_state_dict(self, state: dict) -> None:
        self.lr = float(state["lr"])
        self.t = int(state["t"])


class Adam:
    kind = "adam"

    def __init__(self, lr: float = 0.003, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = float(lr), beta1, beta2, eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params, grads, lr: float | None = None) -> None:
        lr = self.lr if lr is None else float(lr)
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        # fold both bias corrections into the step size
        step = lr * np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            dt = p.dtype.type
            m *= dt(b1)
            m += dt(1.0 - b1) * g
            v *= dt(b2)
            v += dt(1.0 - b2) * (g * g)
            if lr != 0.0:
                p -= dt(step) * m / (np.sqrt(v) + dt(self.eps))

    def state_dict(self) -> dict:
        arrays = {}
        if self.m is not None:
            for i, (m, v) in enumerate(zip(self.m, self.v)):
                arrays[f"m{i}"] = m
                arrays[f"v{i}"] = v
        return {"kind": self.kind, "lr": self.lr, "t": self.t, "beta1": self.beta1,
                "beta2": self.beta2, "eps": self.eps, "arrays": arrays}

    def load_state_dict(self, state: dict) -> None:
        self.lr = float(state["lr"])
        self.t = int(state["t"])
        arrays = state.get("arrays", {})
        n = len(arrays) // 2
        if n:
            self.m = [np.array(arrays[f"m{i}"]) for i in range(n)]
            self.v = [np.array(arrays[f"v{i}"]) for i in range(n)]


def make_optimizer(name: str, lr: float):
    name = name.lower()
    if name == "adam":
        return Adam(lr)
    if name == "sgd":
        return SGD(lr)
    raise InvalidParameterError(f"unknown optimizer {name!r}")


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over every element, and its gradient w.r.t. ``pred``."""
    diff = pred - target
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    grad = diff * diff.dtype.type(2.0 / diff.size)
    return loss, grad


def stack_batch(batch, dtype=np.float32) -> tuple[np.ndarray, np.ndarray]:
    """``(inputs, targets)`` NCHW arrays from a sequence of PatchPairs or an array tuple."""
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        x, y = batch
    else:
        batch = list(batch)
        if not batch:
            raise DataError("empty batch")
        x = np.stack([p.lr.data for p in batch]).transpose(0, 3, 1, 2)
        y = np.stack([p.hr.data for p in batch]).transpose(0, 3, 1, 2)
    if len(x) == 0:
        raise DataError("empty batch")
    return np.ascontiguousarray(x, dtype=dtype), np.ascontiguousarray(y, dtype=dtype)


def train_step(net: Network, batch, optimizer, lr: float | None = None) -> float:
    """One forward/backward/update on the MSE loss. Returns the pre-update loss."""
    x, y = stack_batch(batch, net.dtype)
    pred = net.forward(x)
    loss, grad = mse_loss(pred, y)
    grads = net.backward(grad, need_input_grad=False)
    optimizer.step(net.parameters(), grads.flat(), lr)
    net.clear_cache()
    return loss
