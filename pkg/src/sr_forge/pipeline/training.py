"""Epoch loop: seeded shuffling, per-epoch checkpoints and the loss-curve CSV."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import ChannelMismatchError, DataError, InvalidParameterError, IOFailure
from ..neuralnet import (
    Checkpoint,
    Network,
    load_checkpoint,
    make_optimizer,
    mse_loss,
    preset,
    save_checkpoint,
    train_step,
)
from .dataset import DatasetArchive

log = logging.getLogger(__name__)

__all__ = ["TrainConfig", "train", "evaluate_loss", "checkpoint_path", "latest_checkpoint",
           "LOSS_CSV", "LOSS_HEADER"]

LOSS_CSV = "loss_curve.csv"
LOSS_HEADER = ("epoch", "train_mse", "val_mse")
_CKPT_RE = re.compile(r"^epoch_(\d+)\.ckpt$")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    lr: float = 0.003
    batch_size: int = 32
    seed: int = 0
    degradation: str = "bilinear"
    preset: str = "msrcnn"
    optimizer: str = "adam"
    slope: float = 0.3

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidParameterError("epochs must be >= 1")
        if not self.lr > 0:
            raise InvalidParameterError("learning rate must be positive")
        if self.batch_size < 1:
            raise InvalidParameterError("batch size must be >= 1")
        if self.degradation not in ("bilinear", "bicubic"):
            raise InvalidParameterError(f"degradation must be bilinear or bicubic, "
                                        f"got {self.degradation!r}")


def checkpoint_path(directory, epoch: int) -> Path:
    return Path(directory) / f"epoch_{epoch:03d}.ckpt"


def _optim_path(ckpt: Path) -> Path:
    return ckpt.with_suffix(".optim.npz")


def latest_checkpoint(directory) -> Path | None:
    found = []
    for p in Path(directory).glob("epoch_*.ckpt"):
        m = _CKPT_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    return max(found)[1] if found else None


def evaluate_loss(net: Network, x: np.ndarray, y: np.ndarray, batch_size: int = 32) -> float:
    """Mean per-element MSE over a dataset, without touching any gradients."""
    if len(x) == 0:
        return math.nan
    total = 0.0
    for start in range(0, len(x), batch_size):
        pred = net.forward(x[start : start + batch_size], cache=False)
        loss, _ = mse_loss(pred, y[start : start + batch_size])
        total += loss * len(pred)
    return total / len(x)


def _save_optimizer(opt, path: Path) -> None:
    state = opt.state_dict()
    arrays = {f"arr_{k}": v for k, v in state.pop("arrays").items()}
    meta = np.frombuffer(json.dumps(state, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, __meta__=meta, **arrays)


def _load_optimizer(opt, path: Path) -> None:
    with np.load(path) as z:
        state = json.loads(bytes(z["__meta__"]).decode())
        state["arrays"] = {k[4:]: z[k] for k in z.files if k.startswith("arr_")}
    opt.load_state_dict(state)


def _write_curve(path: Path, train_hist, val_hist) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOSS_HEADER)
        for i, (t, v) in enumerate(zip(train_hist, val_hist), start=1):
            w.writerow([i, repr(float(t)), repr(float(v))])


def train(archive: DatasetArchive, cfg: TrainConfig, checkpoint_dir, *,
          resume: bool | str | Path = False, stop_after: int | None = None,
          progress=None) -> Checkpoint:
    """Train ``cfg.preset`` on ``archive`` and checkpoint every epoch into ``checkpoint_dir``.

    Pairs marked "val" in the manifest feed the validation column of the loss
    curve; everything else that carries pairs trains.  ``resume`` continues from
    the newest checkpoint in the directory (or the given file).  ``stop_after``
    ends the run early after that epoch, as an interruption would.
    ``progress(epoch, train_mse, val_mse)`` is called after each epoch.
    """
    out = Path(checkpoint_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise IOFailure(f"checkpoint directory {out} is not writable: {exc}") from exc

    spec = preset(cfg.preset, archive.channels, cfg.slope)
    if spec.input_channels != archive.channels:
        raise ChannelMismatchError("archive channels do not match the network input")
    train_idx = archive.indices("train")
    val_idx = archive.indices("val")
    if not archive.manifest:
        train_idx = np.arange(len(archive))
    if len(train_idx) == 0:
        raise DataError("archive holds no training pairs")
    x_all, y_all = archive.nchw()
    x_val, y_val = x_all[val_idx], y_all[val_idx]

    net = Network.initialize(spec, cfg.seed)
    opt = make_optimizer(cfg.optimizer, cfg.lr)
    train_hist: list[float] = []
    val_hist: list[float] = []
    start_epoch = 1

    if resume:
        src = Path(resume) if not isinstance(resume, bool) else latest_checkpoint(out)
        if src is not None:
            ckpt = load_checkpoint(src)
            if ckpt.spec != spec:
                raise ChannelMismatchError(f"{src} was trained with a different network")
            net = ckpt.network()
            # the f32 history in the binary block loses precision; prefer the JSON copy
            train_hist = list(ckpt.metadata.get("train_history", ckpt.loss_history))
            val_hist = list(ckpt.metadata.get("val_history", [math.nan] * len(train_hist)))
            if _optim_path(src).exists():
                _load_optimizer(opt, _optim_path(src))
            start_epoch = ckpt.epoch + 1
            log.info("resuming from %s at epoch %d", src, start_epoch)

    meta = asdict(cfg)
    ckpt = None
    for epoch in range(start_epoch, cfg.epochs + 1):
        order = train_idx[np.random.default_rng([cfg.seed, epoch]).permutation(len(train_idx))]
        weighted = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss = train_step(net, (x_all[batch], y_all[batch]), opt)
            weighted += loss * len(batch)
        train_hist.append(weighted / len(order))
        val_hist.append(evaluate_loss(net, x_val, y_val, cfg.batch_size))

        ckpt = Checkpoint.from_network(net, epoch, train_hist,
                                       {**meta, "train_history": list(train_hist),
                                        "val_history": list(val_hist)})
        path = checkpoint_path(out, epoch)
        save_checkpoint(ckpt, path)
        _save_optimizer(opt, _optim_path(path))
        _write_curve(out / LOSS_CSV, train_hist, val_hist)
        log.info("epoch %d/%d  train_mse=%.6f  val_mse=%.6f", epoch, cfg.epochs,
                 train_hist[-1], val_hist[-1])
        if progress is not None:
            progress(epoch, train_hist[-1], val_hist[-1])
        if stop_after is not None and epoch >= stop_after:
            break

    if ckpt is None:
        ckpt = Checkpoint.from_network(net, start_epoch - 1, train_hist,
                                       {**meta, "train_history": list(train_hist),
                                        "val_history": list(val_hist)})
    return ckpt
