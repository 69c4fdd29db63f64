"""Dataset preparation, training, inference and denoising filters."""

from .dataset import (
    DatasetArchive,
    assign_splits,
    decode_archive,
    encode_archive,
    load_archive,
    make_training_pair,
    preprocess_corpus,
    save_archive,
)
from .filters import (
    DenoiseParams,
    apply_denoise,
    bilateral_filter,
    gaussian_blur,
    nlm_denoise,
    sharpen,
)
from .inference import PostProcessMode, enhance, post_process, run_network, upscale
from .training import TrainConfig, evaluate_loss, latest_checkpoint, train

__all__ = [
    "DatasetArchive",
    "DenoiseParams",
    "PostProcessMode",
    "TrainConfig",
    "apply_denoise",
    "assign_splits",
    "bilateral_filter",
    "decode_archive",
    "encode_archive",
    "enhance",
    "evaluate_loss",
    "gaussian_blur",
    "latest_checkpoint",
    "load_archive",
    "make_training_pair",
    "nlm_denoise",
    "post_process",
    "preprocess_corpus",
    "run_network",
    "save_archive",
    "sharpen",
    "train",
    "upscale",
]
