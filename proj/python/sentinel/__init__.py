"""Capsule-network indoor localization under adversarial RSS attacks."""

from sentinel._core import (
    ConfigError,
    DataError,
    NumericError,
    __version__,
    attack_dataset,
    evaluate,
    generate_dataset,
    image_to_rss,
    make_mask,
    predict,
    rss_to_image,
    run_experiment,
    softmax,
    squash,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "__version__",
    "attack_dataset",
    "evaluate",
    "generate_dataset",
    "image_to_rss",
    "make_mask",
    "predict",
    "rss_to_image",
    "run_experiment",
    "softmax",
    "squash",
    "train",
]
