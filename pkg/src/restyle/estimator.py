"""Estimator-style wrapper so the engine composes with sklearn-shaped tooling.

ColorStyleTransfer exposes fit/transform/get_params/set_params without
depending on scikit-learn: fit() runs self-supervised training over a corpus,
transform() restyles images against a style reference.
"""

from __future__ import annotations

import inspect
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint, load_checkpoint
from .imaging import Image, load_raster
from .pipeline import transfer
from .training import TrainConfig, train_on_images


class NotFittedError(ValueError):
    pass


def as_image(x) -> Image:
    """Accept an Image, an array-like (h, w, 3) in [0, 1], or a PNG path."""
    if isinstance(x, Image):
        return x
    if isinstance(x, (str, Path)):
        return load_raster(x)
    arr = np.asarray(x)
    if arr.ndim == 3 and arr.shape[2] == 3:
        if arr.dtype == np.uint8:
            arr = arr.astype(np.float32) / 255.0
        return Image(arr)
    raise TypeError(f"cannot interpret {type(x).__name__} as an image")


def as_image_list(X) -> list[Image]:
    if isinstance(X, (str, Path)):
        paths = sorted(Path(X).glob("*.png"))
        return [load_raster(p) for p in paths]
    if isinstance(X, Image) or (isinstance(X, np.ndarray) and X.ndim == 3):
        return [as_image(X)]
    return [as_image(x) for x in X]


class ColorStyleTransfer:
    """fit() learns the normalize/stylize model; transform() applies a style."""

    def __init__(self, k=16, thumbnail_size=64, widths=(16, 32, 64, 128),
                 steps=2000, lr=3e-4, consistency_weight=10.0, batch_size=8,
                 patch_size=512, seed=0):
        self.k = k
        self.thumbnail_size = thumbnail_size
        self.widths = widths
        self.steps = steps
        self.lr = lr
        self.consistency_weight = consistency_weight
        self.batch_size = batch_size
        self.patch_size = patch_size
        self.seed = seed

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            consistency_weight=self.consistency_weight, lr=self.lr,
            batch_size=self.batch_size, steps=self.steps, k=self.k,
            thumbnail_size=self.thumbnail_size, image_size=self.thumbnail_size,
            widths=tuple(self.widths), seed=self.seed,
        )

    def fit(self, X, y=None):
        """X: a directory of PNGs or a sequence of images."""
        images = as_image_list(X)
        self.checkpoint_, self.loss_reports_ = train_on_images(self._train_config(), images)
        self.model_ = self.checkpoint_.model
        return self

    @classmethod
    def from_checkpoint(cls, path) -> "ColorStyleTransfer":
        ckpt = load_checkpoint(path)
        cfg = ckpt.model.config
        est = cls(k=cfg.k, thumbnail_size=cfg.thumbnail_size,
                  widths=cfg.widths, seed=cfg.seed)
        est.checkpoint_ = ckpt
        est.model_ = ckpt.model
        est.loss_reports_ = []
        return est

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError(
                "this ColorStyleTransfer instance is not fitted yet; "
                "call fit() or from_checkpoint() first"
            )

    def transform(self, X, style) -> list[Image]:
        """Restyle each image in X with the color style of `style`."""
        self._check_fitted()
        style_img = as_image(style)
        return [transfer(img, style_img, self.model_, self.patch_size)
                for img in as_image_list(X)]

    def fit_transform(self, X, y=None, *, style):
        return self.fit(X).transform(X, style=style)
