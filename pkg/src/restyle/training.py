"""Self-supervised training: perturb, normalize, cross-stylize, reconstruct.

Each step draws two color perturbations of every batch image. Both variants
are mapped into the shared normalized space (their difference is the
consistency loss), then each is re-stylized with the *other* variant's style
matrix and compared against the original variant (the reconstruction loss).
Minimizing rec + weight*con forces the normalizing stage to strip the
perturbation and the stylizing stage to re-apply it from the matrix alone.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import encoder as enc
from .augment import make_pair
from .autodiff import AdamState, Tape, Tensor, adam_step
from .checkpoint import Checkpoint, save_checkpoint
from .encoder import EncoderConfig
from .imaging import Image, downsample, load_raster
from .model import Model


class TrainingDiverged(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    consistency_weight: float = 10.0
    lr: float = 3e-4
    batch_size: int = 8
    steps: int = 2000
    lr_decay_factor: float = 0.1
    lr_decay_at: float = 0.75     # fraction of total steps
    k: int = 16
    thumbnail_size: int = 64
    image_size: int = 64
    widths: tuple[int, ...] = (16, 32, 64, 128)
    seed: int = 0

    def __post_init__(self):
        if self.consistency_weight < 0:
            raise ValueError("consistency_weight must be >= 0")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(k=self.k, thumbnail_size=self.thumbnail_size,
                             widths=self.widths, seed=self.seed)

    def lr_at(self, step: int) -> float:
        if self.steps > 0 and step >= int(self.steps * self.lr_decay_at):
            return self.lr * self.lr_decay_factor
        return self.lr


@dataclass(frozen=True)
class LossReport:
    step: int
    l_rec: float
    l_con: float
    total: float
    lr: float


def consistency_loss(z_i, z_j) -> float:
    """Mean squared difference over all elements."""
    a = np.asarray(z_i.data if isinstance(z_i, Image) else z_i)
    b = np.asarray(z_j.data if isinstance(z_j, Image) else z_j)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    d = a - b
    return float((d * d).mean())


def reconstruction_loss(y_i, i_i, y_j, i_j) -> float:
    """Mean absolute difference of each (output, target) pair, summed."""
    total = 0.0
    for y, t in ((y_i, i_i), (y_j, i_j)):
        a = np.asarray(y.data if isinstance(y, Image) else y)
        b = np.asarray(t.data if isinstance(t, Image) else t)
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
        total += float(np.abs(a - b).mean())
    return total


def item_seed(config_seed: int, step: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=(config_seed, step, index)).generate_state(1)[0])


def _mean_of(tape: Tape, terms: list[Tensor]) -> Tensor:
    acc = terms[0]
    for t in terms[1:]:
        acc = ad.add(acc, t, tape)
    return ad.scale(acc, 1.0 / len(terms), tape)


def train_step(batch: list[Image], model: Model, opt: AdamState, config: TrainConfig,
               step: int = 0, pair_fn=make_pair) -> LossReport:
    """One optimizer update over a batch; returns the losses that drove it."""
    if not batch:
        raise ValueError("batch must be nonempty")
    tape = Tape()
    enc_tensors = enc.as_tensors(model.weights, requires_grad=True)
    pn = Tensor(model.proj_n.p, requires_grad=True)
    qn = Tensor(model.proj_n.q, requires_grad=True)
    ps = Tensor(model.proj_s.p, requires_grad=True)
    qs = Tensor(model.proj_s.q, requires_grad=True)
    k = config.k

    rec_terms, con_terms = [], []
    for index, image in enumerate(batch):
        sample_i, sample_j = pair_fn(image, item_seed(config.seed, step, index))
        outputs = []
        for sample in (sample_i, sample_j):
            thumb = downsample(sample, config.thumbnail_size)
            chw = Tensor(np.ascontiguousarray(thumb.data.transpose(2, 0, 1)))
            d_flat, r_flat = enc.forward(chw, enc_tensors, model.config, tape)
            d = ad.reshape(d_flat, (k, k), tape)
            r = ad.reshape(r_flat, (k, k), tape)
            x = Tensor(sample.pixels)
            z = ad.matmul(ad.matmul(ad.matmul(x, pn, tape), d, tape), qn, tape)
            outputs.append((x, z, r))
        (x_i, z_i, r_i), (x_j, z_j, r_j) = outputs
        # swap: each normalized image is restyled with the *other* sample's matrix
        y_i = ad.matmul(ad.matmul(ad.matmul(z_j, ps, tape), r_i, tape), qs, tape)
        y_j = ad.matmul(ad.matmul(ad.matmul(z_i, ps, tape), r_j, tape), qs, tape)
        con_terms.append(ad.mean_square(ad.sub(z_i, z_j, tape), tape))
        rec_terms.append(ad.add(
            ad.mean_abs(ad.sub(y_i, x_i, tape), tape),
            ad.mean_abs(ad.sub(y_j, x_j, tape), tape),
            tape,
        ))

    l_rec = _mean_of(tape, rec_terms)
    l_con = _mean_of(tape, con_terms)
    total = ad.add(l_rec, ad.scale(l_con, config.consistency_weight, tape), tape)
    if not np.isfinite(total.data):
        raise TrainingDiverged(
            f"non-finite loss at step {step}: rec={l_rec.data} con={l_con.data}"
        )
    tape.backward(total)

    names = [name for name, _ in model.trainable()]
    tensors = [enc_tensors[n] for n in names if n in enc_tensors] + [pn, qn, ps, qs]
    params = [t.data for t in tensors]
    grads = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors]
    adam_step(params, grads, opt, lr=config.lr_at(step))

    return LossReport(step=step, l_rec=float(l_rec.data), l_con=float(l_con.data),
                      total=float(total.data), lr=config.lr_at(step))


def load_training_images(image_dir, batch_size: int) -> list[Image]:
    """All readable PNGs under image_dir, sorted by name; unreadable files warn and skip."""
    paths = sorted(Path(image_dir).glob("*.png"))
    images = []
    for p in paths:
        try:
            images.append(load_raster(p))
        except Exception as exc:  # noqa: BLE001 - any undecodable file is skipped the same way
            warnings.warn(f"skipping unreadable image {p}: {exc}")
    if len(images) < batch_size:
        raise ValueError(
            f"need at least {batch_size} readable images in {image_dir}, found {len(images)}"
        )
    return images


def train(config: TrainConfig, image_dir, checkpoint_path=None, log_path=None,
          progress=None) -> tuple[Checkpoint, list[LossReport]]:
    """Run the configured number of steps over a directory of training images."""
    images = load_training_images(image_dir, config.batch_size)
    return train_on_images(config, images, checkpoint_path, log_path, progress)


def train_on_images(config: TrainConfig, images: list[Image], checkpoint_path=None,
                    log_path=None, progress=None) -> tuple[Checkpoint, list[LossReport]]:
    if len(images) < config.batch_size:
        raise ValueError(f"need at least {config.batch_size} images, got {len(images)}")
    model = Model.initialized(config.encoder_config())
    opt = AdamState([arr for _, arr in model.trainable()])
    order_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=(config.seed, 0xBA7C4))
    )

    reports: list[LossReport] = []
    queue: list[int] = []
    for step in range(config.steps):
        if len(queue) < config.batch_size:
            queue.extend(order_rng.permutation(len(images)).tolist())
        picks, queue = queue[: config.batch_size], queue[config.batch_size :]
        batch = [images[i] for i in picks]
        report = train_step(batch, model, opt, config, step=step)
        reports.append(report)
        if progress is not None:
            progress(report)

    ckpt = Checkpoint(model=model, opt=opt, step=config.steps)
    if checkpoint_path is not None:
        save_checkpoint(ckpt, checkpoint_path)
    if log_path is not None:
        write_loss_log(reports, log_path)
    return ckpt, reports


def write_loss_log(reports: list[LossReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "l_rec", "l_con", "total", "lr"])
        for r in reports:
            writer.writerow([r.step, f"{r.l_rec:.8f}", f"{r.l_con:.8f}",
                             f"{r.total:.8f}", f"{r.lr:.8g}"])
