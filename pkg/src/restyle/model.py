"""The trained artifact: encoder weights plus the two projection pairs.

The fingerprint hashes the projection matrices; presets and cached normalized
images are only meaningful under the projections they were produced with, so
both carry the fingerprint and are checked on use.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .encoder import EncoderConfig, EncoderWeights, init_weights
from .mapping import ProjectionPair


def projection_fingerprint(proj_n: ProjectionPair, proj_s: ProjectionPair) -> bytes:
    h = hashlib.sha256()
    for arr in (proj_n.p, proj_n.q, proj_s.p, proj_s.q):
        h.update(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return h.digest()[:8]


@dataclass
class Model:
    weights: EncoderWeights
    proj_n: ProjectionPair
    proj_s: ProjectionPair

    @property
    def config(self) -> EncoderConfig:
        return self.weights.config

    @property
    def k(self) -> int:
        return self.weights.config.k

    @property
    def fingerprint(self) -> bytes:
        return projection_fingerprint(self.proj_n, self.proj_s)

    def trainable(self) -> list[tuple[str, np.ndarray]]:
        """Every learnable array, in the fixed order checkpoints and Adam slots use."""
        return self.weights.parameters() + [
            ("proj_n.p", self.proj_n.p),
            ("proj_n.q", self.proj_n.q),
            ("proj_s.p", self.proj_s.p),
            ("proj_s.q", self.proj_s.q),
        ]

    @staticmethod
    def initialized(config: EncoderConfig) -> "Model":
        """Fresh model that maps every image to itself, bitwise, before training.

        Projections use the seeded identity-with-active-tail form so that all
        k embedding dimensions participate in training from the first step.
        """
        return Model(
            weights=init_weights(config),
            proj_n=ProjectionPair.identity_seeded(
                config.k, "normalizing",
                np.random.SeedSequence(entropy=(config.seed, 0x9A01))),
            proj_s=ProjectionPair.identity_seeded(
                config.k, "stylizing",
                np.random.SeedSequence(entropy=(config.seed, 0x9A02))),
        )
