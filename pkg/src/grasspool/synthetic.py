"""Seeded synthetic sequence datasets with planted temporal dynamics.

Every class owns an orthonormal ``d x 2`` frame ``W_c = [w1, w2]``;
frame ``t = 1..n`` of a sequence is built from it plus Gaussian noise and
then unit-normalized:

``monotone-line``      ``(t/n) w1``
``monotone-plane``     ``(t/n) w1 + 0.3 sin(2 pi t/n) w2``
``oscillating-plane``  ``sin(2 pi f_c t/n) w1 + 0.3 cos(2 pi f_c t/n) w2``, ``f_c = c + 1``

With the default ``layout="shared"`` all class frames are rotations of one
random plane (class ``c`` rotated by ``pi c / classes``), so classes differ
only in *which direction grows*, not in the span they occupy. With
``layout="orthogonal"`` the class frames are mutually orthogonal (needs
``d >= 2 * classes``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .sequence import FeatureSequence


class Dynamics(enum.Enum):
    MONOTONE_LINE = "monotone-line"
    MONOTONE_PLANE = "monotone-plane"
    OSCILLATING_PLANE = "oscillating-plane"

    @classmethod
    def parse(cls, text: str) -> "Dynamics":
        key = text.strip().lower().replace("_", "-")
        aliases = {"monotoneline": "monotone-line", "monotoneplane": "monotone-plane", "oscillatingplane": "oscillating-plane"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class SyntheticSpec:
    classes: int = 3
    sequences_per_class: int = 30
    n: int = 40
    d: int = 64
    dynamics: Dynamics = Dynamics.MONOTONE_PLANE
    noise_sigma: float = 0.05
    seed: int = 0
    layout: str = "shared"

    def __post_init__(self):
        if isinstance(self.dynamics, str):
            object.__setattr__(self, "dynamics", Dynamics.parse(self.dynamics))
        for name in ("classes", "sequences_per_class", "n", "d"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2 to hold a planted plane, got {self.d}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.layout not in ("shared", "orthogonal"):
            raise ValueError(f"layout must be 'shared' or 'orthogonal', got {self.layout!r}")
        if self.layout == "orthogonal" and self.d < 2 * self.classes:
            raise ValueError(f"orthogonal layout needs d >= {2 * self.classes}, got {self.d}")

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        """Parse ``CLASSES,PER,N,D,DYNAMICS,SIGMA,SEED[,LAYOUT]``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (7, 8):
            raise ValueError(f"expected CLASSES,PER,N,D,DYNAMICS,SIGMA,SEED, got {text!r}")
        kw = {}
        if len(parts) == 8:
            kw["layout"] = parts[7]
        return cls(int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]),
                   Dynamics.parse(parts[4]), float(parts[5]), int(parts[6]), **kw)

    def __str__(self):
        return (f"{self.classes},{self.sequences_per_class},{self.n},{self.d},"
                f"{self.dynamics.value},{self.noise_sigma!r},{self.seed},{self.layout}")


@dataclass
class SyntheticDataset:
    sequences: list
    labels: np.ndarray
    frames: list  # the planted W_c, one per class

    def __len__(self):
        return len(self.sequences)


def class_frames(spec: SyntheticSpec, rng) -> list:
    if spec.layout == "orthogonal":
        Q, _ = np.linalg.qr(rng.standard_normal((spec.d, 2 * spec.classes)))
        return [Q[:, 2 * c:2 * c + 2] for c in range(spec.classes)]
    Q, _ = np.linalg.qr(rng.standard_normal((spec.d, 2)))
    out = []
    for c in range(spec.classes):
        phi = np.pi * c / spec.classes
        R = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
        out.append(Q @ R)
    return out


def clean_trajectory(dynamics: Dynamics, W, n: int, c: int) -> np.ndarray:
    t = np.arange(1, n + 1) / n
    w1, w2 = W[:, 0], W[:, 1]
    if dynamics is Dynamics.MONOTONE_LINE:
        return np.outer(t, w1)
    if dynamics is Dynamics.MONOTONE_PLANE:
        return np.outer(t, w1) + 0.3 * np.outer(np.sin(2 * np.pi * t), w2)
    f = c + 1
    return np.outer(np.sin(2 * np.pi * f * t), w1) + 0.3 * np.outer(np.cos(2 * np.pi * f * t), w2)


def generate_synthetic(spec: SyntheticSpec) -> SyntheticDataset:
    """Labelled, unit-normalized sequences; identical output for identical specs."""
    rng = np.random.default_rng(spec.seed)
    frames = class_frames(spec, rng)
    seqs, labels = [], []
    for c, W in enumerate(frames):
        clean = clean_trajectory(spec.dynamics, W, spec.n, c)
        for _ in range(spec.sequences_per_class):
            X = clean + spec.noise_sigma * rng.standard_normal(clean.shape)
            seqs.append(FeatureSequence(X).normalize())
            labels.append(c)
    return SyntheticDataset(seqs, np.array(labels), frames)
