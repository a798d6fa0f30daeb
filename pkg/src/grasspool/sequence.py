"""Ordered feature sequences (one row per frame)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFinite, ShapeMismatch


@dataclass(frozen=True)
class FeatureSequence:
    """An ``n x d`` matrix whose row ``t`` is the feature of frame ``t``.

    ``zero_rows`` flags rows that were exactly zero when the sequence was
    normalized; they stay zero.
    """

    frames: np.ndarray
    normalized: bool = False
    zero_rows: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        frames = as_frames(self.frames)
        object.__setattr__(self, "frames", frames)
        if self.zero_rows is None:
            object.__setattr__(self, "zero_rows", np.zeros(frames.shape[0], dtype=bool))

    @property
    def n(self) -> int:
        return self.frames.shape[0]

    @property
    def d(self) -> int:
        return self.frames.shape[1]

    def normalize(self) -> "FeatureSequence":
        """Return a copy with unit-norm rows (no-op if already normalized)."""
        if self.normalized:
            return self
        # divide by the row max first so huge entries cannot overflow the norm
        peak = np.max(np.abs(self.frames), axis=1) if self.d else np.zeros(self.n)
        zero = peak == 0.0
        Y = self.frames / np.where(zero, 1.0, peak)[:, None]
        norms = np.linalg.norm(Y, axis=1)
        return FeatureSequence(Y / np.where(zero, 1.0, norms)[:, None], normalized=True, zero_rows=zero)

    def reversed(self) -> "FeatureSequence":
        return FeatureSequence(self.frames[::-1].copy(), self.normalized, self.zero_rows[::-1].copy())


def as_frames(X) -> np.ndarray:
    """Coerce a FeatureSequence or array-like to a finite 2-D float array."""
    if isinstance(X, FeatureSequence):
        return X.frames
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeMismatch(f"feature sequence must be 2-D (n x d), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite("feature sequence contains NaN or Inf")
    return X


def as_sequence(X) -> FeatureSequence:
    return X if isinstance(X, FeatureSequence) else FeatureSequence(X)
