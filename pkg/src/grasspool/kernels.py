"""Grassmann kernels between subspace descriptors and Gram-matrix assembly."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ShapeMismatch


class KernelKind(enum.Enum):
    LINEAR = "linear"
    PROJ_POLY = "poly-proj"
    PROJ_RBF = "rbf-proj"
    BC_POLY = "bc-poly"
    BC_RBF = "bc-rbf"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice.

    ``rbf-proj``  ``exp(beta ||A^T B||_F^2)``
    ``poly-proj`` ``(beta ||A^T B||_F^2) ** degree``
    ``bc-rbf``    ``exp(beta det(A^T B)^2)``
    ``bc-poly``   ``(beta det(A^T B)^2) ** degree``
    ``linear``    ``||A^T B||_F^2 = <A A^T, B B^T>``
    """

    kind: KernelKind = KernelKind.PROJ_RBF
    beta: float = 1.0
    degree: int = 2

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", KernelKind(self.kind))
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {self.degree}")


@dataclass
class GramMatrix:
    values: np.ndarray
    spec: Optional[KernelSpec] = None
    labels: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values)[0])


def _stack(points) -> np.ndarray:
    arrs = [np.asarray(getattr(P, "point", P), dtype=float) for P in points]
    if not arrs:
        raise ShapeMismatch("need at least one subspace")
    shape = arrs[0].shape
    for k, A in enumerate(arrs):
        if A.ndim != 2 or A.shape != shape:
            raise ShapeMismatch(f"subspace {k} has shape {A.shape}, expected {shape}")
    return np.stack(arrs)


def _apply(spec: KernelSpec, C: np.ndarray) -> np.ndarray:
    # C[..., p, p] holds the matrices A^T B
    kind = spec.kind
    if kind in (KernelKind.LINEAR, KernelKind.PROJ_POLY, KernelKind.PROJ_RBF):
        s = np.sum(C * C, axis=(-2, -1))
        if kind is KernelKind.LINEAR:
            return s
        if kind is KernelKind.PROJ_RBF:
            return np.exp(spec.beta * s)
        return (spec.beta * s) ** spec.degree
    s = np.linalg.det(C) ** 2
    if kind is KernelKind.BC_RBF:
        return np.exp(spec.beta * s)
    return (spec.beta * s) ** spec.degree


def kernel_eval(spec: KernelSpec, U1, U2) -> float:
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if U1.ndim != 2 or U1.shape != U2.shape:
        raise ShapeMismatch(f"subspace shapes differ: {U1.shape} vs {U2.shape}")
    return float(_apply(spec, U1.T @ U2))


def cross_gram(rows: Sequence, cols: Sequence, spec: KernelSpec) -> np.ndarray:
    """Kernel values between every subspace in ``rows`` and in ``cols``."""
    A = _stack(rows)
    B = _stack(cols)
    if A.shape[1:] != B.shape[1:]:
        raise ShapeMismatch(f"subspace shapes differ: {A.shape[1:]} vs {B.shape[1:]}")
    return _apply(spec, np.einsum("adp,bdq->abpq", A, B))


def gram(descriptors: Sequence, spec: KernelSpec, labels=None) -> GramMatrix:
    """Symmetric Gram matrix; the lower triangle mirrors the upper one exactly."""
    K = cross_gram(descriptors, descriptors, spec)
    K = np.triu(K) + np.triu(K, 1).T
    return GramMatrix(K, spec, None if labels is None else np.asarray(labels))


def gram_sum(g1: GramMatrix, g2: GramMatrix) -> GramMatrix:
    """Entrywise sum, e.g. one kernel per feature stream over the same samples."""
    if g1.values.shape != g2.values.shape:
        raise ShapeMismatch(f"Gram shapes differ: {g1.values.shape} vs {g2.values.shape}")
    labels = g1.labels if g1.labels is not None else g2.labels
    spec = g1.spec if g1.spec == g2.spec else None
    return GramMatrix(g1.values + g2.values, spec, labels)
