"""One-vs-rest SVM on a precomputed kernel, trained by SMO in the dual."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ShapeMismatch, SingleClass, NotPsdWarning
from .kernels import GramMatrix, KernelSpec

KKT_TOL = 1e-3
MAX_SWEEPS = 10_000
NEG_EIG_TOL = 1e-6
_TAU = 1e-12


@dataclass
class SvmModel:
    """Trained one-vs-rest model; row ``k`` of ``alphas`` belongs to ``classes[k]``."""

    classes: np.ndarray
    alphas: np.ndarray
    labels_pm: np.ndarray
    biases: np.ndarray
    C: float
    spec: Optional[KernelSpec]
    kkt_residuals: np.ndarray
    train_accuracy: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.any(self.alphas > 0.0, axis=0))

    @property
    def n_train(self) -> int:
        return self.alphas.shape[1]

    def decision_function(self, K_rows) -> np.ndarray:
        """Scores ``(m_test, n_classes)`` from kernel rows against the training set."""
        K_rows = np.atleast_2d(np.asarray(K_rows, dtype=float))
        if K_rows.shape[1] != self.n_train:
            raise ShapeMismatch(f"kernel rows have length {K_rows.shape[1]}, model has {self.n_train} training samples")
        return K_rows @ (self.alphas * self.labels_pm).T + self.biases

    def predict(self, K_rows) -> np.ndarray:
        # argmax keeps the lowest class index on ties
        return self.classes[np.argmax(self.decision_function(K_rows), axis=1)]


def _binary_smo(K, y, C, tol=KKT_TOL, max_iter=None):
    """Dual of the soft-margin SVM with labels ``y`` in {-1, +1}.

    Working pairs are picked with the second-order rule of Fan, Chen & Lin
    (maximal violator plus best curvature-adjusted partner). Returns
    ``(alpha, bias, kkt_residual)``.
    """
    m = y.size
    max_iter = max_iter or MAX_SWEEPS * m
    alpha = np.zeros(m)
    G = -np.ones(m)  # gradient of 0.5 a^T Q a - sum(a), Q = yy^T * K
    diag = np.diag(K)
    pos, neg = y > 0, y < 0
    gap = np.inf
    for _ in range(max_iter):
        r = -y * G
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(r[up])])
        r_max = r[i]
        gap = r_max - r[low].min()
        if gap <= tol:
            break
        cand = low & (r < r_max)
        b = r_max - r[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, _TAU)
        j = int(np.flatnonzero(cand)[np.argmin(-(b * b) / a)])
        curv = max(diag[i] + diag[j] - 2.0 * K[i, j], _TAU)
        delta = (r_max - r[j]) / curv
        # alpha_i += y_i * delta, alpha_j -= y_j * delta keeps sum(y * alpha) fixed
        delta = min(delta, C - alpha[i] if y[i] > 0 else alpha[i], alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] += y[i] * delta
        alpha[j] -= y[j] * delta
        alpha[i] = min(max(alpha[i], 0.0), C)
        alpha[j] = min(max(alpha[j], 0.0), C)
        G += y * delta * (K[:, i] - K[:, j])

    r = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(r[free].mean())
    else:
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        hi = r[up].max() if up.any() else r[low].min()
        lo = r[low].min() if low.any() else hi
        bias = 0.5 * float(hi + lo)
    return alpha, bias, float(gap)


def clip_spectrum(K):
    w, V = np.linalg.eigh(K)
    return (V * np.maximum(w, 0.0)) @ V.T


def svm_train(gram, labels, C: float = 1.0) -> SvmModel:
    """Train one binary SVM per class (that class vs the rest).

    Parameters
    ----------
    gram : GramMatrix or ndarray
        Symmetric ``m x m`` kernel matrix on the training samples.
    labels : array-like of length m
    C : float
        Box constraint on the dual coefficients.
    """
    spec = gram.spec if isinstance(gram, GramMatrix) else None
    K = np.asarray(gram.values if isinstance(gram, GramMatrix) else gram, dtype=float)
    labels = np.asarray(labels)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != labels.size:
        raise ShapeMismatch(f"Gram shape {K.shape} does not match {labels.size} labels")
    if not C > 0:
        raise ValueError(f"C must be > 0, got {C}")
    classes = np.unique(labels)
    if classes.size < 2:
        raise SingleClass(f"need at least 2 classes, got {classes.size}")
    K = 0.5 * (K + K.T)
    min_eig = np.linalg.eigvalsh(K)[0]
    if min_eig < -NEG_EIG_TOL:
        warnings.warn(f"Gram matrix is indefinite (min eigenvalue {min_eig:.3g}); clipping spectrum", NotPsdWarning, stacklevel=2)
        K = clip_spectrum(K)

    alphas, ys, biases, gaps = [], [], [], []
    for c in classes:
        y = np.where(labels == c, 1.0, -1.0)
        a, b, g = _binary_smo(K, y, C)
        alphas.append(a)
        ys.append(y)
        biases.append(b)
        gaps.append(g)
    model = SvmModel(
        classes=classes,
        alphas=np.array(alphas),
        labels_pm=np.array(ys),
        biases=np.array(biases),
        C=float(C),
        spec=spec,
        kkt_residuals=np.array(gaps),
        train_accuracy=float("nan"),
    )
    model.train_accuracy = float(np.mean(model.predict(K) == labels))
    return model


def svm_predict(model: SvmModel, kernel_row):
    """Label and per-class scores for one sample given its kernel row."""
    kernel_row = np.asarray(kernel_row, dtype=float)
    if kernel_row.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D kernel row, got shape {kernel_row.shape}")
    scores = model.decision_function(kernel_row)[0]
    return model.classes[int(np.argmax(scores))], scores
