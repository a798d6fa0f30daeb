"""
Classifying pooled sequences with Grassmann kernels
===================================================

Sequences from three classes of planted dynamics are pooled, compared
with a projection-metric kernel and classified by a one-vs-rest SVM.
"""

import numpy as np

from grasspool import GrpParams, KernelSpec, SyntheticSpec, generate_synthetic, gram, pool_grp, svm_train
from grasspool.kernels import cross_gram

data = generate_synthetic(SyntheticSpec(classes=3, sequences_per_class=12, n=40, d=32, seed=4))
points = [pool_grp(s, GrpParams(p=2)).point for s in data.sequences]

# hold out every third sequence
test = np.arange(len(points)) % 3 == 0
train_pts = [p for p, m in zip(points, test) if not m]
test_pts = [p for p, m in zip(points, test) if m]

spec = KernelSpec("rbf-proj", beta=1.0)
G = gram(train_pts, spec, labels=data.labels[~test])
print("Gram %dx%d, min eigenvalue %.3g" % (G.m, G.m, G.min_eigenvalue()))

model = svm_train(G, data.labels[~test], C=1.0)
pred = model.predict(cross_gram(test_pts, train_pts, spec))
print("train accuracy %.3f, test accuracy %.3f" % (model.train_accuracy, np.mean(pred == data.labels[test])))
print("support vectors per class:", (model.alphas > 0).sum(axis=1))
