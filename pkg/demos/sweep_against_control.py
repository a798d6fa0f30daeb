"""
Ranking threshold sweep against the unconstrained control
=========================================================

Every sweep value is run twice: once with the ordering constraints, once
with a vanishing hinge weight (the PCA subspace). The report keeps both.
"""

from grasspool import GrpParams, KernelSpec, SyntheticSpec
from grasspool.experiment import run_experiment

synth = SyntheticSpec(classes=3, sequences_per_class=10, n=40, d=32, dynamics="monotone-plane", seed=1)
report = run_experiment(synth, sweep="eta", values=[0.001, 0.1, 1.0], kernel=KernelSpec("rbf-proj"),
                        params=GrpParams(p=2))
print(report.to_text())

for key, secs in report.runtimes.items():
    print("%-40s %.2fs" % (key, secs))
