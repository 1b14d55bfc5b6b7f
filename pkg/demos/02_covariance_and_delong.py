"""
Asymptotic covariance of correlated accuracy estimates
======================================================

Several markers measured on the same subjects give correlated wAUC
estimates.  The analytic covariance comes from per-subject placement
values for the full AUC and from a quadrature over estimated densities
for partial AUCs; a cluster bootstrap is available as a cross-check.
"""

import numpy as np

from wroc.covariance import bootstrap_covariance, sigma_matrix
from wroc.dataset import MarkerDataset, SubjectRecord
from wroc.measures import WeightMeasure

rng = np.random.default_rng(11)

# Two markers per subject, correlated through a shared subject effect.
def record(tag, i, shift):
    base = rng.normal(0.0, 0.7)
    return SubjectRecord(f"{tag}{i}", {
        (1, 1): (base + rng.normal(shift, 0.7),),
        (2, 1): (base + rng.normal(shift * 0.8, 0.7),),
    })

data = MarkerDataset(
    diseased=tuple(record("d", i, 1.0) for i in range(40)),
    nondiseased=tuple(record("h", j, 0.0) for j in range(40)),
    n_markers=2, n_times=1)

# Full-AUC covariance via placement values.  With one observation per
# subject this is exactly the classic structural-components estimator.
est = sigma_matrix(data, None, WeightMeasure.full_auc(), midrank=True)
print("placement covariance (x1e4):")
print(np.round(est.sigma * 1e4, 3))
print(f"method: {est.method}, psd repaired: {est.repaired}")

# The diseased / nondiseased contributions add up exactly.
print("diseased part + nondiseased part == total:",
      np.array_equal(est.sigma, est.sigma_diseased + est.sigma_nondiseased))

# Partial AUC needs the weight density against the nondiseased
# distribution, so the estimate switches to the quadrature path.
part = sigma_matrix(data, None, WeightMeasure.partial_auc(0.0, 0.4))
print(f"\npauc covariance method: {part.method}")
print(np.round(part.sigma * 1e4, 3))

# Subject-level bootstrap as an independent check on the diagonal.
boot = bootstrap_covariance(data, None, WeightMeasure.full_auc(),
                            n_boot=500, seed=2024)
ratio = np.diag(boot.sigma) / np.diag(est.sigma)
print(f"\nbootstrap/analytic variance ratio per marker: {np.round(ratio, 3)}")
