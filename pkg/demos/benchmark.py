"""
Cross-validated comparison with simpler regressors
==================================================

Median absolute error of the quantile network against a plain
MAE-trained network and LASSO on age-like data.
"""

from mccqr import SyntheticSpec, TrainConfig, generate
from mccqr.bench import bench_table, cross_validate

X, age, _, _ = generate(SyntheticSpec("age-like", n=3000, d=200, seed=0))
results = cross_validate(X, age, folds=5, seed=0, config=TrainConfig(seed=0), draws=500)
print(bench_table(results))
