"""Industry benchmarks and hold-out evaluation.

Chain-Ladder with distribution-free standard errors, the expected
loss-ratio method, Bornhuetter-Ferguson as the quota-weighted blend of
the two, and the evaluation harness that scores predictions against the
realized lower-triangle payments.
"""

import numpy as np

import dirichlet_reserving as dr
from dirichlet_reserving.validation import PredictionRecord, realized_ultimates

tri = dr.most_recent_years(dr.load_triangle(dr.example_insurer_path()), 10)
lr = dr.to_loss_ratios(tri)
holdout = dr.load_holdout(dr.example_holdout_path())
realized = realized_ultimates(tri, holdout)

cl = dr.cl_fit(lr)
print("Chain-Ladder factors:", np.array2string(cl.factors, precision=3))
print("factor standard errors:", np.array2string(cl.factor_se, precision=4))

elr = 0.75  # externally supplied expected ultimate loss ratio
print("\naccident year: CL ultimate | BF blend | expected method")
for i in range(1, lr.m + 1):
    bf = dr.bf_predict(cl, lr, i, elr)
    ex = dr.expected_method(lr, i, elr)
    print(f"  {bf.year}: {cl.ultimates[i - 1]:.3f} | {bf.ultimate:.3f} | {ex.ultimate:.3f}")

# score Chain-Ladder intervals against the realized outcomes
preds = [
    PredictionRecord("example", p.year, "cl", p.ultimate, p.lo, p.hi)
    for p in cl.predictions(0.95)
]
report = dr.evaluate(preds, {("example", y): v for y, v in realized.items()})
print("\nper-year deviation / interval containment / interval length:")
for row in report.aggregates:
    print(f"  {row.accident_year}: {row.rmse:.3f} / {row.cov95:.0f} / {row.len95:.3f}")
