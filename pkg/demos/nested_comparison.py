"""Testing whether a regressor can be dropped, and how often that goes wrong.

When the smaller model is true, RP_NH still prefers the larger one with a
probability that depends only on the number of dropped coefficients r.  This
script compares that limit with a quick Monte Carlo and then runs the same
comparison on data where the dropped coefficient is not zero.
"""
import numpy as np

from rpselect import Dataset, ModelSpec, ZeroConstraints, compare_nested, prob_select_restricted

rng = np.random.default_rng(11)
n, reps, alpha = 150, 300, 0.5
Z = rng.normal(size=(n, 3))
full = ModelSpec((0, 1, 2))

for r in (1, 2):
    # design columns are [intercept, z1, z2, z3]; drop the last r
    drop = ZeroConstraints.trailing(4, r)
    kept = 0
    for k in range(reps):
        y = 1.0 + 0.8 * Z[:, 0] + np.random.default_rng([11, r, k]).normal(size=n)
        kept += compare_nested(Dataset(y, Z), full, drop, alpha).restricted_selected
    print(f"r={r}: smaller model kept {kept / reps:.3f} of the time, "
          f"limit {prob_select_restricted(r):.4f}")

# A real effect on z3 should almost always keep it in.
y = 1.0 + 0.8 * Z[:, 0] + 0.5 * Z[:, 2] + rng.normal(size=n)
y[:10] += 15.0  # a few gross outliers do not hide the effect
rep = compare_nested(Dataset(y, Z), full, ZeroConstraints((3,), 4), alpha)
print(f"\nwith a true z3 effect: L = {rep.statistic_L:.2f}, "
      f"restricted model selected: {rep.restricted_selected}")
