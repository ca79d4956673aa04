"""
NOMA power allocation in one beam
=================================

The weak user gets exactly the power that lifts it to the minimum rate and
the strong user takes the rest. A brute-force search over the split confirms
this is the best feasible point.
"""

import numpy as np

from wearnoma.allocation import beam_rates, grid_oracle, noma_beam_power

gains = np.array([10.0, 1.0])    # 1/W, strong then weak
P, Rmin = 3.0, 1.0

p, ok = noma_beam_power(gains, P, Rmin)
print("closed form:", p, "feasible:", ok, "rates:", beam_rates(gains, p))

best, se = grid_oracle(gains, P, Rmin, grid_points=100_000)
print("grid search:", best, "sum SE:", se)

# %%
# The weak user receives more power than the strong one exactly when its
# minimum-rate power exceeds half the budget.
for g2 in (0.2, 1.0, 5.0):
    p, ok = noma_beam_power([10.0, g2], P, 0.5)
    print(f"g2 = {g2:4.1f}: p = {np.round(p, 3)}, weak user gets more: {p[1] > p[0]}")

# %%
# Infeasible beams: the weak user cannot reach Rmin even alone; the beam
# falls back to serving only the strong user.
print(noma_beam_power([10.0, 0.1], 3.0, 2.0))
