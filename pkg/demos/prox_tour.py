"""Tour of the scalar proximity operators and their brute-force oracle.

Each operator minimises penalty(t) + (a/2)(t - x)^2 coordinate-wise.  The
script tabulates the four penalty families over a sweep of inputs so the
shrinkage and thresholding behaviour is visible side by side, then
cross-checks a random instance of each against dense grid search.

Run:  python demos/prox_tour.py
"""

import numpy as np

from compfb import prox_logsum, prox_lrho, prox_oracle, prox_weighted_l1, prox_weighted_sq

a = 1.0
xs = np.linspace(0.0, 6.0, 13)

print("input     weighted-l1  weighted-sq      log-sum    |t|^0.5")
print("          (lam=1)      (lam=1)          (th=1,eps=0.1)")
for x in xs:
    row = (
        float(prox_weighted_l1(x, 1.0, a)),
        float(prox_weighted_sq(x, 1.0, a)),
        float(prox_logsum(x, 1.0, 0.1, a)),
        float(prox_lrho(x, 1.0, 0.5, a)),
    )
    print(f"{x:5.2f}     {row[0]:11.4f} {row[1]:12.4f} {row[2]:12.4f} {row[3]:11.4f}")

print("\nnote the jumps: the nonconvex penalties switch from 0 to a root of")
print("their stationarity equation once the input crosses a threshold.\n")

rng = np.random.default_rng(0)
checks = [
    ("l1", {"lam": 1.3}, lambda x: prox_weighted_l1(x, 1.3, a)),
    ("sq", {"lam": 0.7}, lambda x: prox_weighted_sq(x, 0.7, a)),
    ("logsum", {"theta": 1.1, "eps": 0.05}, lambda x: prox_logsum(x, 1.1, 0.05, a)),
    ("lrho", {"theta": 0.9, "rho": 0.4}, lambda x: prox_lrho(x, 0.9, 0.4, a)),
]
for kind, params, fn in checks:
    x = float(rng.uniform(-4, 4))
    closed = float(fn(x))
    grid = prox_oracle(kind, x, a, params, step=1e-5)
    print(f"{kind:>7}: x={x:+.4f}  closed form {closed:+.6f}  grid oracle {grid:+.6f}")
