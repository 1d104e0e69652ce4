#!/usr/bin/env python3
"""Accuracy-vs-stability trade-off when estimating the evolution operator.

The threshold epsilon controls how small a residual direction may be and
still be normalized: small epsilon keeps almost everything (accurate in
exact arithmetic, but the normalizing factors grow like 1/epsilon and
amplify rounding), large epsilon truncates early (stable, but biased).
The sweep below fits the operator for growing basis sizes T and tracks
how much the matrix-valued prediction residual at a fixed future snapshot
still changes between consecutive T - the settling rate of the estimator.
A seeded relative perturbation of the Gram entries (1e-7, roughly single
precision) makes the instability visible in double precision.
"""

import numpy as np

from rkhm import ScalarKernelSpec, gen_interacting, sweep_prediction_errors

spec = ScalarKernelSpec()
m, s_index, t_values = 50, 30, list(range(1, 21))
seeds = range(4)

print(f"mean-coupled system, m={m} elements, criterion at snapshot S={s_index}")
print("T  " + "  ".join(f"eps2={e:g}" for e in (1e-8, 1e-5, 1e-2)))
curves = {}
for eps2 in (1e-8, 1e-5, 1e-2):
    per_seed = []
    for seed in seeds:
        series = gen_interacting(m=m, steps=max(t_values) + 1 + s_index, sigma=0.01, seed=seed)
        out = sweep_prediction_errors(
            series, spec, np.sqrt(eps2), s_index, t_values,
            gram_jitter=1e-7, jitter_seed=seed,
        )
        per_seed.append([
            np.linalg.norm(out["errors"][t + 1] - out["errors"][t], 2)
            for t in t_values[:-1]
        ])
    curves[eps2] = np.mean(per_seed, axis=0)

for k, t in enumerate(t_values[:-1]):
    print(f"{t:2d}  " + "  ".join(f"{curves[e][k]:9.4f}" for e in (1e-8, 1e-5, 1e-2)))

print(
    "\nthe smallest eps2 descends furthest but its tail destabilizes once"
    "\nrounding noise is amplified; the largest settles early on a higher"
    "\nplateau - pick epsilon between the two regimes."
)
