#!/usr/bin/env python3
"""Detecting persistent coupling between two channels of a time series.

Two experiments share the same "outdoor" driver signal.  In the first, the
"indoor" channel is a lagged, damped copy of it; in the second it is an
unrelated oscillation.  Each pair is delay-embedded (10 consecutive
readings of both channels per sample, m = 20 scalar elements), the
one-step evolution operator is fitted, and the eigendirections on the
unit circle are summed into a similarity block that is invariant under
time evolution.  Entry (i, j) of that block measures how similar elements
i and j remain for all time: genuinely coupled channels keep a high
cross-channel level, independent ones do not.
"""

import numpy as np

from rkhm import ScalarKernelSpec, delay_embed, invariant_term, modal_decompose, pf_fit
from rkhm._rand import normal, philox

spec = ScalarKernelSpec()


def invariant_block(coupled, seed=321):
    rng = philox(seed)
    steps = np.arange(161, dtype=float)
    outdoor = np.sin(2 * np.pi * steps / 24.0) + 0.3 * np.sin(2 * np.pi * steps / 7.5)
    if coupled:
        indoor = 0.8 * np.roll(outdoor, 3) + 0.1 * normal(rng, 161)
    else:
        indoor = np.sin(2 * np.pi * steps / 17.0 + 1.0) + 0.1 * normal(rng, 161)
    raw = np.stack([indoor, outdoor], axis=1)

    # jitter for element distinctness, normalize channels, then embed
    noisy = raw + 0.2 * normal(rng, raw.shape)
    normed = (noisy - noisy.mean(axis=0)) / noisy.std(axis=0)
    samples = delay_embed(normed, window=10)
    model = pf_fit(spec, samples[:151], epsilon=np.sqrt(1e-1))
    md = modal_decompose(model, unit_circle_tol=0.01)
    return np.abs(invariant_term(md)), model


for coupled in (True, False):
    cinv, model = invariant_block(coupled)
    cross = cinv[0::2, 1::2].mean()  # indoor lag i vs outdoor lag j
    within = cinv[0::2, 0::2][np.triu_indices(10, 1)].mean()
    tag = "lagged copy of outdoor" if coupled else "independent oscillation"
    print(f"indoor = {tag}")
    print(f"  basis T = {model.basis_size}, retained rank {sum(model.qr.ranks)}")
    print(f"  mean |invariant similarity|: cross-channel {cross:.3f}, "
          f"within-channel {within:.3f}\n")

print("the coupled pair keeps roughly twice the time-invariant similarity of")
print("the independent pair - the block separates interaction from mere")
print("co-existence even though both experiments share one driver signal.")
