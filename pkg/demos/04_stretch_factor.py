"""How many hops does a message need per km of straight-line distance?

Above the percolation threshold the giant component connects far-apart
devices, but messages travel along streets and short radio links, not as
the crow flies.  The stretch factor is the mean ratio of hop count to
Euclidean distance over well-separated device pairs.  Since every hop
covers at most r km, the ratio can never beat 1/r; street detours and
unlucky gaps push it higher.
"""

import numpy as np

from streetperc.estimators import estimate_stretch, stretch_experiment
from streetperc.cox import sample_cox
from streetperc.geometry import rng_stream
from streetperc.graph import build_gilbert
from streetperc.tessellation import make_window

gamma = 20.0
r = 0.375
intensity = 1.5
window = make_window("PVT", gamma, 5.0)

# one simulation by hand first, to show the ingredients
tess, devices = sample_cox(
    "PVT", gamma, intensity, window, rng_stream(3, 0), rng_stream(3, 1)
)
g = build_gilbert(devices.positions, r, window)
est = estimate_stretch(g, min_dist=4.0)
print(f"single run: {est.n_pairs} pairs beyond 4 km, mu = {est.mu_hat:.3f}")
print(f"unreachable qualifying pairs: {est.n_unreachable}")

# now average over independent street systems
res = stretch_experiment("PVT", gamma, r, intensity, window, sims=20, seed=3)
print()
print(f"over {len(res.per_sim)} simulations: mu = {res.mu_hat:.3f} +- {res.se:.3f}")
print(f"hard lower bound 1/r = {1.0 / r:.3f}")
spread = np.array([e.mu_hat for e in res.per_sim])
print(f"per-simulation range: {spread.min():.3f} .. {spread.max():.3f}")
