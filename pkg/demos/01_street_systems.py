"""
Random street systems on a torus
================================

Two models of a city street layout, drawn side by side.  Both start
from a planar Poisson process of "city centers"; the streets are either
the cell boundaries (Voronoi) or the center-to-center links (Delaunay).
The seed density is calibrated so that both produce the same expected
street length per unit area, here 20 km of street per square km.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from streetperc.geometry import rng_stream
from streetperc.tessellation import make_window, sample_street_system

gamma = 20.0   # target street length density, km per km^2
side = 4.0     # window edge, km

fig, axes = plt.subplots(1, 2, figsize=(9, 4.6), sharey=True)
for ax, kind in zip(axes, ("PVT", "PDT")):
    window = make_window(kind, gamma, side)
    streets = sample_street_system(kind, gamma, window, rng_stream(2024, 0))
    for (x0, y0), (x1, y1) in streets.segments:
        ax.plot([x0, x1], [y0, y1], color="k", lw=0.5)
    density = streets.nu1 / side**2
    ax.set_title(f"{kind}: {density:.1f} km/km$^2$ (target {gamma:g})")
    ax.set_xlim(0, side)
    ax.set_ylim(0, side)
    ax.set_aspect("equal")

fig.tight_layout()
fig.savefig("street_systems.svg")
print("wrote street_systems.svg")

# the calibration is statistical, so individual draws fluctuate; average
# a few windows to see the target emerge
for kind in ("PVT", "PDT"):
    window = make_window(kind, gamma, side)
    dens = [
        sample_street_system(kind, gamma, window, rng_stream(2024, 1, i)).nu1
        / side**2
        for i in range(20)
    ]
    print(f"{kind}: mean density over 20 draws = {np.mean(dens):.2f} km/km^2")
