"""Estimate the critical device intensity on Voronoi streets.

Devices are dropped on the street system at intensity lambda (per km of
street) and talk within r km.  For each lambda we simulate fresh streets
plus devices and record how often a connected component wraps around the
torus.  A logistic fit to that crossing curve gives the intensity where
wrapping becomes the rule rather than the exception.

Takes about half a minute.
"""

import numpy as np

from streetperc.estimators import fit_logistic, crossing_curve, lambda_c_from_fit, pbm_threshold
from streetperc.tessellation import make_window

gamma = 20.0
r_gamma = 2.5          # dimensionless radius: r in units of 1/gamma
r = r_gamma / gamma
side = 6.0

# center the sweep on the classical disc-model benchmark
center = gamma * pbm_threshold(r_gamma)
grid = center * np.linspace(0.6, 1.6, 9)

window = make_window("PVT", gamma, side)
points = crossing_curve("PVT", gamma, r, grid, window, runs=40, seed=7)

print("lambda    wrap fraction")
for pt in points:
    bar = "#" * int(round(40 * pt.p_hat))
    print(f"{pt.intensity:7.3f}   {pt.p_hat:4.2f} {bar}")

fit = fit_logistic(points)
lam_c = lambda_c_from_fit(fit, p=0.6)
print()
print(f"fitted threshold:    lambda_c / gamma = {lam_c / gamma:.4f}")
print(f"disc-model benchmark:                  {pbm_threshold(r_gamma):.4f}")
print("(streets force devices onto lines, so the threshold sits above the")
print(" benchmark at small radii and approaches it as r * gamma grows)")
