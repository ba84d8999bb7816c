"""Square torus windows, seeded RNG streams, and planar Poisson point sampling.

All coordinates are in kilometres; planar intensities are per km^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for the stream ``(seed, *key)``.

    Streams with the same seed but different keys are statistically
    independent, and the same ``(seed, *key)`` always reproduces the same
    sample sequence.  Simulation code keys each (tessellation, placement)
    run by its indices so that runs can be scheduled in any order, or in
    parallel, without changing the output.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class TorusWindow:
    """Square observation window ``[0, side)^2`` with periodic identification.

    ``band`` is the width of the replication band used when tracing a
    tessellation periodically: points within ``band`` of a window edge get
    copied to the opposite side before triangulating, so that the clipped
    tessellation closes up seamlessly on the torus.

    Parameters
    ----------
    side: float
        Window side length in km, > 0.
    band: float
        Replication band width in km, ``0 <= band < side / 2``.
    """

    side: float
    band: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.side) and self.side > 0.0):
            raise ValueError(f"window side must be finite and > 0, got {self.side}")
        if not (0.0 <= self.band < self.side / 2.0):
            raise ValueError(
                f"band must satisfy 0 <= band < side/2, got band={self.band} side={self.side}"
            )

    @property
    def area(self) -> float:
        return self.side * self.side

    def wrap(self, points):
        """Map points to their canonical representatives in ``[0, side)^2``."""
        out = np.mod(np.asarray(points, dtype=float), self.side)
        # np.mod of a tiny negative value can round up to side itself
        out[out >= self.side] = 0.0
        return out

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points lying in ``[0, side)^2``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((p >= 0.0) & (p < self.side), axis=1)


def sample_poisson_points(
    intensity: float, window: TorusWindow, rng: np.random.Generator
) -> np.ndarray:
    """Sample a homogeneous planar Poisson process in the window.

    Returns an ``(n, 2)`` array with ``n ~ Poisson(intensity * side^2)`` and
    points i.i.d. uniform in ``[0, side)^2``.
    """
    if not (math.isfinite(intensity) and intensity >= 0.0):
        raise ValueError(f"intensity must be finite and >= 0, got {intensity}")
    n = rng.poisson(intensity * window.area)
    return rng.random((n, 2)) * window.side


def replicate_band(points, window: TorusWindow) -> np.ndarray:
    """Append the periodic copies of all points within ``band`` of an edge.

    Each input point within ``band`` of a window side (or corner) is copied
    across by +/- side per axis, so a tessellation of the output restricted
    to the window equals the periodic tessellation.  Output points lie in
    ``[-band, side + band)^2``, originals first, copies after in a fixed
    deterministic order.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return pts.reshape(0, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
    if not np.all((pts >= 0.0) & (pts < window.side)):
        raise ValueError("all points must lie inside [0, side)^2 before replication")
    side, band = window.side, window.band
    out = [pts]
    lo, hi = -band, side + band
    for sx in (-side, 0.0, side):
        for sy in (-side, 0.0, side):
            if sx == 0.0 and sy == 0.0:
                continue
            shifted = pts + (sx, sy)
            mask = (
                (shifted[:, 0] >= lo)
                & (shifted[:, 0] < hi)
                & (shifted[:, 1] >= lo)
                & (shifted[:, 1] < hi)
            )
            if np.any(mask):
                out.append(shifted[mask])
    return np.concatenate(out, axis=0)


def torus_delta(a, b, window: TorusWindow) -> np.ndarray:
    """Minimum-image displacement ``a - b`` on the torus (broadcasting)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return d - np.round(d / window.side) * window.side


def torus_distance(a, b, window: TorusWindow):
    """Torus (minimum over periodic images) distance between points.

    Accepts single points of shape ``(2,)`` or arrays ``(n, 2)`` with
    broadcasting; never exceeds the planar Euclidean distance.
    """
    d = torus_delta(a, b, window)
    return np.hypot(d[..., 0], d[..., 1])
