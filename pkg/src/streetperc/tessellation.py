"""Street systems as Poisson-Voronoi / Poisson-Delaunay tessellations on a torus.

A street system is built in three steps: sample planar Poisson seeds in the
window, replicate the boundary bands so the construction closes periodically,
then triangulate (PDT) or take the Voronoi cell boundaries (PVT) and clip the
resulting segments back to the window.  The total clipped street length nu1
is cached on the tessellation; its expectation per unit area is the length
intensity gamma (km of street per km^2).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay, QhullError, Voronoi

from .geometry import TorusWindow, replicate_band, sample_poisson_points

KINDS = ("PVT", "PDT")

# Relative length below which a clipped sliver is discarded.
_LENGTH_EPS = 1e-12


@dataclass
class Tessellation:
    """A street system: clipped segments in the window plus cached lengths.

    ``segments`` has shape ``(m, 2, 2)`` (endpoint pairs).  Segments are
    clipped to ``[0, side]^2``; streets running exactly along the far
    boundary lines ``x = side`` / ``y = side`` are excluded since they are
    torus-identified with the near boundary.
    """

    kind: str
    window: TorusWindow
    segments: np.ndarray
    lengths: np.ndarray = field(init=False)
    nu1: float = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        segs = np.asarray(self.segments, dtype=float)
        if segs.size == 0:
            segs = segs.reshape(0, 2, 2)
        if segs.ndim != 3 or segs.shape[1:] != (2, 2):
            raise ValueError(f"segments must have shape (m, 2, 2), got {segs.shape}")
        self.segments = segs
        d = segs[:, 1, :] - segs[:, 0, :]
        self.lengths = np.hypot(d[:, 0], d[:, 1])
        self.nu1 = float(self.lengths.sum())

    @cached_property
    def cumulative_lengths(self) -> np.ndarray:
        """Nondecreasing cumulative segment lengths; final entry equals nu1.

        This is the inverse-CDF table for length-uniform sampling on the
        street skeleton.
        """
        return np.cumsum(self.lengths)

    @property
    def n_segments(self) -> int:
        return self.segments.shape[0]


def seed_intensity_for_gamma(gamma: float, kind: str) -> float:
    """Planar Poisson seed intensity whose tessellation has length intensity gamma.

    The mean street length per unit area of a Voronoi (resp. Delaunay)
    tessellation over seeds of intensity rho is ``2 sqrt(rho)`` (resp.
    ``32/(3 pi) sqrt(rho)``), so the seed intensities are::

        PVT: (gamma / 2)^2          PDT: (3 pi gamma / 32)^2
    """
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise ValueError(f"gamma must be finite and > 0, got {gamma}")
    if kind == "PVT":
        return (gamma / 2.0) ** 2
    if kind == "PDT":
        return (3.0 * math.pi * gamma / 32.0) ** 2
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def default_band(seed_intensity: float, side: float) -> float:
    """Replication band width: three typical cell diameters, capped below side/2.

    The cap keeps the window valid; if it binds, the window is small relative
    to the cells and the periodic construction is unreliable.
    """
    band = 3.0 / math.sqrt(seed_intensity)
    cap = 0.45 * side
    if band > cap:
        warnings.warn(
            f"replication band {band:.3g} km clamped to {cap:.3g} km; "
            "window is small relative to the tessellation cells",
            stacklevel=2,
        )
        band = cap
    return band


def make_window(kind: str, gamma: float, side: float) -> TorusWindow:
    """Window with the default replication band for this street model."""
    return TorusWindow(side, default_band(seed_intensity_for_gamma(gamma, kind), side))


def delaunay_triangulate(seeds) -> np.ndarray:
    """Delaunay triangulation as an ``(t, 3)`` array of seed indices.

    Every triangle's open circumdisk contains no seed; cocircular ties are
    broken deterministically by the underlying Qhull library.  Fewer than
    three seeds, or an all-collinear configuration, raises ``ValueError``.
    """
    pts = np.asarray(seeds, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"seeds must have shape (n, 2), got {pts.shape}")
    if pts.shape[0] < 3:
        raise ValueError(f"need at least 3 seeds, got {pts.shape[0]}")
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise ValueError(f"degenerate seed configuration: {exc}") from exc
    if tri.simplices.shape[0] == 0:
        raise ValueError("degenerate seed configuration: no triangles produced")
    return tri.simplices.copy()


def circumcenters(points, triangles) -> np.ndarray:
    """Circumcenters of the given triangles, one row per triangle."""
    pts = np.asarray(points, dtype=float)
    tri = np.asarray(triangles, dtype=int)
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    ab, ac = b - a, c - a
    det = 2.0 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    nab = (ab * ab).sum(axis=1)
    nac = (ac * ac).sum(axis=1)
    ux = (ac[:, 1] * nab - ab[:, 1] * nac) / det
    uy = (ab[:, 0] * nac - ac[:, 0] * nab) / det
    return a + np.stack([ux, uy], axis=1)


def _clip_segments(segments: np.ndarray, side: float) -> np.ndarray:
    """Clip segments to the closed box ``[0, side]^2`` (Liang-Barsky).

    Segments lying entirely on the far boundary lines ``x = side`` or
    ``y = side`` are dropped: on the torus they coincide with the near
    boundary and would be double counted.
    """
    segs = np.asarray(segments, dtype=float)
    if segs.size == 0:
        return segs.reshape(0, 2, 2)
    a = segs[:, 0, :]
    d = segs[:, 1, :] - a
    t0 = np.zeros(len(segs))
    t1 = np.ones(len(segs))
    valid = np.ones(len(segs), dtype=bool)
    for axis in (0, 1):
        for p, q in ((-d[:, axis], a[:, axis]), (d[:, axis], side - a[:, axis])):
            par = p == 0.0
            valid &= ~(par & (q < 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                r = q / p
            ent = ~par & (p < 0.0)
            t0 = np.where(ent, np.maximum(t0, r), t0)
            lea = ~par & (p > 0.0)
            t1 = np.where(lea, np.minimum(t1, r), t1)
    valid &= t0 < t1
    a, d, t0, t1 = a[valid], d[valid], t0[valid], t1[valid]
    clipped = np.stack([a + t0[:, None] * d, a + t1[:, None] * d], axis=1)
    lengths = np.hypot(*(clipped[:, 1, :] - clipped[:, 0, :]).T)
    keep = lengths > _LENGTH_EPS * side
    eps = _LENGTH_EPS * side
    for axis in (0, 1):
        on_far = np.all(np.abs(clipped[:, :, axis] - side) < eps, axis=1)
        keep &= ~on_far
    return clipped[keep]


def build_pdt(seeds, window: TorusWindow) -> Tessellation:
    """Delaunay street system from band-replicated seeds, clipped to the window."""
    tri = delaunay_triangulate(seeds)
    pts = np.asarray(seeds, dtype=float)
    edges = np.concatenate([tri[:, (0, 1)], tri[:, (1, 2)], tri[:, (2, 0)]])
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    return Tessellation("PDT", window, _clip_segments(pts[edges], window.side))


# Distant sentinel seeds make every window-relevant Voronoi ridge finite and
# let the construction degrade gracefully for very small seed sets.
_GHOST_FACTOR = 100.0


def build_pvt(seeds, window: TorusWindow) -> Tessellation:
    """Voronoi street system (cell boundaries) from band-replicated seeds."""
    pts = np.asarray(seeds, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"seeds must have shape (n, 2), got {pts.shape}")
    if pts.shape[0] < 2:
        raise ValueError(f"need at least 2 seeds, got {pts.shape[0]}")
    far = _GHOST_FACTOR * window.side
    c = window.side / 2.0
    ghosts = np.array(
        [[c - far, c - far], [c + far, c - far], [c + far, c + far], [c - far, c + far]]
    )
    try:
        vor = Voronoi(np.concatenate([pts, ghosts]))
    except QhullError as exc:
        raise ValueError(f"degenerate seed configuration: {exc}") from exc
    idx = np.array([rv for rv in vor.ridge_vertices if -1 not in rv], dtype=int)
    if idx.size == 0:
        raise ValueError("degenerate seed configuration: no finite cell boundaries")
    segs = vor.vertices[idx]
    return Tessellation("PVT", window, _clip_segments(segs, window.side))


def build_tessellation(kind: str, seeds, window: TorusWindow) -> Tessellation:
    if kind == "PVT":
        return build_pvt(seeds, window)
    if kind == "PDT":
        return build_pdt(seeds, window)
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def sample_street_system(
    kind: str, gamma: float, window: TorusWindow, rng: np.random.Generator
) -> Tessellation:
    """Sample seeds, replicate the band, and build the street system.

    The seed intensity is calibrated so the expected length intensity is
    ``gamma``; see :func:`seed_intensity_for_gamma`.
    """
    rho = seed_intensity_for_gamma(gamma, kind)
    seeds = sample_poisson_points(rho, window, rng)
    return build_tessellation(kind, replicate_band(seeds, window), window)


def total_length(t: Tessellation) -> float:
    """Total street length inside the window; equals the cached ``nu1``."""
    return float(t.lengths.sum())


def write_segments_csv(t: Tessellation, path) -> None:
    """Write segments as CSV rows ``ax,ay,bx,by``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ax", "ay", "bx", "by"])
        for (ax, ay), (bx, by) in t.segments:
            w.writerow([repr(float(ax)), repr(float(ay)), repr(float(bx)), repr(float(by))])


def read_segments_csv(path) -> np.ndarray:
    """Read a segment CSV back into an ``(m, 2, 2)`` array."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(
                [
                    [float(row["ax"]), float(row["ay"])],
                    [float(row["bx"]), float(row["by"])],
                ]
            )
    return np.asarray(rows, dtype=float).reshape(-1, 2, 2)
