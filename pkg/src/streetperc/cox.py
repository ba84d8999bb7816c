"""Device placement on street systems (Cox point process).

Conditioned on a street system, devices form a linear Poisson process on the
segments: the count is Poisson(lambda * nu1) and positions are independent,
length-uniform on the skeleton.  A sequential variant yields devices one at a
time from the same length-uniform law, for simulations that add devices until
some stopping event.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .tessellation import Tessellation


@dataclass
class DeviceSet:
    """Device positions plus the index of the segment each lies on.

    ``origin`` marks one distinguished device (or ``None``); it indexes into
    ``positions`` and is excluded from device counts by convention.
    """

    positions: np.ndarray
    segment_index: np.ndarray
    origin: Optional[int] = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.segment_index = np.asarray(self.segment_index, dtype=int).reshape(-1)
        if len(self.positions) != len(self.segment_index):
            raise ValueError(
                f"{len(self.positions)} positions vs "
                f"{len(self.segment_index)} segment indices"
            )
        if self.origin is not None and not 0 <= self.origin < len(self.positions):
            raise ValueError(f"origin {self.origin} out of range")

    def __len__(self) -> int:
        return len(self.positions)


def _check_streets(t: Tessellation) -> None:
    if t.n_segments == 0 or t.nu1 <= 0.0:
        raise ValueError("street system has no length to place devices on")


def _points_at_arclength(t: Tessellation, s: np.ndarray):
    """Map arclength positions ``s`` in ``[0, nu1)`` to points and segment ids."""
    cum = t.cumulative_lengths
    idx = np.searchsorted(cum, s, side="right")
    idx = np.minimum(idx, t.n_segments - 1)  # guard against s == nu1 roundoff
    offset = s - (cum[idx] - t.lengths[idx])
    frac = offset / t.lengths[idx]
    a = t.segments[idx, 0, :]
    b = t.segments[idx, 1, :]
    return a + frac[:, None] * (b - a), idx


def sample_uniform_on_streets(t: Tessellation, n: int, rng: np.random.Generator):
    """``n`` independent length-uniform points on the skeleton.

    Returns ``(positions, segment_index)``.
    """
    _check_streets(t)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    s = rng.random(n) * t.nu1
    return _points_at_arclength(t, s)


def sample_on_streets(
    t: Tessellation, intensity: float, rng: np.random.Generator
) -> DeviceSet:
    """Poisson(intensity * nu1) devices, length-uniform on the streets.

    ``intensity`` is linear (devices per km of street).
    """
    if not (math.isfinite(intensity) and intensity >= 0.0):
        raise ValueError(f"intensity must be finite and >= 0, got {intensity}")
    _check_streets(t)
    n = rng.poisson(intensity * t.nu1)
    pos, idx = sample_uniform_on_streets(t, int(n), rng)
    return DeviceSet(pos, idx)


def sample_cox(
    kind: str,
    gamma: float,
    intensity: float,
    window,
    rng_streets: np.random.Generator,
    rng_devices: np.random.Generator,
):
    """Sample a street system and devices on it; returns ``(tessellation, devices)``."""
    from .tessellation import sample_street_system

    t = sample_street_system(kind, gamma, window, rng_streets)
    return t, sample_on_streets(t, intensity, rng_devices)


def sequential_sampler(
    t: Tessellation, rng: np.random.Generator, batch: int = 256
) -> Iterator[tuple[np.ndarray, int]]:
    """Endless stream of length-uniform street points, one ``(point, segment)`` pair
    per iteration.

    Draws are batched internally; consuming k points uses exactly k uniform
    variates in order, so a run is reproducible given the generator state.
    """
    _check_streets(t)
    while True:
        pos, idx = sample_uniform_on_streets(t, batch, rng)
        for i in range(batch):
            yield pos[i], int(idx[i])


def write_devices_csv(devices: DeviceSet, path) -> None:
    """Write devices as CSV rows ``x,y,segment_index``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "segment_index"])
        for (x, y), seg in zip(devices.positions, devices.segment_index):
            w.writerow([repr(float(x)), repr(float(y)), int(seg)])


def read_devices_csv(path) -> DeviceSet:
    """Read a device CSV back into a :class:`DeviceSet` (origin not persisted)."""
    pos, idx = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pos.append([float(row["x"]), float(row["y"])])
            idx.append(int(row["segment_index"]))
    return DeviceSet(
        np.asarray(pos, dtype=float).reshape(-1, 2), np.asarray(idx, dtype=int)
    )
