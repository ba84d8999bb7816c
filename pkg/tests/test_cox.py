"""Device placement: length-uniform law, Poisson counts, sequential stream."""

import itertools

import numpy as np
import pytest
from scipy import stats

from streetperc.cox import (
    DeviceSet,
    read_devices_csv,
    sample_cox,
    sample_on_streets,
    sample_uniform_on_streets,
    sequential_sampler,
    write_devices_csv,
)
from streetperc.geometry import TorusWindow, rng_stream
from streetperc.tessellation import Tessellation, make_window, sample_street_system


def manual_tessellation(segments, side=10.0):
    return Tessellation(
        "PVT", TorusWindow(side, 1.0), np.asarray(segments, dtype=float)
    )


def test_uniform_on_single_segment():
    t = manual_tessellation([[[0.0, 2.0], [10.0, 2.0]]])
    pos, idx = sample_uniform_on_streets(t, 2000, rng_stream(71))
    assert np.all(idx == 0)
    assert np.allclose(pos[:, 1], 2.0)
    # arclength along the one segment should look uniform on [0, 10]
    res = stats.kstest(pos[:, 0], "uniform", args=(0.0, 10.0))
    assert res.pvalue > 0.01


def test_length_weighting_two_segments():
    # lengths 1 and 3: the short one gets a quarter of the draws
    t = manual_tessellation(
        [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 5.0], [3.0, 5.0]]]
    )
    n = 10_000
    _, idx = sample_uniform_on_streets(t, n, rng_stream(72))
    hits = int(np.sum(idx == 0))
    sd = np.sqrt(n * 0.25 * 0.75)
    assert abs(hits - n * 0.25) < 3 * sd


def test_length_weighting_chi2():
    rng = rng_stream(73)
    lengths = rng.random(10) * 4 + 0.5
    segs = np.zeros((10, 2, 2))
    segs[:, 0, 1] = np.arange(10)
    segs[:, 1, 1] = np.arange(10)
    segs[:, 1, 0] = lengths
    t = manual_tessellation(segs)
    n = 20_000
    _, idx = sample_uniform_on_streets(t, n, rng_stream(74))
    observed = np.bincount(idx, minlength=10)
    expected = n * lengths / lengths.sum()
    chi2 = np.sum((observed - expected) ** 2 / expected)
    assert chi2 < stats.chi2.ppf(0.99, df=9)


def test_sample_count_is_poisson():
    t = manual_tessellation([[[0.0, 0.0], [10.0, 0.0]]])  # nu1 = 10
    lam = 3.0
    rng = rng_stream(75)
    counts = np.array([len(sample_on_streets(t, lam, rng)) for _ in range(500)])
    mean = lam * t.nu1
    assert abs(counts.mean() - mean) < 3 * np.sqrt(mean / 500)
    # index of dispersion: (n-1) s^2 / mean ~ chi2(n-1) for Poisson data
    disp = (len(counts) - 1) * counts.var(ddof=1) / mean
    lo, hi = stats.chi2.ppf([0.005, 0.995], df=len(counts) - 1)
    assert lo < disp < hi


def test_sample_on_streets_edge_cases():
    t = manual_tessellation([[[0.0, 0.0], [10.0, 0.0]]])
    assert len(sample_on_streets(t, 0.0, rng_stream(76))) == 0
    with pytest.raises(ValueError):
        sample_on_streets(t, -1.0, rng_stream(76))
    with pytest.raises(ValueError):
        sample_on_streets(t, float("nan"), rng_stream(76))
    with pytest.raises(ValueError):
        sample_uniform_on_streets(t, -1, rng_stream(76))


def test_empty_street_system_rejected():
    t = manual_tessellation(np.zeros((0, 2, 2)))
    with pytest.raises(ValueError):
        sample_uniform_on_streets(t, 1, rng_stream(77))
    with pytest.raises(ValueError):
        sample_on_streets(t, 1.0, rng_stream(77))
    with pytest.raises(ValueError):
        next(sequential_sampler(t, rng_stream(77)))


def test_devices_lie_on_streets():
    w = make_window("PVT", 20.0, 3.0)
    t = sample_street_system("PVT", 20.0, w, rng_stream(78, 0))
    pos, idx = sample_uniform_on_streets(t, 500, rng_stream(78, 1))
    a = t.segments[idx, 0, :]
    b = t.segments[idx, 1, :]
    ab = b - a
    # project each point onto its own segment; residual should be roundoff
    frac = np.einsum("ij,ij->i", pos - a, ab) / np.einsum("ij,ij->i", ab, ab)
    assert np.all(frac > -1e-12) and np.all(frac < 1 + 1e-12)
    residual = np.linalg.norm(pos - (a + frac[:, None] * ab), axis=1)
    assert residual.max() < 1e-9 * w.side


def test_sequential_sampler_batch_invariance():
    w = make_window("PDT", 20.0, 3.0)
    t = sample_street_system("PDT", 20.0, w, rng_stream(79, 0))
    take = lambda batch: list(
        itertools.islice(sequential_sampler(t, rng_stream(79, 1), batch=batch), 50)
    )
    small = take(7)
    big = take(64)
    for (p1, s1), (p2, s2) in zip(small, big):
        assert np.array_equal(p1, p2)
        assert s1 == s2


def test_sequential_sampler_matches_block_sampler():
    w = make_window("PVT", 20.0, 3.0)
    t = sample_street_system("PVT", 20.0, w, rng_stream(80, 0))
    seq = list(itertools.islice(sequential_sampler(t, rng_stream(80, 1), batch=16), 16))
    pos, idx = sample_uniform_on_streets(t, 16, rng_stream(80, 1))
    assert np.array_equal(np.array([p for p, _ in seq]), pos)
    assert np.array_equal(np.array([s for _, s in seq]), idx)


def test_sample_cox_shapes():
    w = make_window("PDT", 20.0, 3.0)
    t, devices = sample_cox("PDT", 20.0, 0.5, w, rng_stream(81, 0), rng_stream(81, 1))
    assert t.kind == "PDT"
    assert devices.positions.shape == (len(devices), 2)
    assert devices.segment_index.shape == (len(devices),)
    assert devices.segment_index.min() >= 0
    assert devices.segment_index.max() < t.n_segments
    assert devices.origin is None


def test_device_set_validation():
    with pytest.raises(ValueError):
        DeviceSet(np.zeros((3, 2)), np.zeros(2, dtype=int))
    with pytest.raises(ValueError):
        DeviceSet(np.zeros((2, 2)), np.zeros(2, dtype=int), origin=2)
    d = DeviceSet(np.zeros((1, 2)), np.zeros(1, dtype=int), origin=0)
    assert len(d) == 1


def test_devices_csv_round_trip(tmp_path):
    w = make_window("PVT", 20.0, 3.0)
    t = sample_street_system("PVT", 20.0, w, rng_stream(82, 0))
    devices = sample_on_streets(t, 0.8, rng_stream(82, 1))
    path = tmp_path / "devices.csv"
    write_devices_csv(devices, path)
    back = read_devices_csv(path)
    assert np.array_equal(back.positions, devices.positions)
    assert np.array_equal(back.segment_index, devices.segment_index)
