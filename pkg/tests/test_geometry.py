import numpy as np
import pytest
from scipy import stats

from streetperc.geometry import (
    TorusWindow,
    replicate_band,
    rng_stream,
    sample_poisson_points,
    torus_distance,
)


def test_window_validation():
    w = TorusWindow(10.0, 1.0)
    assert w.area == 100.0
    with pytest.raises(ValueError):
        TorusWindow(0.0)
    with pytest.raises(ValueError):
        TorusWindow(-3.0)
    with pytest.raises(ValueError):
        TorusWindow(10.0, -0.1)
    with pytest.raises(ValueError):
        TorusWindow(10.0, 5.0)  # band must stay below side/2


def test_wrap_and_contains():
    w = TorusWindow(10.0)
    wrapped = w.wrap(np.array([[10.0, -0.5], [3.0, 4.0], [-1e-18, 23.0]]))
    assert np.all((wrapped >= 0) & (wrapped < 10.0))
    assert np.allclose(wrapped[1], [3.0, 4.0])
    assert list(w.contains(np.array([[0.0, 0.0], [10.0, 5.0]]))) == [True, False]


def test_poisson_sampling_basics():
    w = TorusWindow(10.0)
    rng = rng_stream(1, 0)
    assert sample_poisson_points(0.0, w, rng).shape == (0, 2)
    with pytest.raises(ValueError):
        sample_poisson_points(-1.0, w, rng)
    a = sample_poisson_points(5.0, w, rng_stream(3, 1))
    b = sample_poisson_points(5.0, w, rng_stream(3, 1))
    assert np.array_equal(a, b)
    assert np.all((a >= 0) & (a < 10.0))


def test_poisson_count_moments():
    # mean within 3 sigma and dispersion index consistent with Poisson
    w = TorusWindow(10.0)
    counts = np.array(
        [len(sample_poisson_points(100.0, w, rng_stream(7, i))) for i in range(1000)]
    )
    mean = counts.mean()
    assert abs(mean - 10_000) < 3 * np.sqrt(10_000 / 1000)
    d = (len(counts) - 1) * counts.var(ddof=1) / mean
    lo, hi = stats.chi2.ppf([0.005, 0.995], len(counts) - 1)
    assert lo < d < hi


def test_replicate_band_corner_cases():
    w0 = TorusWindow(10.0, 0.0)
    pts = np.array([[0.1, 0.1], [5.0, 5.0]])
    assert np.array_equal(replicate_band(pts, w0), pts)

    w1 = TorusWindow(10.0, 1.0)
    out = replicate_band(np.array([[0.1, 0.1]]), w1)
    expect = {(0.1, 0.1), (10.1, 0.1), (0.1, 10.1), (10.1, 10.1)}
    assert set(map(tuple, np.round(out, 12))) == expect

    assert len(replicate_band(np.array([[5.0, 5.0]]), w1)) == 1

    with pytest.raises(ValueError):
        replicate_band(np.array([[10.0, 1.0]]), w1)  # outside [0, side)


def test_replicate_band_monotone_and_range():
    w_small = TorusWindow(10.0, 0.5)
    w_big = TorusWindow(10.0, 2.0)
    pts = rng_stream(11, 0).random((200, 2)) * 10.0
    small = replicate_band(pts, w_small)
    big = replicate_band(pts, w_big)
    assert len(pts) <= len(small) <= len(big)
    assert np.all((big >= -2.0) & (big < 12.0))
    # originals come first, untouched
    assert np.array_equal(big[:200], pts)


def test_torus_distance_examples():
    w = TorusWindow(10.0)
    assert torus_distance(np.array([2.0, 3.0]), np.array([2.0, 3.0]), w) == 0.0
    assert np.isclose(
        torus_distance(np.array([0.5, 5.0]), np.array([9.5, 5.0]), w), 1.0
    )
    assert np.isclose(
        torus_distance(np.array([0.0, 0.0]), np.array([5.0, 5.0]), w),
        5.0 * np.sqrt(2.0),
    )


def test_torus_distance_properties():
    w = TorusWindow(7.0)
    rng = rng_stream(13, 0)
    a = rng.random((300, 2)) * 7.0
    b = rng.random((300, 2)) * 7.0
    c = rng.random((300, 2)) * 7.0
    dab = torus_distance(a, b, w)
    assert np.all(dab <= np.hypot(*(a - b).T) + 1e-12)
    assert np.allclose(dab, torus_distance(b, a, w))
    # triangle inequality through a third point
    assert np.all(dab <= torus_distance(a, c, w) + torus_distance(c, b, w) + 1e-12)
    # minimum over the 9 periodic images, brute force
    shifts = np.array([[sx, sy] for sx in (-7.0, 0.0, 7.0) for sy in (-7.0, 0.0, 7.0)])
    brute = np.min(
        [np.hypot(*(a - (b + s)).T) for s in shifts], axis=0
    )
    assert np.allclose(dab, brute)


def test_rng_streams_are_independent_and_stable():
    x = rng_stream(5, 0, 1).random(4)
    assert np.array_equal(x, rng_stream(5, 0, 1).random(4))
    assert not np.array_equal(x, rng_stream(5, 0, 2).random(4))
    assert not np.array_equal(x, rng_stream(6, 0, 1).random(4))
