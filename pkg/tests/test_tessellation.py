import numpy as np
import pytest
from scipy.spatial import Delaunay, Voronoi

from streetperc.geometry import TorusWindow, replicate_band, rng_stream
from streetperc.tessellation import (
    Tessellation,
    build_pdt,
    build_pvt,
    circumcenters,
    default_band,
    delaunay_triangulate,
    make_window,
    read_segments_csv,
    sample_street_system,
    seed_intensity_for_gamma,
    total_length,
    write_segments_csv,
)


def lattice_seeds(n):
    xs, ys = np.meshgrid(np.arange(n, dtype=float), np.arange(n, dtype=float))
    return np.column_stack([xs.ravel(), ys.ravel()])


def test_seed_intensity_calibration_formulas():
    assert seed_intensity_for_gamma(20.0, "PVT") == 100.0
    assert seed_intensity_for_gamma(1.0, "PVT") == 0.25
    assert np.isclose(
        seed_intensity_for_gamma(20.0, "PDT"), (3 * np.pi * 20 / 32) ** 2
    )
    with pytest.raises(ValueError):
        seed_intensity_for_gamma(0.0, "PVT")
    with pytest.raises(ValueError):
        seed_intensity_for_gamma(20.0, "XYZ")


def test_default_band_clamps_with_warning():
    assert default_band(100.0, 10.0) == 0.3
    with pytest.warns(UserWarning):
        b = default_band(0.01, 10.0)
    assert b == 4.5


def test_delaunay_minimal_and_degenerate():
    tri = delaunay_triangulate([[0, 0], [1, 0], [0, 1]])
    assert tri.shape == (1, 3)
    with pytest.raises(ValueError):
        delaunay_triangulate([[0, 0], [1, 1]])
    with pytest.raises(ValueError):
        delaunay_triangulate([[0, 0], [1, 1], [2, 2], [3, 3]])  # collinear
    # cocircular square: split by one diagonal, deterministically
    sq = delaunay_triangulate([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert sq.shape == (2, 3)
    assert np.array_equal(sq, delaunay_triangulate([[0, 0], [1, 0], [1, 1], [0, 1]]))


def test_empty_circumcircle_brute_force():
    pts = rng_stream(21, 0).random((100, 2)) * 10.0
    tri = delaunay_triangulate(pts)
    centers = circumcenters(pts, tri)
    radii = np.hypot(*(pts[tri[:, 0]] - centers).T)
    # no seed strictly inside any circumdisk (tiny slack for roundoff)
    d = np.hypot(
        pts[None, :, 0] - centers[:, None, 0], pts[None, :, 1] - centers[:, None, 1]
    )
    assert np.all(d >= radii[:, None] * (1 - 1e-9))


def test_voronoi_delaunay_duality_count():
    pts = rng_stream(22, 0).random((150, 2)) * 10.0
    assert len(Voronoi(pts).vertices) == len(Delaunay(pts).simplices)


def test_lattice_total_lengths():
    # unit lattice on a torus of side n: exact street length is known for
    # both constructions (Delaunay adds one sqrt(2) diagonal per cell)
    n = 6
    w = TorusWindow(float(n), band=2.5)
    rep = replicate_band(lattice_seeds(n), w)
    pdt = build_pdt(rep, w)
    pvt = build_pvt(rep, w)
    assert np.isclose(pdt.nu1, n * n * (2 + np.sqrt(2)), atol=1e-9)
    assert np.isclose(pvt.nu1, 2.0 * n * n, atol=1e-9)
    assert np.isclose(total_length(pdt), pdt.nu1)


def test_two_seed_bisector():
    w = TorusWindow(10.0, band=0.0)
    t = build_pvt(np.array([[3.0, 5.0], [7.0, 5.0]]), w)
    assert np.isclose(t.nu1, 10.0, atol=1e-9)
    assert np.allclose(t.segments[:, :, 0], 5.0)  # all on x = 5


def test_voronoi_vertices_equidistant():
    w = TorusWindow(10.0)
    pts = replicate_band(rng_stream(23, 0).random((120, 2)) * 10.0, TorusWindow(10.0, 1.0))
    vor = Voronoi(pts)
    for (p1, p2), verts in zip(vor.ridge_points, vor.ridge_vertices):
        for v in verts:
            if v == -1:
                continue
            d1 = np.hypot(*(vor.vertices[v] - pts[p1]))
            d2 = np.hypot(*(vor.vertices[v] - pts[p2]))
            assert abs(d1 - d2) < 1e-9 * w.side


def test_clipping_semantics():
    w = TorusWindow(10.0, band=0.0)
    segs = np.array(
        [
            [[2.0, 2.0], [4.0, 2.0]],     # interior, length 2
            [[-1.0, 5.0], [1.0, 5.0]],    # crosses x=0, keeps length 1
            [[10.0, 0.0], [10.0, 3.0]],   # lies on far boundary: dropped
            [[11.0, 1.0], [12.0, 1.0]],   # fully outside: dropped
        ]
    )
    t = Tessellation("PDT", w, segs[:1])
    assert t.nu1 == 2.0
    from streetperc.tessellation import _clip_segments

    clipped = _clip_segments(segs, 10.0)
    lengths = np.hypot(*(clipped[:, 1] - clipped[:, 0]).T)
    assert np.isclose(sorted(lengths), [1.0, 2.0]).all()


def test_periodicity_invariance():
    # translating all seeds (mod the window) leaves nu1 unchanged
    gamma, side = 20.0, 5.0
    w = make_window("PVT", gamma, side)
    seeds = rng_stream(31, 0).random((int(100 * w.area), 2)) * side
    t0 = build_pvt(replicate_band(seeds, w), w)
    shifted = np.mod(seeds + np.array([1.7, 2.9]), side)
    t1 = build_pvt(replicate_band(shifted, w), w)
    assert np.isclose(t0.nu1, t1.nu1, rtol=1e-9)
    # shifting by a full period is the identity, up to roundoff in the mod
    same = np.mod(seeds + np.array([side, 0.0]), side)
    t2 = build_pvt(replicate_band(same, w), w)
    assert t0.segments.shape == t2.segments.shape
    assert np.allclose(t0.segments, t2.segments, atol=1e-9)


def test_sample_street_system_deterministic():
    w = make_window("PDT", 20.0, 4.0)
    a = sample_street_system("PDT", 20.0, w, rng_stream(9, 0, 0))
    b = sample_street_system("PDT", 20.0, w, rng_stream(9, 0, 0))
    assert np.array_equal(a.segments, b.segments)
    assert a.kind == "PDT" and a.n_segments > 0
    assert np.isclose(a.cumulative_lengths[-1], a.nu1)


def test_length_intensity_monte_carlo():
    # desk-scale version of the calibration check; the acceptance suite
    # runs the full-window variant
    gamma, side = 20.0, 5.0
    for kind in ("PVT", "PDT"):
        w = make_window(kind, gamma, side)
        vals = [
            sample_street_system(kind, gamma, w, rng_stream(40, 0, i)).nu1 / w.area
            for i in range(40)
        ]
        assert abs(np.mean(vals) - gamma) / gamma < 0.05


def test_degenerate_builders():
    w = TorusWindow(10.0, 0.0)
    with pytest.raises(ValueError):
        build_pvt(np.array([[1.0, 1.0]]), w)
    with pytest.raises(ValueError):
        build_pdt(np.array([[1.0, 1.0], [2.0, 2.0]]), w)
    with pytest.raises(ValueError):
        Tessellation("PVT", w, np.zeros((3, 2)))  # wrong shape


def test_segments_csv_round_trip(tmp_path):
    w = make_window("PVT", 20.0, 3.0)
    t = sample_street_system("PVT", 20.0, w, rng_stream(55, 0))
    path = tmp_path / "segs.csv"
    write_segments_csv(t, path)
    back = read_segments_csv(path)
    assert np.array_equal(back, t.segments)
