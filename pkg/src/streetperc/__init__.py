"""Percolation of device-to-device networks on random street systems.

Streets are the edges of a Voronoi or Delaunay tessellation over planar
Poisson seeds on a square torus; devices form a Poisson process along the
streets; two devices are connected when closer than a fixed radius.  The
package estimates the critical device intensity, the percolation
probability, and the hop-count stretch factor of the resulting graphs.
"""

from .cox import (
    DeviceSet,
    read_devices_csv,
    sample_cox,
    sample_on_streets,
    sample_uniform_on_streets,
    sequential_sampler,
    write_devices_csv,
)
from .estimators import (
    CrossingCurvePoint,
    InsufficientPairsError,
    LogisticFit,
    StretchEstimate,
    StretchResult,
    StretchSample,
    ThetaSample,
    bernoulli_threshold,
    crossing_curve,
    crossing_indicator,
    default_device_budget,
    estimate_crossing_probability,
    estimate_lambda_c,
    estimate_stretch,
    fit_logistic,
    lambda_c_from_fit,
    pbm_threshold,
    poisson_upper_tail,
    read_crossing_points_csv,
    read_theta_samples_csv,
    run_theta_experiment,
    stretch_experiment,
    theta_curve,
    theta_hat,
    theta_standard_error,
    write_crossing_points_csv,
    write_theta_samples_csv,
)
from .geometry import (
    TorusWindow,
    replicate_band,
    rng_stream,
    sample_poisson_points,
    torus_delta,
    torus_distance,
)
from .graph import (
    GilbertGraph,
    IncrementalGilbert,
    SpatialGrid,
    WrapUnionFind,
    build_gilbert,
    edge_windings,
    has_wrapping_component,
    hop_distances,
    largest_wrapping_component,
    planar_subgraph,
    wrap_union_find,
)
from .tessellation import (
    Tessellation,
    build_pdt,
    build_pvt,
    build_tessellation,
    default_band,
    delaunay_triangulate,
    make_window,
    read_segments_csv,
    sample_street_system,
    seed_intensity_for_gamma,
    total_length,
    write_segments_csv,
)

__version__ = "0.1.0"
