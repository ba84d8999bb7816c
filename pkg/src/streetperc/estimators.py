"""Monte Carlo estimators for percolation on street systems.

Three quantities are estimated.  The critical device intensity lambda_c
comes from a logistic fit to the fraction of simulations containing a
wrapping component.  The percolation probability theta comes from
sequential runs that record how many devices were needed before the
origin's component wraps; averaging Poisson upper tails over those counts
gives theta at every intensity without further simulation.  The stretch
factor mu is the mean ratio of hop count to Euclidean distance over
far-apart device pairs in the wrapping component.

Two closed-form benchmarks are included: the dense-street disc-model
threshold and the implicit Bernoulli-bond equation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson

from .cox import sample_on_streets, sequential_sampler
from .geometry import TorusWindow, rng_stream
from .graph import (
    GilbertGraph,
    IncrementalGilbert,
    build_gilbert,
    has_wrapping_component,
    hop_distances,
    largest_wrapping_component,
    planar_subgraph,
)
from .tessellation import sample_street_system

# The origin is a marked extra point and is not counted in N; flipping this
# shifts every recorded N by one.
ORIGIN_COUNTS_IN_N = False


@dataclass(frozen=True)
class CrossingCurvePoint:
    """One crossing-probability estimate: fraction of runs with a wrapping
    component at this device intensity."""

    intensity: float
    p_hat: float
    runs: int


@dataclass(frozen=True)
class LogisticFit:
    """Fit of logit(p) = a * intensity + b, with OLS standard errors."""

    a: float
    b: float
    se_a: float
    se_b: float
    cov_ab: float
    n_points: int


@dataclass(frozen=True)
class ThetaSample:
    """Device count at the first moment the origin's component wraps.

    ``tessellation`` and ``placement`` index the run; ``nu1`` is the street
    length of that tessellation.  ``censored`` marks runs stopped at the
    device budget before wrapping, in which case ``n_devices`` is the budget
    (a lower bound on the true count).
    """

    tessellation: int
    placement: int
    n_devices: int
    nu1: float
    censored: bool = False


@dataclass(frozen=True)
class StretchSample:
    """One far-apart pair: hop count and planar Euclidean separation."""

    hops: int
    euclid: float


@dataclass(frozen=True)
class StretchEstimate:
    """Mean hops-per-km over qualifying pairs of one graph.

    ``slope`` is a through-origin regression of hops on distance, reported
    as a diagnostic alongside the mean-of-ratios ``mu_hat``.
    ``n_unreachable`` counts qualifying pairs with no wrap-free path.
    """

    mu_hat: float
    n_pairs: int
    se: float
    n_unreachable: int
    slope: float


@dataclass(frozen=True)
class StretchResult:
    """Aggregate over independent simulations: mean of per-simulation
    ``mu_hat`` values with its standard error."""

    mu_hat: float
    se: float
    per_sim: tuple[StretchEstimate, ...]
    n_skipped: int


class InsufficientPairsError(ValueError):
    """No device pair qualifies for the stretch estimate."""

    def __init__(self, msg: str, max_separation: float):
        super().__init__(msg)
        self.max_separation = max_separation


def poisson_upper_tail(k, mean):
    """P(J >= k) for J ~ Poisson(mean), via the regularized incomplete gamma.

    Accepts scalars or arrays (broadcast); absolute error below 1e-12.
    """
    k_arr = np.asarray(k)
    mean_arr = np.asarray(mean, dtype=float)
    if not np.all(np.equal(np.mod(k_arr, 1), 0) & (k_arr >= 0)):
        raise ValueError("k must contain nonnegative integers")
    if not np.all(np.isfinite(mean_arr) & (mean_arr >= 0.0)):
        raise ValueError("mean must be finite and >= 0")
    out = poisson.sf(k_arr.astype(np.int64) - 1, mean_arr)
    if np.isscalar(k) and np.isscalar(mean):
        return float(out)
    return out


def _sample_arrays(samples: Sequence[ThetaSample]):
    ks = np.array([s.tessellation for s in samples], dtype=np.int64)
    ns = np.array([s.n_devices for s in samples], dtype=np.int64)
    nu1 = np.array([s.nu1 for s in samples], dtype=float)
    cen = np.array([s.censored for s in samples], dtype=bool)
    return ks, ns, nu1, cen


def _check_intensity(intensity: float) -> None:
    if not (math.isfinite(intensity) and intensity >= 0.0):
        raise ValueError(f"intensity must be finite and >= 0, got {intensity}")


def _per_tessellation_means(samples, intensity):
    ks, ns, nu1, cen = _sample_arrays(samples)
    n_cen = int(cen.sum())
    if n_cen:
        warnings.warn(
            f"{n_cen} censored sample(s) contribute 0 to the estimate",
            stacklevel=3,
        )
    p = poisson_upper_tail(ns, intensity * nu1)
    p = np.where(cen, 0.0, p)
    means = []
    for k in np.unique(ks):
        means.append(p[ks == k].mean())
    return np.array(means)


def theta_hat(samples: Sequence[ThetaSample], intensity: float) -> float:
    """Percolation probability estimate at the given device intensity.

    Averages P(J >= N) with J ~ Poisson(intensity * nu1) over placements
    within each tessellation, then over tessellations.  Censored samples
    contribute 0 (their true N exceeds the recorded budget) and trigger a
    warning.  Reusable at any intensity without new simulation.
    """
    if not samples:
        raise ValueError("no samples")
    _check_intensity(intensity)
    return float(_per_tessellation_means(samples, intensity).mean())


def theta_standard_error(samples: Sequence[ThetaSample], intensity: float) -> float:
    """Standard error of theta_hat across tessellations.

    Placements within one tessellation share its streets and are dependent,
    so the error is computed over per-tessellation means.  NaN when only
    one tessellation is present.
    """
    if not samples:
        raise ValueError("no samples")
    _check_intensity(intensity)
    means = _per_tessellation_means(samples, intensity)
    if len(means) < 2:
        return float("nan")
    return float(means.std(ddof=1) / math.sqrt(len(means)))


def theta_curve(samples: Sequence[ThetaSample], intensities) -> np.ndarray:
    """theta_hat evaluated over an intensity grid."""
    return np.array([theta_hat(samples, lam) for lam in np.asarray(intensities)])


def default_device_budget(gamma: float, r: float, nu1: float) -> int:
    """Sequential-run cap: 50x the expected device count at the dense-street
    benchmark threshold for this (gamma, r)."""
    lam_ref = gamma * pbm_threshold(r * gamma)
    return int(math.ceil(50.0 * lam_ref * nu1))


def run_theta_experiment(
    kind: str,
    gamma: float,
    r: float,
    window: TorusWindow,
    n: int,
    M: int,
    seed: int,
    max_devices: Optional[int] = None,
    stream: tuple[int, ...] = (),
) -> list[ThetaSample]:
    """Sequential device-count samples: n tessellations x M placements.

    Each placement run draws an origin uniformly on the streets, then adds
    devices one at a time until the origin's component wraps the torus,
    recording the count N (origin excluded).  Runs that reach the device
    cap are flagged censored rather than dropped.  Run (k, i) draws from
    streams keyed by (k, i), so results do not depend on execution order.
    """
    if n < 1 or M < 1:
        raise ValueError(f"n and M must be >= 1, got n={n}, M={M}")
    samples = []
    for k in range(n):
        tess = sample_street_system(
            kind, gamma, window, rng_stream(seed, 0, *stream, k)
        )
        budget = max_devices
        if budget is None:
            budget = default_device_budget(gamma, r, tess.nu1)
        for i in range(M):
            draws = sequential_sampler(tess, rng_stream(seed, 1, *stream, k, i))
            inc = IncrementalGilbert(window, r)
            ox, oy = next(draws)[0]  # the marked origin, index 0
            inc.insert(ox, oy)
            count = 0
            censored = False
            while True:
                if inc.wrapped(0):
                    break
                if count >= budget:
                    censored = True
                    break
                (x, y), _ = next(draws)
                inc.insert(x, y)
                count += 1
            if ORIGIN_COUNTS_IN_N:
                count += 1
            samples.append(ThetaSample(k, i, count, tess.nu1, censored))
    return samples


def crossing_indicator(
    kind: str,
    gamma: float,
    r: float,
    intensity: float,
    window: TorusWindow,
    seed: int,
    stream: tuple[int, ...] = (),
) -> bool:
    """One run: fresh streets, fresh devices, test for a wrapping component."""
    tess = sample_street_system(kind, gamma, window, rng_stream(seed, 0, *stream))
    devices = sample_on_streets(tess, intensity, rng_stream(seed, 1, *stream))
    g = build_gilbert(devices.positions, r, window)
    return has_wrapping_component(g)


def estimate_crossing_probability(
    kind: str,
    gamma: float,
    r: float,
    intensity: float,
    window: TorusWindow,
    runs: int,
    seed: int,
    stream: tuple[int, ...] = (),
) -> CrossingCurvePoint:
    """Fraction of independent runs whose device graph wraps the torus."""
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    _check_intensity(intensity)
    hits = sum(
        crossing_indicator(kind, gamma, r, intensity, window, seed, (*stream, j))
        for j in range(runs)
    )
    return CrossingCurvePoint(float(intensity), hits / runs, runs)


def crossing_curve(
    kind: str,
    gamma: float,
    r: float,
    intensities,
    window: TorusWindow,
    runs: int,
    seed: int,
    stream: tuple[int, ...] = (),
) -> list[CrossingCurvePoint]:
    """Crossing probability over an intensity grid, one point per intensity."""
    return [
        estimate_crossing_probability(
            kind, gamma, r, float(lam), window, runs, seed, (*stream, li)
        )
        for li, lam in enumerate(np.asarray(intensities, dtype=float))
    ]


def fit_logistic(
    points: Sequence[CrossingCurvePoint], method: str = "ols"
) -> LogisticFit:
    """Fit logit(p) = a * intensity + b to a crossing curve.

    Estimates p_hat of 0 or 1 are clipped to [1/(2 runs), 1 - 1/(2 runs)]
    before taking logits.  The default is least squares on the logits;
    ``method="mle"`` maximizes the binomial likelihood instead (standard
    errors then come from the observed information).
    """
    if len(points) < 2:
        raise ValueError(f"need at least 2 points, got {len(points)}")
    lams = np.array([p.intensity for p in points], dtype=float)
    phat = np.array([p.p_hat for p in points], dtype=float)
    runs = np.array([p.runs for p in points], dtype=float)
    if np.any((phat < 0) | (phat > 1)) or np.any(runs < 1):
        raise ValueError("p_hat must lie in [0,1] and runs must be >= 1")
    lo = 1.0 / (2.0 * runs)
    saturated = (phat <= lo) | (phat >= 1.0 - lo)
    if np.all(saturated):
        raise ValueError(
            "all points saturated at 0 or 1; curve cannot be fitted"
        )
    if np.ptp(lams) == 0.0:
        raise ValueError("all points share one intensity; slope is undefined")
    p = np.clip(phat, lo, 1.0 - lo)
    y = np.log(p / (1.0 - p))
    if method == "ols":
        if len(points) == 2:
            a = (y[1] - y[0]) / (lams[1] - lams[0])
            b = y[0] - a * lams[0]
            return LogisticFit(float(a), float(b), 0.0, 0.0, 0.0, 2)
        (a, b), cov = np.polyfit(lams, y, 1, cov=True)
        return LogisticFit(
            float(a),
            float(b),
            float(math.sqrt(max(cov[0, 0], 0.0))),
            float(math.sqrt(max(cov[1, 1], 0.0))),
            float(cov[0, 1]),
            len(points),
        )
    if method == "mle":
        return _fit_logistic_mle(lams, phat, runs, a0_b0=None)
    raise ValueError(f"unknown method {method!r}")


def _fit_logistic_mle(lams, phat, runs, a0_b0) -> LogisticFit:
    from scipy.optimize import minimize

    successes = phat * runs

    def nll(theta):
        eta = theta[0] * lams + theta[1]
        return -np.sum(successes * eta - runs * np.logaddexp(0.0, eta))

    if a0_b0 is None:
        lo = 1.0 / (2.0 * runs)
        p = np.clip(phat, lo, 1.0 - lo)
        y = np.log(p / (1.0 - p))
        a0_b0 = np.polyfit(lams, y, 1)
    res = minimize(nll, np.asarray(a0_b0, dtype=float), method="BFGS")
    a, b = res.x
    eta = a * lams + b
    sig = 1.0 / (1.0 + np.exp(-eta))
    w = runs * sig * (1.0 - sig)
    info = np.array(
        [[np.sum(w * lams * lams), np.sum(w * lams)], [np.sum(w * lams), np.sum(w)]]
    )
    cov = np.linalg.inv(info)
    return LogisticFit(
        float(a),
        float(b),
        float(math.sqrt(max(cov[0, 0], 0.0))),
        float(math.sqrt(max(cov[1, 1], 0.0))),
        float(cov[0, 1]),
        len(lams),
    )


def lambda_c_from_fit(fit: LogisticFit, p: float = 0.6) -> float:
    """Intensity where the fitted curve reaches crossing probability ``p``.

    With the default p = 0.6 this is (log 1.5 - b) / a.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not fit.a > 0.0:
        raise ValueError(
            f"fit slope must be positive (got a={fit.a}); "
            "curve does not indicate percolation"
        )
    return (math.log(p / (1.0 - p)) - fit.b) / fit.a


def estimate_lambda_c(
    kind: str,
    gamma: float,
    r: float,
    window: TorusWindow,
    intensities,
    runs: int,
    seed: int,
    p: float = 0.6,
    stream: tuple[int, ...] = (),
) -> tuple[float, LogisticFit, list[CrossingCurvePoint]]:
    """End-to-end critical intensity estimate from a fresh crossing curve."""
    points = crossing_curve(kind, gamma, r, intensities, window, runs, seed, stream)
    fit = fit_logistic(points)
    return lambda_c_from_fit(fit, p), fit, points


def estimate_stretch(g: GilbertGraph, min_dist: float = 4.0) -> StretchEstimate:
    """Mean hops-per-km over far-apart pairs of the largest wrapping component.

    Pairs qualify when their planar (unwrapped) Euclidean separation exceeds
    ``min_dist``; that threshold normally exceeds the torus diameter, so hop
    counts are taken in the zero-winding subgraph, where no path can shorten
    itself by wrapping around the window.  Pairs without such a path are
    counted in ``n_unreachable`` and excluded from the mean.
    """
    if not 0.0 <= min_dist:
        raise ValueError(f"min_dist must be >= 0, got {min_dist}")
    comp = largest_wrapping_component(g)
    if comp is None:
        raise ValueError("graph has no wrapping component")
    pos = g.positions[comp]
    m = len(comp)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    iu, ju = np.triu_indices(m, k=1)
    sep = dist[iu, ju]
    qualify = sep > min_dist
    if not np.any(qualify):
        max_sep = float(sep.max()) if sep.size else 0.0
        raise InsufficientPairsError(
            f"no pair separation exceeds {min_dist} km "
            f"(largest observed: {max_sep:.6g} km)",
            max_sep,
        )
    hops_all = hop_distances(planar_subgraph(g), sources=comp)
    hops = hops_all[:, comp][iu[qualify], ju[qualify]]
    sep_q = sep[qualify]
    reachable = np.isfinite(hops)
    n_unreachable = int((~reachable).sum())
    if not np.any(reachable):
        raise InsufficientPairsError(
            "no qualifying pair is connected without wrapping "
            f"({n_unreachable} pairs beyond {min_dist} km, all unreachable)",
            float(sep_q.max()),
        )
    ratios = hops[reachable] / sep_q[reachable]
    n_pairs = int(reachable.sum())
    se = float(ratios.std(ddof=1) / math.sqrt(n_pairs)) if n_pairs > 1 else float("nan")
    d = sep_q[reachable]
    slope = float(np.sum(hops[reachable] * d) / np.sum(d * d))
    return StretchEstimate(float(ratios.mean()), n_pairs, se, n_unreachable, slope)


def stretch_experiment(
    kind: str,
    gamma: float,
    r: float,
    intensity: float,
    window: TorusWindow,
    sims: int,
    seed: int,
    min_dist: float = 4.0,
    stream: tuple[int, ...] = (),
) -> StretchResult:
    """Aggregate stretch estimate over independent simulations.

    Simulations with no wrapping component or no qualifying pair are skipped
    and counted, not silently dropped.
    """
    if sims < 1:
        raise ValueError(f"sims must be >= 1, got {sims}")
    per_sim = []
    n_skipped = 0
    for s in range(sims):
        tess = sample_street_system(kind, gamma, window, rng_stream(seed, 0, *stream, s))
        devices = sample_on_streets(tess, intensity, rng_stream(seed, 1, *stream, s))
        g = build_gilbert(devices.positions, r, window)
        try:
            per_sim.append(estimate_stretch(g, min_dist))
        except (InsufficientPairsError, ValueError):
            n_skipped += 1
    if not per_sim:
        raise ValueError(f"all {sims} simulations were skipped")
    mus = np.array([e.mu_hat for e in per_sim])
    se = float(mus.std(ddof=1) / math.sqrt(len(mus))) if len(mus) > 1 else float("nan")
    return StretchResult(float(mus.mean()), se, tuple(per_sim), n_skipped)


def pbm_threshold(r_gamma: float) -> float:
    """Dense-street benchmark: critical intensity ratio 4.51 / (pi * r_gamma^2).

    Valid as an approximation when streets are dense relative to the
    connection radius (large r_gamma).
    """
    if not (math.isfinite(r_gamma) and r_gamma > 0.0):
        raise ValueError(f"r_gamma must be finite and > 0, got {r_gamma}")
    return 4.51 / (math.pi * r_gamma * r_gamma)


def bernoulli_threshold(gamma: float, r: float, b_c: float = 0.5) -> float:
    """Smallest positive root of (lam/gamma) * exp(-r*lam) = -log(b_c).

    The left side is bounded by 1/(e*r*gamma), so for b_c = 0.5 no root
    exists once r*gamma exceeds 1/(e*log 2) ~ 0.5307; a no-root condition
    raises ValueError.  Note the literal equation places the root near
    gamma*log(2) for small r*gamma, far below the simulated thresholds it
    is sometimes quoted against; it is implemented exactly as stated.
    """
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise ValueError(f"gamma must be finite and > 0, got {gamma}")
    if not (math.isfinite(r) and r > 0.0):
        raise ValueError(f"r must be finite and > 0, got {r}")
    if not 0.0 < b_c < 1.0:
        raise ValueError(f"b_c must lie in (0, 1), got {b_c}")
    target = -math.log(b_c)

    def f(lam: float) -> float:
        return (lam / gamma) * math.exp(-r * lam) - target

    hi = min(1.0 / r, 1e6 / gamma)  # left side increases up to lam = 1/r
    if f(hi) < 0.0:
        raise ValueError(
            f"no root: left side peaks at {1.0 / (math.e * r * gamma):.6g} "
            f"below -log(b_c) = {target:.6g}"
        )
    return float(brentq(f, 0.0, hi, rtol=1e-10, maxiter=200))


def write_theta_samples_csv(samples: Sequence[ThetaSample], path) -> None:
    """Persist samples as CSV rows ``k,i,N,nu1,censored``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "i", "N", "nu1", "censored"])
        for s in samples:
            w.writerow(
                [s.tessellation, s.placement, s.n_devices, repr(s.nu1), int(s.censored)]
            )


def read_theta_samples_csv(path) -> list[ThetaSample]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                ThetaSample(
                    int(row["k"]),
                    int(row["i"]),
                    int(row["N"]),
                    float(row["nu1"]),
                    bool(int(row["censored"])),
                )
            )
    return out


def write_crossing_points_csv(points: Sequence[CrossingCurvePoint], path) -> None:
    """Persist a crossing curve as CSV rows ``lambda,p_hat,runs``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "p_hat", "runs"])
        for p in points:
            w.writerow([repr(p.intensity), repr(p.p_hat), p.runs])


def read_crossing_points_csv(path) -> list[CrossingCurvePoint]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                CrossingCurvePoint(
                    float(row["lambda"]), float(row["p_hat"]), int(row["runs"])
                )
            )
    return out


def write_stretch_samples_csv(samples: Sequence[StretchSample], path) -> None:
    """Persist per-pair samples as CSV rows ``hops,euclid``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hops", "euclid"])
        for s in samples:
            w.writerow([s.hops, repr(s.euclid)])


def read_stretch_samples_csv(path) -> list[StretchSample]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(StretchSample(int(row["hops"]), float(row["euclid"])))
    return out
