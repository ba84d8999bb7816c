"""Declarative experiment runner behind the command line interface.

An experiment is a YAML mapping validated into :class:`ExperimentConfig`.
Running one writes, into the output directory: result CSVs, a
``manifest.json`` recording the resolved config and package version, and
SVG plots derived purely from the CSVs.  Reruns with the same config and
seed produce byte-identical CSVs; partial outputs are resumed rather than
recomputed.  Simulation work parallelizes over index-keyed RNG streams, so
results do not depend on worker count or scheduling.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .estimators import (
    CrossingCurvePoint,
    crossing_indicator,
    fit_logistic,
    lambda_c_from_fit,
    pbm_threshold,
    read_crossing_points_csv,
    read_theta_samples_csv,
    theta_curve,
    theta_standard_error,
    write_crossing_points_csv,
    write_theta_samples_csv,
)

EXPERIMENTS = ("threshold", "crossing-curves", "theta", "stretch", "table1")
KINDS = ("PVT", "PDT")

# Window-side defaults (km) by dimensionless radius, smaller for the
# low-r_gamma rows where near-threshold device counts explode.
def default_window_side(experiment: str, r_gamma: Optional[float]) -> float:
    if experiment == "stretch":
        return 5.0
    if r_gamma is not None:
        if r_gamma <= 0.5:
            return 10.0
        if r_gamma <= 1.5:
            return 15.0
    return 30.0


TABLE1_ROWS = (0.3, 0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5, 8.5, 9.5)


class ConfigError(ValueError):
    """Invalid experiment config; names the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field_name = field_name


_KNOWN_KEYS = {
    "experiment", "kind", "gamma", "r", "r_gamma", "lambda_grid",
    "lambda_over_gamma_grid", "window_side", "windows", "runs", "n", "M",
    "sims", "min_dist", "seed", "out", "workers", "max_devices", "rows",
    "fit_p",
}


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(field_name, message)


def _as_float_list(value, field_name: str) -> list[float]:
    _require(isinstance(value, (list, tuple)) and len(value) > 0,
             field_name, "must be a nonempty list of numbers")
    out = []
    for v in value:
        _require(isinstance(v, (int, float)) and math.isfinite(v) and v > 0,
                 field_name, f"entries must be finite positive numbers, got {v!r}")
        out.append(float(v))
    return out


@dataclass
class ExperimentConfig:
    """Validated, fully resolved experiment description.

    ``r`` is always set after resolution (derived from ``r_gamma`` when the
    dimensionless form was given); ``lambda_grid`` is in devices per km.
    """

    experiment: str
    kind: str = "PVT"
    gamma: float = 20.0
    r: Optional[float] = None
    r_gamma: Optional[float] = None
    lambda_grid: list[float] = field(default_factory=list)
    window_side: float = 0.0
    windows: list[float] = field(default_factory=list)
    runs: int = 50
    n: int = 10
    M: int = 30
    sims: int = 100
    min_dist: float = 4.0
    seed: int = 0
    out: Path = Path("runs")
    workers: int = 1
    max_devices: Optional[int] = None
    rows: list[float] = field(default_factory=lambda: list(TABLE1_ROWS))
    fit_p: float = 0.6

    @staticmethod
    def from_mapping(raw: dict) -> "ExperimentConfig":
        _require(isinstance(raw, dict), "config", "must be a mapping")
        for key in raw:
            _require(key in _KNOWN_KEYS, key, "unknown config key")
        experiment = raw.get("experiment")
        _require(experiment in EXPERIMENTS, "experiment",
                 f"must be one of {EXPERIMENTS}, got {experiment!r}")
        kind = raw.get("kind", "PVT")
        _require(kind in KINDS, "kind", f"must be one of {KINDS}, got {kind!r}")
        gamma = raw.get("gamma", 20.0)
        _require(isinstance(gamma, (int, float)) and math.isfinite(gamma) and gamma > 0,
                 "gamma", f"must be a finite positive number, got {gamma!r}")
        gamma = float(gamma)

        r, r_gamma = raw.get("r"), raw.get("r_gamma")
        _require(not (r is not None and r_gamma is not None), "r",
                 "give exactly one of 'r' and 'r_gamma', not both")
        if r is not None:
            _require(isinstance(r, (int, float)) and math.isfinite(r) and r > 0,
                     "r", f"must be a finite positive number, got {r!r}")
            r = float(r)
            r_gamma = r * gamma
        elif r_gamma is not None:
            _require(isinstance(r_gamma, (int, float))
                     and math.isfinite(r_gamma) and r_gamma > 0,
                     "r_gamma", f"must be a finite positive number, got {r_gamma!r}")
            r_gamma = float(r_gamma)
            r = r_gamma / gamma
        elif experiment == "stretch":
            r_gamma = 7.5
            r = r_gamma / gamma
        elif experiment != "table1":
            raise ConfigError("r", "one of 'r' or 'r_gamma' is required")

        grid_abs, grid_rel = raw.get("lambda_grid"), raw.get("lambda_over_gamma_grid")
        _require(not (grid_abs is not None and grid_rel is not None), "lambda_grid",
                 "give at most one of 'lambda_grid' and 'lambda_over_gamma_grid'")
        if grid_abs is not None:
            lambda_grid = _as_float_list(grid_abs, "lambda_grid")
        elif grid_rel is not None:
            lambda_grid = [v * gamma
                           for v in _as_float_list(grid_rel, "lambda_over_gamma_grid")]
        else:
            lambda_grid = _default_lambda_grid(experiment, gamma, r_gamma)

        window_side = raw.get("window_side")
        if window_side is None:
            # 0.0 marks "per-row default" for table1, which picks its own
            # window for each dimensionless radius
            window_side = 0.0 if experiment == "table1" \
                else default_window_side(experiment, r_gamma)
        else:
            _require(isinstance(window_side, (int, float))
                     and math.isfinite(window_side) and window_side > 0,
                     "window_side",
                     f"must be a finite positive number, got {window_side!r}")

        windows = raw.get("windows")
        if windows is None:
            windows = [10.0, 20.0, 30.0] if experiment == "crossing-curves" else []
        elif experiment != "crossing-curves":
            raise ConfigError("windows", "only valid for the crossing-curves experiment")
        else:
            windows = _as_float_list(windows, "windows")

        ints = {}
        for name, default, minimum in (
            ("runs", 50, 1), ("n", 10, 1), ("M", 30, 1), ("sims", 100, 1),
            ("seed", 0, None), ("workers", 1, 1),
        ):
            v = raw.get(name, default)
            _require(isinstance(v, int) and not isinstance(v, bool), name,
                     f"must be an integer, got {v!r}")
            if minimum is not None:
                _require(v >= minimum, name, f"must be >= {minimum}, got {v}")
            ints[name] = v

        max_devices = raw.get("max_devices")
        if max_devices is not None:
            _require(isinstance(max_devices, int) and max_devices >= 1,
                     "max_devices", f"must be a positive integer, got {max_devices!r}")

        min_dist = raw.get("min_dist", 4.0)
        _require(isinstance(min_dist, (int, float))
                 and math.isfinite(min_dist) and min_dist >= 0,
                 "min_dist", f"must be a finite nonnegative number, got {min_dist!r}")

        fit_p = raw.get("fit_p", 0.6)
        _require(isinstance(fit_p, (int, float)) and 0.0 < fit_p < 1.0,
                 "fit_p", f"must lie strictly between 0 and 1, got {fit_p!r}")

        rows = raw.get("rows")
        rows = list(TABLE1_ROWS) if rows is None else _as_float_list(rows, "rows")

        out = Path(raw.get("out", Path("runs") / experiment))
        return ExperimentConfig(
            experiment=experiment, kind=kind, gamma=gamma, r=r, r_gamma=r_gamma,
            lambda_grid=lambda_grid, window_side=float(window_side),
            windows=windows, runs=ints["runs"], n=ints["n"], M=ints["M"],
            sims=ints["sims"], min_dist=float(min_dist), seed=ints["seed"],
            out=out, workers=ints["workers"], max_devices=max_devices,
            rows=rows, fit_p=float(fit_p),
        )


def _default_lambda_grid(experiment, gamma, r_gamma) -> list[float]:
    if experiment == "table1":
        return []  # chosen per row
    if experiment == "stretch":
        return [1.5]
    if r_gamma is None:
        return []
    center = gamma * pbm_threshold(r_gamma)
    return [center * f for f in np.linspace(0.6, 1.6, 9)]


def load_config(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config", f"{path} must contain a YAML mapping")
    return raw


# ---------------------------------------------------------------------------
# simulation tasks (module level so worker processes can unpickle them)

def _window(kind: str, gamma: float, side: float):
    from .tessellation import make_window

    return make_window(kind, gamma, side)


def _crossing_task(args) -> bool:
    kind, gamma, r, lam, side, seed, stream = args
    return crossing_indicator(kind, gamma, r, lam, _window(kind, gamma, side),
                              seed, stream)


def _theta_task(args):
    from .estimators import run_theta_experiment

    kind, gamma, r, side, k, M, seed, max_devices = args
    samples = run_theta_experiment(kind, gamma, r, _window(kind, gamma, side),
                                   1, M, seed, max_devices, stream=(k,))
    return [(k, s.placement, s.n_devices, s.nu1, s.censored) for s in samples]


def _stretch_task(args):
    from .cox import sample_on_streets
    from .estimators import InsufficientPairsError, estimate_stretch
    from .geometry import rng_stream
    from .graph import build_gilbert
    from .tessellation import sample_street_system

    kind, gamma, r, lam, side, min_dist, seed, stream = args
    window = _window(kind, gamma, side)
    tess = sample_street_system(kind, gamma, window, rng_stream(seed, 0, *stream))
    devices = sample_on_streets(tess, lam, rng_stream(seed, 1, *stream))
    g = build_gilbert(devices.positions, r, window)
    try:
        e = estimate_stretch(g, min_dist)
    except (InsufficientPairsError, ValueError):
        return None
    return (e.mu_hat, e.n_pairs, e.se, e.n_unreachable, e.slope)


def _pmap(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks, chunksize=8))
    return [fn(t) for t in tasks]


# ---------------------------------------------------------------------------
# per-experiment drivers

def _crossing_points_resumed(
    cfg: ExperimentConfig, kind: str, r: float, side: float, grid,
    seed: int, stream_prefix: tuple, path: Path,
) -> list[CrossingCurvePoint]:
    """Crossing curve over ``grid``, reusing any persisted matching rows."""
    have: dict[str, CrossingCurvePoint] = {}
    if path.exists():
        for p in read_crossing_points_csv(path):
            if p.runs == cfg.runs:
                have[repr(p.intensity)] = p
    points = []
    todo = []
    for li, lam in enumerate(grid):
        lam = float(lam)
        if repr(lam) in have:
            points.append((li, have[repr(lam)]))
            continue
        for j in range(cfg.runs):
            todo.append((li, lam, (kind, cfg.gamma, r, lam, side, seed,
                                   (*stream_prefix, li, j))))
    results = _pmap(_crossing_task, [t[2] for t in todo], cfg.workers)
    hits: dict[int, int] = {}
    lam_of: dict[int, float] = {}
    for (li, lam, _), hit in zip(todo, results):
        hits[li] = hits.get(li, 0) + bool(hit)
        lam_of[li] = lam
    for li, nhit in hits.items():
        points.append((li, CrossingCurvePoint(lam_of[li], nhit / cfg.runs, cfg.runs)))
    points.sort(key=lambda t: t[0])
    out = [p for _, p in points]
    write_crossing_points_csv(out, path)
    return out


def _fit_row(points, fit_p):
    fit = fit_logistic(points)
    lam_c = lambda_c_from_fit(fit, fit_p)
    return fit, lam_c


def _run_threshold(cfg: ExperimentConfig) -> list[str]:
    path = cfg.out / "crossing_curve.csv"
    points = _crossing_points_resumed(cfg, cfg.kind, cfg.r, cfg.window_side,
                                      cfg.lambda_grid, cfg.seed, (), path)
    fit, lam_c = _fit_row(points, cfg.fit_p)
    with open(cfg.out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda_c", "lambda_c_over_gamma", "a", "b", "se_a", "se_b",
                    "n_points"])
        w.writerow([repr(lam_c), repr(lam_c / cfg.gamma), repr(fit.a), repr(fit.b),
                    repr(fit.se_a), repr(fit.se_b), fit.n_points])
    _plot_threshold(cfg.out)
    return ["crossing_curve.csv", "results.csv", "threshold.svg"]


def _curve_filename(side: float) -> str:
    return f"crossing_curve_L{side:g}.csv"


def _run_crossing_curves(cfg: ExperimentConfig) -> list[str]:
    files = []
    fits = []
    for wi, side in enumerate(cfg.windows):
        path = cfg.out / _curve_filename(side)
        points = _crossing_points_resumed(cfg, cfg.kind, cfg.r, side,
                                          cfg.lambda_grid, cfg.seed, (wi,), path)
        fit, lam_c = _fit_row(points, cfg.fit_p)
        fits.append((side, fit, lam_c))
        files.append(path.name)
    with open(cfg.out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window_side", "a", "b", "se_a", "se_b", "lambda_c"])
        for side, fit, lam_c in fits:
            w.writerow([repr(side), repr(fit.a), repr(fit.b), repr(fit.se_a),
                        repr(fit.se_b), repr(lam_c)])
    with open(cfg.out / "intersections.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["side_a", "side_b", "lambda_star", "p_star"])
        for i in range(len(fits)):
            for j in range(i + 1, len(fits)):
                sa, fa, _ = fits[i]
                sb, fb, _ = fits[j]
                if fa.a == fb.a:
                    continue
                lam_star = (fb.b - fa.b) / (fa.a - fb.a)
                p_star = 1.0 / (1.0 + math.exp(-(fa.a * lam_star + fa.b)))
                w.writerow([repr(sa), repr(sb), repr(lam_star), repr(p_star)])
    _plot_crossing_curves(cfg.out)
    return files + ["results.csv", "intersections.csv", "crossing_curves.svg"]


def _run_theta(cfg: ExperimentConfig) -> list[str]:
    from .estimators import ThetaSample

    samples_path = cfg.out / "theta_samples.csv"
    if samples_path.exists():
        samples = read_theta_samples_csv(samples_path)
    else:
        tasks = [(cfg.kind, cfg.gamma, cfg.r, cfg.window_side, k, cfg.M,
                  cfg.seed, cfg.max_devices) for k in range(cfg.n)]
        rows = _pmap(_theta_task, tasks, cfg.workers)
        samples = [ThetaSample(*r) for batch in rows for r in batch]
        write_theta_samples_csv(samples, samples_path)
    grid = cfg.lambda_grid
    th = theta_curve(samples, grid)
    se = [theta_standard_error(samples, lam) for lam in grid]
    with open(cfg.out / "theta_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "theta_hat", "se"])
        for lam, t, s in zip(grid, th, se):
            w.writerow([repr(float(lam)), repr(float(t)), repr(float(s))])
    _plot_theta(cfg.out)
    return ["theta_samples.csv", "theta_curve.csv", "theta.svg"]


def _run_stretch(cfg: ExperimentConfig) -> list[str]:
    sims_path = cfg.out / "stretch_sims.csv"
    have: dict[tuple[str, int], list] = {}
    if sims_path.exists():
        with open(sims_path, newline="") as fh:
            for row in csv.DictReader(fh):
                have[(row["lambda"], int(row["sim"]))] = row
    rows_out = []
    for li, lam in enumerate(cfg.lambda_grid):
        lam = float(lam)
        todo = []
        for s in range(cfg.sims):
            key = (repr(lam), s)
            if key in have:
                continue
            todo.append((s, (cfg.kind, cfg.gamma, cfg.r, lam, cfg.window_side,
                             cfg.min_dist, cfg.seed, (li, s))))
        results = _pmap(_stretch_task, [t[1] for t in todo], cfg.workers)
        for (s, _), res in zip(todo, results):
            if res is None:
                have[(repr(lam), s)] = {
                    "lambda": repr(lam), "sim": s, "mu_hat": "", "n_pairs": 0,
                    "se": "", "n_unreachable": 0, "slope": "",
                }
            else:
                mu, n_pairs, se, n_unr, slope = res
                have[(repr(lam), s)] = {
                    "lambda": repr(lam), "sim": s, "mu_hat": repr(mu),
                    "n_pairs": n_pairs, "se": repr(se),
                    "n_unreachable": n_unr, "slope": repr(slope),
                }
        for s in range(cfg.sims):
            rows_out.append(have[(repr(lam), s)])
    with open(sims_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["lambda", "sim", "mu_hat", "n_pairs",
                                           "se", "n_unreachable", "slope"])
        w.writeheader()
        for row in rows_out:
            w.writerow(row)
    with open(cfg.out / "stretch_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "mu_hat", "se", "sims_used", "sims_skipped"])
        for lam in cfg.lambda_grid:
            mus = [float(have[(repr(float(lam)), s)]["mu_hat"])
                   for s in range(cfg.sims)
                   if have[(repr(float(lam)), s)]["mu_hat"] != ""]
            used = len(mus)
            skipped = cfg.sims - used
            mu = float(np.mean(mus)) if used else float("nan")
            se = (float(np.std(mus, ddof=1) / math.sqrt(used))
                  if used > 1 else float("nan"))
            w.writerow([repr(float(lam)), repr(mu), repr(se), used, skipped])
    _plot_stretch(cfg.out)
    return ["stretch_sims.csv", "stretch_curve.csv", "stretch.svg"]


def _run_table1(cfg: ExperimentConfig) -> list[str]:
    files = []
    table = []
    for ri, rg in enumerate(cfg.rows):
        side = cfg.window_side or default_window_side("threshold", rg)
        r = rg / cfg.gamma
        grid = cfg.lambda_grid or [cfg.gamma * pbm_threshold(rg) * f
                                   for f in np.linspace(0.6, 1.6, 9)]
        row = {"r_gamma": rg, "pbm": pbm_threshold(rg)}
        for ki, kind in enumerate(KINDS):
            path = cfg.out / f"crossing_rg{rg:g}_{kind}.csv"
            points = _crossing_points_resumed(cfg, kind, r, side, grid,
                                              cfg.seed, (ri, ki), path)
            _, lam_c = _fit_row(points, cfg.fit_p)
            row[kind.lower()] = lam_c / cfg.gamma
            files.append(path.name)
        table.append(row)
    with open(cfg.out / "table1.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_gamma", "pvt", "pdt", "pbm"])
        for row in table:
            w.writerow([repr(row["r_gamma"]), repr(row["pvt"]),
                        repr(row["pdt"]), repr(row["pbm"])])
    return files + ["table1.csv"]


def manifest_dict(cfg: ExperimentConfig, outputs: list[str]) -> dict:
    return {
        "experiment": cfg.experiment,
        "version": __version__,
        "config": {
            "kind": cfg.kind, "gamma": cfg.gamma, "r": cfg.r,
            "r_gamma": cfg.r_gamma,
            "lambda_grid": [float(v) for v in cfg.lambda_grid],
            "window_side": cfg.window_side,
            "windows": [float(v) for v in cfg.windows],
            "runs": cfg.runs, "n": cfg.n, "M": cfg.M, "sims": cfg.sims,
            "min_dist": cfg.min_dist, "seed": cfg.seed,
            "max_devices": cfg.max_devices,
            "rows": [float(v) for v in cfg.rows], "fit_p": cfg.fit_p,
        },
        "outputs": sorted(outputs),
    }


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run one experiment; returns the output directory."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    driver = {
        "threshold": _run_threshold,
        "crossing-curves": _run_crossing_curves,
        "theta": _run_theta,
        "stretch": _run_stretch,
        "table1": _run_table1,
    }[cfg.experiment]
    outputs = driver(cfg)
    manifest = manifest_dict(cfg, outputs + ["manifest.json"])
    with open(cfg.out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return cfg.out


# ---------------------------------------------------------------------------
# plotting (reads CSVs only; never simulates)

def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    # fixed salt keeps SVG element ids stable across reruns
    matplotlib.rcParams["svg.hashsalt"] = "streetperc"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def _logistic(lam, a, b):
    return 1.0 / (1.0 + np.exp(-(a * np.asarray(lam) + b)))


def _plot_threshold(out: Path) -> None:
    plt = _mpl()

    points = read_crossing_points_csv(out / "crossing_curve.csv")
    with open(out / "results.csv", newline="") as fh:
        res = next(csv.DictReader(fh))
    lams = [p.intensity for p in points]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(lams, [p.p_hat for p in points], "o", label="estimates")
    grid = np.linspace(min(lams), max(lams), 200)
    ax.plot(grid, _logistic(grid, float(res["a"]), float(res["b"])), "-",
            label="logistic fit")
    ax.axvline(float(res["lambda_c"]), color="gray", ls="--", lw=0.8)
    ax.set_xlabel("device intensity (1/km)")
    ax.set_ylabel("crossing probability")
    ax.legend()
    fig.tight_layout()
    _save(fig, out / "threshold.svg")
    plt.close(fig)


def _plot_crossing_curves(out: Path) -> None:
    plt = _mpl()

    with open(out / "results.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for row in rows:
        side = float(row["window_side"])
        points = read_crossing_points_csv(out / _curve_filename(side))
        lams = [p.intensity for p in points]
        line, = ax.plot(lams, [p.p_hat for p in points], "o", ms=3)
        grid = np.linspace(min(lams), max(lams), 200)
        ax.plot(grid, _logistic(grid, float(row["a"]), float(row["b"])), "-",
                color=line.get_color(), label=f"L = {side:g} km")
    ax.set_xlabel("device intensity (1/km)")
    ax.set_ylabel("crossing probability")
    ax.legend()
    fig.tight_layout()
    _save(fig, out / "crossing_curves.svg")
    plt.close(fig)


def _plot_theta(out: Path) -> None:
    plt = _mpl()

    lams, th, se = [], [], []
    with open(out / "theta_curve.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            lams.append(float(row["lambda"]))
            th.append(float(row["theta_hat"]))
            se.append(float(row["se"]))
    lams, th, se = map(np.asarray, (lams, th, se))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(lams, th, "-o", ms=3)
    ok = np.isfinite(se)
    ax.fill_between(lams[ok], (th - se)[ok], (th + se)[ok], alpha=0.25, lw=0)
    ax.set_xlabel("device intensity (1/km)")
    ax.set_ylabel("percolation probability")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    _save(fig, out / "theta.svg")
    plt.close(fig)


def _plot_stretch(out: Path) -> None:
    plt = _mpl()

    lams, mu, se = [], [], []
    with open(out / "stretch_curve.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            lams.append(float(row["lambda"]))
            mu.append(float(row["mu_hat"]))
            se.append(float(row["se"]) if row["se"] not in ("", "nan") else 0.0)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(lams, mu, yerr=se, fmt="-o", ms=3, capsize=3)
    ax.set_xlabel("device intensity (1/km)")
    ax.set_ylabel("stretch (hops/km)")
    fig.tight_layout()
    _save(fig, out / "stretch.svg")
    plt.close(fig)


def replot(out: Path) -> None:
    """Regenerate the SVG plots of a finished run from its CSVs alone."""
    manifest_path = Path(out) / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json in {out}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    experiment = manifest.get("experiment")
    plotter = {
        "threshold": _plot_threshold,
        "crossing-curves": _plot_crossing_curves,
        "theta": _plot_theta,
        "stretch": _plot_stretch,
        "table1": None,
    }.get(experiment, "missing")
    if plotter == "missing":
        raise ValueError(f"manifest names unknown experiment {experiment!r}")
    if plotter is not None:
        plotter(Path(out))
