"""Experiment runner: declarative configs, seed fan-out, fits, CSV/JSON output.

Named experiments reproduce the structural and dynamical predictions at desk
scale; every summary JSON pairs each fitted constant with its theoretical
prediction (when the needed constants are supplied) so downstream checks are
mechanical.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path as FsPath

import numpy as np

from . import cpsim, oracle, percolate, theory
from .graphs import (DilutedGraph, dilute_bonds, dilute_sites, gen_erdos_renyi,
                     gen_lattice2d, gen_path)

SUMMARY_SCHEMA_VERSION = 1


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: tuple

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "window": list(self.window)}


def fit_loglinear(x, y, logx: bool, logy: bool = True) -> FitResult:
    """Least squares of (optionally log) y on (optionally log) x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 3:
        raise HarnessError("need at least 3 points to fit")
    fx = np.log(x) if logx else x
    fy = np.log(y) if logy else y
    slope, intercept = np.polyfit(fx, fy, 1)
    resid = fy - (slope * fx + intercept)
    ss_tot = np.sum((fy - fy.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid ** 2) / ss_tot
    return FitResult(float(slope), float(intercept), float(r2),
                     (float(x.min()), float(x.max())))


def fit_power_law(points, window) -> FitResult:
    """log-log least squares of u on t restricted to t in [window[0], window[1]]."""
    lo, hi = window
    pts = [(t, u) for t, u in points if u > 0 and lo <= t <= hi]
    if len(pts) < 3:
        raise HarnessError("fewer than 3 positive points in the fit window")
    t, u = zip(*pts)
    fit = fit_loglinear(t, u, logx=True)
    return FitResult(fit.slope, fit.intercept, fit.r_squared, (float(lo), float(hi)))


def fit_exponential(points, window) -> FitResult:
    """Least squares of log u on t (exponential-decay model)."""
    lo, hi = window
    pts = [(t, u) for t, u in points if u > 0 and lo <= t <= hi]
    if len(pts) < 3:
        raise HarnessError("fewer than 3 positive points in the fit window")
    t, u = zip(*pts)
    fit = fit_loglinear(t, u, logx=False)
    return FitResult(fit.slope, fit.intercept, fit.r_squared, (float(lo), float(hi)))


def estimate_gamma2(sizes, times, censored=None) -> FitResult:
    """Slope of log(survival time) on N; the estimated 1D exponential rate."""
    sizes = list(sizes)
    times = list(times)
    if censored is not None:
        bad = [n for n, c in zip(sizes, censored) if c]
        if bad:
            raise HarnessError(f"censored survival times at sizes {bad}")
    if len(sizes) < 3:
        raise HarnessError("need at least 3 sizes")
    return fit_loglinear(sizes, times, logx=False)


def geometric_schedule(t0: float, ratio: float, count: int) -> np.ndarray:
    if t0 <= 0 or ratio <= 1 or count < 1:
        raise HarnessError("schedule needs t0 > 0, ratio > 1, count >= 1")
    return t0 * ratio ** np.arange(count)


_CONFIG_KEYS = {"experiment", "graph", "dilution", "lambda", "replicates",
                "seed", "t_max", "schedule", "output", "constants"}
_GRAPH_KEYS = {"family", "sizes", "mu"}
_DILUTION_KEYS = {"mode", "p"}
_SCHEDULE_KEYS = {"t0", "ratio", "count"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative sweep description; round-trips losslessly through JSON."""

    experiment: str
    graph: dict
    dilution: dict
    lam: tuple
    replicates: int
    seed: int
    t_max: float
    schedule: dict
    output: str = ""
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.graph.get("sizes"):
            raise HarnessError("graph.sizes must be nonempty")
        if not self.lam:
            raise HarnessError("lambda list must be nonempty")
        if not self.dilution.get("p"):
            raise HarnessError("dilution.p must be nonempty")
        if self.replicates < 1:
            raise HarnessError("replicates must be positive")
        geometric_schedule(**self.schedule)  # validates

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise HarnessError(f"unknown config keys: {sorted(unknown)}")
        for key, allowed in (("graph", _GRAPH_KEYS), ("dilution", _DILUTION_KEYS),
                             ("schedule", _SCHEDULE_KEYS)):
            extra = set(d.get(key, {})) - allowed
            if extra:
                raise HarnessError(f"unknown {key} keys: {sorted(extra)}")
        return cls(experiment=d["experiment"], graph=dict(d["graph"]),
                   dilution=dict(d["dilution"]), lam=tuple(d["lambda"]),
                   replicates=int(d["replicates"]), seed=int(d["seed"]),
                   t_max=float(d["t_max"]), schedule=dict(d["schedule"]),
                   output=d.get("output", ""), constants=dict(d.get("constants", {})))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = list(d.pop("lam"))
        return d

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _make_graph(family: str, size: int, mu: float | None, seed: int):
    if family == "path1d":
        return gen_path(size)
    if family == "lattice2d":
        # size is the vertex count N; the box side is N^(1/2)
        return gen_lattice2d(int(round(math.sqrt(size))))
    if family == "erdos_renyi":
        if mu is None:
            raise HarnessError("erdos_renyi needs graph.mu")
        return gen_erdos_renyi(size, mu, seed)
    raise HarnessError(f"unknown graph family {family!r}")


def _dilute(g, mode: str, p: float, seed: int) -> DilutedGraph:
    if mode == "bond":
        return dilute_bonds(g, p, seed)
    if mode == "site":
        return dilute_sites(g, p, seed)
    raise HarnessError(f"unknown dilution mode {mode!r}")


def n_workers() -> int:
    return max(1, int(os.environ.get("CPDILUTE_WORKERS", "1")))


# --- density sweeps (Griffiths experiments) -----------------------------------

def _density_replicate(args):
    dg, lam, t_max, schedule, seed = args
    traj = cpsim.run_contact(dg, lam, t_max, schedule, seed=seed)
    # align on schedule times (the trajectory may append the extinction sample)
    sched_counts = dict(zip(traj.times.tolist(), traj.counts.tolist()))
    counts = np.array([sched_counts.get(float(t), 0) for t in schedule])
    return counts, traj


def _mean_density_sweep(dg: DilutedGraph, lam, t_max, schedule, base_seed, reps,
                        out_dir=None, tag=""):
    """Mean occupied fraction at each schedule time, averaged over replicates.

    Replicate i uses seed base_seed + i; replicates run on the worker pool and
    merge by summation, so ordering and parallelism degree never matter.
    """
    n = dg.base.n
    tasks = [(dg, lam, t_max, schedule, base_seed + i) for i in range(reps)]
    workers = n_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_density_replicate, tasks))
    else:
        results = [_density_replicate(t) for t in tasks]
    acc = np.zeros(len(schedule))
    for i, (counts, traj) in enumerate(results):
        acc += counts / n
        if out_dir is not None:
            with open(FsPath(out_dir) / f"replicate_{tag}{i:04d}.csv", "w") as f:
                traj.to_csv(f)
    return acc / reps


def _decade_fits(schedule, u):
    """Power-law fits over the top two disjoint decades with positive density."""
    pos = [(t, v) for t, v in zip(schedule, u) if v > 0]
    if not pos:
        return []
    t_hi = pos[-1][0]
    fits = []
    for k in range(2):
        hi = t_hi / 10 ** k
        lo = hi / 10
        try:
            fits.append(fit_power_law(pos, (lo, hi)))
        except HarnessError:
            break
    return fits


def _griffiths_experiment(cfg: ExperimentConfig, out_dir, family: str):
    schedule = geometric_schedule(**cfg.schedule)
    results = []
    for size in cfg.graph["sizes"]:
        for p in cfg.dilution["p"]:
            for lam in cfg.lam:
                g = _make_graph(family, size, cfg.graph.get("mu"), cfg.seed)
                dg = _dilute(g, cfg.dilution["mode"], p, cfg.seed)
                tag = f"N{size}_p{p}_l{lam}_"
                u = _mean_density_sweep(dg, lam, cfg.t_max, schedule, cfg.seed,
                                        cfg.replicates, out_dir, tag)
                fits = _decade_fits(schedule, u)
                pred = _prediction_for(cfg, family, p)
                results.append({"size": size, "p": p, "lambda": lam,
                                "density": u.tolist(),
                                "fits": [f.to_dict() for f in fits],
                                "prediction": pred,
                                "ratio": _ratio(fits, pred)})
    _write_aggregate(out_dir, schedule, results)
    return {"experiment": cfg.experiment, "schedule": schedule.tolist(),
            "results": results}


def _prediction_for(cfg, family, p):
    consts = cfg.constants
    try:
        if family == "path1d":
            pred = theory.scaling_predictions(
                "griffiths_1d", {"gamma2": consts.get("gamma2"), "p": p})
        elif family == "erdos_renyi":
            nu = cfg.graph.get("mu", 0) * p
            pred = theory.scaling_predictions(
                "griffiths_er", {"gamma2": consts.get("gamma2"), "nu": nu})
        else:
            pred = theory.scaling_predictions(
                "griffiths_2d", {"gamma2": consts.get("gamma2"),
                                 "eta2": consts.get("eta2")})
        return json.loads(pred.to_json())
    except theory.TheoryError as err:
        return {"error": str(err)}


def _ratio(fits, pred):
    if not fits or "constants" not in (pred or {}):
        return None
    expo = pred["constants"].get("exponent")
    if not expo:
        return None
    return abs(fits[0].slope) / expo


def _write_aggregate(out_dir, schedule, results):
    if out_dir is None:
        return
    with open(FsPath(out_dir) / "aggregate.csv", "w") as f:
        f.write("size,p,lambda,time,mean_density\n")
        for row in results:
            for t, u in zip(schedule, row["density"]):
                f.write(f"{row['size']},{row['p']},{row['lambda']},{t!r},{u!r}\n")


# --- survival sweeps ----------------------------------------------------------

def _survival_experiment(cfg: ExperimentConfig, out_dir, family: str):
    rows = []
    medians = []
    sizes = list(cfg.graph["sizes"])
    p = cfg.dilution["p"][0]
    lam = cfg.lam[0]
    for size in sizes:
        g = _make_graph(family, size, cfg.graph.get("mu"), cfg.seed)
        dg = _dilute(g, cfg.dilution["mode"], p, cfg.seed)
        times, censored = cpsim.survival_times(dg, lam, cfg.replicates,
                                               cfg.t_max, cfg.seed)
        med = float(np.median(times))
        medians.append(med)
        for i, (t, c) in enumerate(zip(times, censored)):
            rows.append((size, i, t, int(c)))
    if out_dir is not None:
        with open(FsPath(out_dir) / "extinction_times.csv", "w") as f:
            f.write("size,replicate,extinction_time,censored\n")
            for size, i, t, c in rows:
                f.write(f"{size},{i},{t!r},{c}\n")
    fit = fit_loglinear(sizes, medians, logx=False)
    consts = cfg.constants
    key = "eta_er" if family == "erdos_renyi" else "eta2"
    regime = "supercrit_er" if family == "erdos_renyi" else "supercrit_2d"
    try:
        pred = json.loads(theory.scaling_predictions(
            regime, {"gamma2": consts.get("gamma2"),
                     key: consts.get(key)}).to_json())
    except theory.TheoryError as err:
        pred = {"error": str(err)}
    return {"experiment": cfg.experiment, "sizes": sizes, "medians": medians,
            "fit": fit.to_dict(), "prediction": pred,
            "ratio": (fit.slope / pred["constants"]["rate"]
                      if "constants" in pred and pred["constants"].get("rate")
                      else None)}


# --- critical-line path scaling -----------------------------------------------

def _critical_line_experiment(cfg: ExperimentConfig, out_dir, family: str):
    sizes = list(cfg.graph["sizes"])
    p = cfg.dilution["p"][0]
    mean_lengths = []
    rows = []
    for size in sizes:
        lengths = []
        for i in range(cfg.replicates):
            seed = cfg.seed + i
            if family == "erdos_renyi":
                g = gen_erdos_renyi(size, cfg.graph.get("mu", 1.0), seed)
                dg = dilute_bonds(g, p, seed)
            else:
                L = int(round(math.sqrt(size)))
                dg = dilute_bonds(gen_lattice2d(L), p, seed)
            path = percolate.longest_path_dfs(dg, restarts=5, seed=seed)
            lengths.append(path.length)
            rows.append((size, i, path.length))
        mean_lengths.append(float(np.mean(lengths)))
    if out_dir is not None:
        with open(FsPath(out_dir) / "path_lengths.csv", "w") as f:
            f.write("size,replicate,path_length\n")
            for size, i, ln in rows:
                f.write(f"{size},{i},{ln}\n")
    fit = fit_loglinear(sizes, mean_lengths, logx=True)
    regime = "critical_er" if family == "erdos_renyi" else "critical_2d"
    pred = json.loads(theory.scaling_predictions(regime, {}).to_json())
    target = pred["constants"]["exponent"]
    return {"experiment": cfg.experiment, "sizes": sizes,
            "mean_lengths": mean_lengths, "fit": fit.to_dict(),
            "prediction": pred, "ratio": fit.slope / target}


# --- arrhenius and phase scan -------------------------------------------------

def _arrhenius_experiment(cfg: ExperimentConfig, out_dir):
    sizes = [s for s in cfg.graph["sizes"] if s <= oracle.MAX_CTMC_VERTICES]
    lam = cfg.lam[0]
    values = []
    for s in sizes:
        dg = dilute_bonds(gen_path(s), 1.0, cfg.seed)
        values.append(oracle.exact_mean_extinction(dg, lam))
    if out_dir is not None:
        with open(FsPath(out_dir) / "oracle_mean_extinction.csv", "w") as f:
            f.write("size,lambda,exact_value\n")
            for s, v in zip(sizes, values):
                f.write(f"{s},{lam},{v!r}\n")
    fit = fit_loglinear(sizes, values, logx=False)
    return {"experiment": cfg.experiment, "sizes": sizes, "values": values,
            "fit": fit.to_dict(), "fitted_rate_A": fit.slope,
            "monotone": bool(np.all(np.diff(values) > 0))}


def _phase_scan_experiment(cfg: ExperimentConfig, out_dir):
    size = cfg.graph["sizes"][0]
    mu = cfg.graph.get("mu", 3.0)
    schedule = geometric_schedule(**cfg.schedule)
    grid = []
    for p in cfg.dilution["p"]:
        for lam in cfg.lam:
            g = gen_erdos_renyi(size, mu, cfg.seed)
            dg = _dilute(g, cfg.dilution["mode"], p, cfg.seed)
            final = []
            for i in range(cfg.replicates):
                traj = cpsim.run_contact(dg, lam, cfg.t_max, schedule,
                                         seed=cfg.seed + i)
                final.append(traj.counts[-1] / dg.base.n if traj.censored else 0.0)
            grid.append((p, lam, float(np.mean(final))))
    if out_dir is not None:
        with open(FsPath(out_dir) / "phase_grid.csv", "w") as f:
            f.write("p,lambda,survival_proxy\n")
            for p, lam, u in grid:
                f.write(f"{p},{lam},{u!r}\n")
    return {"experiment": cfg.experiment, "mu": mu, "size": size,
            "grid": [list(g) for g in grid]}


EXPERIMENTS = ("griffiths-1d", "griffiths-er", "griffiths-2d", "supercrit-er",
               "supercrit-2d", "critical-line-er", "critical-line-2d",
               "arrhenius", "phase-scan")


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run a named experiment; writes per-replicate and aggregate CSVs plus
    a summary JSON and returns the summary dict."""
    if cfg.experiment not in EXPERIMENTS:
        raise HarnessError(f"unknown experiment {cfg.experiment!r}; "
                           f"one of {EXPERIMENTS}")
    out_dir = out_dir or (cfg.output or None)
    if out_dir:
        FsPath(out_dir).mkdir(parents=True, exist_ok=True)
    name = cfg.experiment
    if name == "griffiths-1d":
        summary = _griffiths_experiment(cfg, out_dir, "path1d")
    elif name == "griffiths-er":
        summary = _griffiths_experiment(cfg, out_dir, "erdos_renyi")
    elif name == "griffiths-2d":
        summary = _griffiths_experiment(cfg, out_dir, "lattice2d")
    elif name == "supercrit-er":
        summary = _survival_experiment(cfg, out_dir, "erdos_renyi")
    elif name == "supercrit-2d":
        summary = _survival_experiment(cfg, out_dir, "lattice2d")
    elif name == "critical-line-er":
        summary = _critical_line_experiment(cfg, out_dir, "erdos_renyi")
    elif name == "critical-line-2d":
        summary = _critical_line_experiment(cfg, out_dir, "lattice2d")
    elif name == "arrhenius":
        summary = _arrhenius_experiment(cfg, out_dir)
    else:
        summary = _phase_scan_experiment(cfg, out_dir)
    summary["schema_version"] = SUMMARY_SCHEMA_VERSION
    summary["config"] = cfg.to_dict()
    if out_dir:
        with open(FsPath(out_dir) / "summary.json", "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
    return summary


# --- oracle check suite -------------------------------------------------------

def oracle_check(reps: int = 20000, seed: int = 7,
                 lambda_injection: float = 1.0) -> list:
    """Oracle-vs-simulation and oracle-vs-structural checks.

    Returns a list of (name, passed, statistic) triples. ``lambda_injection``
    is a test-only hook that corrupts the simulated birth rate so sensitivity
    of the suite can itself be checked.
    """
    import scipy.stats

    out = []

    # single vertex: extinction ~ Exponential(1)
    dg1 = dilute_bonds(gen_path(1), 1.0, seed)
    times, _ = cpsim.survival_times(dg1, 1.0, reps, 1e9, seed)
    ks = scipy.stats.kstest(times, "expon")
    out.append(("single-vertex-exponential", ks.pvalue > 0.01, ks.pvalue))

    # K2 at lambda = 2: oracle 2.5, simulation within 3 SE
    k2 = dilute_bonds(gen_path(2), 1.0, seed)
    exact = oracle.exact_mean_extinction(k2, 2.0)
    out.append(("k2-oracle-closed-form", abs(exact - 2.5) < 1e-9, exact))
    times, _ = cpsim.survival_times(k2, 2.0 * lambda_injection, reps, 1e9, seed + 1)
    se = times.std(ddof=1) / math.sqrt(len(times))
    z = abs(times.mean() - exact) / se
    out.append(("k2-sim-vs-oracle", z < 3.0, z))

    # random small diluted graphs: sim mean within 3 SE of oracle
    rng = np.random.default_rng(seed)
    worst = 0.0
    ok = True
    for i in range(10):
        n = int(rng.integers(2, 9))
        g = gen_erdos_renyi(n, min(float(n), 3.0), seed + 100 + i)
        mode = "bond" if i % 2 == 0 else "site"
        dg = _dilute(g, mode, 0.7, seed + 200 + i)
        exact = oracle.exact_mean_extinction(dg, 1.5)
        times, _ = cpsim.survival_times(dg, 1.5 * lambda_injection,
                                        max(reps, 2000), 1e9, seed + 300 + i)
        se = times.std(ddof=1) / math.sqrt(len(times))
        z = abs(times.mean() - exact) / se
        worst = max(worst, z)
        ok = ok and z < 3.0
    out.append(("random-graphs-sim-vs-oracle", ok, worst))

    # Monte Carlo crossing against the exact enumeration, 3x2 box
    worst = 0.0
    ok = True
    from .graphs import gen_grid
    for p in (0.3, 0.5, 0.7):
        exact = oracle.exact_crossing_prob(3, 2, p)
        hits = sum(percolate.has_crossing(dilute_bonds(gen_grid(3, 2), p, seed + s))
                   for s in range(4000))
        phat = hits / 4000
        se = math.sqrt(exact * (1 - exact) / 4000)
        z = abs(phat - exact) / se
        worst = max(worst, z)
        ok = ok and z < 3.0
    out.append(("crossing-mc-vs-exact", ok, worst))

    # duality identity: LR at p plus dual TB at 1-p is 1 on the (n+1) x n box
    ok = True
    for n in (1, 2):
        a = oracle.exact_crossing_prob(n + 1, n, 0.35, "LR")
        b = oracle.exact_crossing_prob(n, n + 1, 0.65, "TB")
        ok = ok and abs(a + b - 1.0) < 1e-9
    out.append(("duality-sum-identity", ok, abs(a + b - 1.0)))

    # oriented update law vs exact next-row distribution, chi-squared
    row = np.array([1, 0, 1, 1, 0, 0], dtype=bool)
    pmf = oracle.oriented_next_row_dist(row, 0.7)
    draws = _oriented_draws(row, 0.7, 20000, seed)
    support = np.flatnonzero(pmf > 0)
    counts = np.bincount(draws, minlength=len(pmf))[support]
    chi = scipy.stats.chisquare(counts, pmf[support] * len(draws))
    out.append(("oriented-next-row-chi2", chi.pvalue > 0.01, chi.pvalue))

    return out


def _oriented_draws(row, theta, n_draws, seed):
    """Sample next rows with the simulator's update rule; returns bitmask codes."""
    rng = np.random.default_rng(seed)
    width = len(row)
    active = np.ones(width, dtype=bool)
    weights = 1 << np.arange(width)
    draws = np.empty(n_draws, dtype=np.int64)
    for i in range(n_draws):
        nxt = cpsim.oriented_next_row(row, active, theta, rng)
        draws[i] = int((nxt * weights).sum())
    return draws
