"""Named desk-scale experiments: configuration, replication, and emission.

Each runner consumes an ExperimentSpec and returns an ExperimentResult whose
CSV rows are a pure function of the spec (replica streams are derived from
(master_seed, replica), aggregation is order-independent), so re-running an
echoed spec reproduces bit-identical CSV bytes at any thread count.  Wall
clock lives only in the JSON sidecar.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .asep import (
    quadrant_minus_probability,
    quadrant_window_side,
    sample_watch_positions,
    truncation_size,
)
from .rate import RateParams, phi_plus
from .rng import SEED_RULE_ID
from .stats import (
    BinomialEstimate,
    fit_log_slope_censored,
    wilson_interval,
    z_score_of_difference,
)

DEFAULT_HORIZON_NOTE = "horizon/box defaults come from pilot runs, not from the model's asymptotic statements"


@dataclass
class ExperimentSpec:
    name: str
    params: dict
    replicas: int
    master_seed: int = 0
    out: str | None = None
    threads: int = 0  # 0 = leave the numba default

    def canonical_json(self) -> str:
        payload = {
            "name": self.name,
            "params": self.params,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "threads": self.threads,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    columns: list[str]
    rows: list[dict]
    wall_clock_s: float = 0.0
    seed_rule: str = SEED_RULE_ID

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in self.columns})
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {
            "spec": json.loads(self.spec.canonical_json()),
            "spec_sha256": hashlib.sha256(self.spec.canonical_json().encode()).hexdigest(),
            "seed_rule": self.seed_rule,
            "csv_sha256": hashlib.sha256(self.to_csv().encode()).hexdigest(),
            "wall_clock_s": self.wall_clock_s,
        }

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_csv())
        with open(path + ".json", "w", encoding="utf-8") as f:
            json.dump(self.sidecar(), f, indent=2, sort_keys=True)
            f.write("\n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _set_threads(spec: ExperimentSpec):
    if spec.threads > 0:
        import numba

        numba.set_num_threads(spec.threads)


def _est_cols(prefix=""):
    return [f"{prefix}successes", f"{prefix}replicas", f"{prefix}estimate", f"{prefix}lo", f"{prefix}hi"]


def _est_row(est: BinomialEstimate, prefix=""):
    return {
        f"{prefix}successes": est.successes,
        f"{prefix}replicas": est.trials,
        f"{prefix}estimate": est.estimate,
        f"{prefix}lo": est.lo,
        f"{prefix}hi": est.hi,
    }


# -- the runners ------------------------------------------------------------------


def run_coupling_check(spec: ExperimentSpec) -> ExperimentResult:
    """Distributional identity between the quadrant interface and the ASEP.

    Estimates P(spin at (m,l) = -1 at time t) with the lattice engine and
    P(x_l(t) < m - l) with the particle engine, and reports the z-score of
    the difference.
    """
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    q, t, m, l = float(p["q"]), float(p["t"]), int(p["m"]), int(p["l"])
    if m < 1 or l < 1:
        raise ValueError("coupling check needs m, l >= 1")
    side = int(p.get("side", 0)) or quadrant_window_side(t, m, l)
    lattice_est, violations = quadrant_minus_probability(
        side, q, t, m, l, spec.master_seed, spec.replicas, check_staircase=bool(p.get("check_staircase", True))
    )
    M = int(p.get("M", 0)) or truncation_size(l, t)
    pos, _ = sample_watch_positions(M, q, t, l, spec.master_seed + 1, spec.replicas)
    asep_est = wilson_interval(int(np.sum(pos < m - l)), spec.replicas)
    z = z_score_of_difference(lattice_est, asep_est)
    row = {
        "q": q, "t": t, "m": m, "l": l, "side": side, "M": M, "censored": 0,
        "z_score": z, "staircase_violations": violations,
    }
    row.update(_est_row(lattice_est, "lattice_"))
    row.update(_est_row(asep_est, "asep_"))
    cols = ["q", "t", "m", "l", "side", "M"] + _est_cols("lattice_") + _est_cols("asep_") + [
        "z_score", "staircase_violations", "censored",
    ]
    return ExperimentResult(spec, cols, [row], time.perf_counter() - t0)


def run_current_lln(spec: ExperimentSpec) -> ExperimentResult:
    """Mean of h0(t/gamma)/t across a t grid (law-of-large-numbers probe)."""
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    q = float(p["q"])
    gamma = 2.0 * q - 1.0
    if gamma <= 0:
        raise ValueError("current experiment needs q > 1/2")
    rows = []
    for t in [float(x) for x in p["t_grid"]]:
        if t == 0.0:
            rows.append({"q": q, "t": t, "M": 0, "replicas": spec.replicas, "censored": 0,
                         "mean_h0_over_t": 0.0, "se": 0.0, "sd": 0.0})
            continue
        duration = t / gamma
        M = truncation_size(int(t / 4) + 20, duration)
        _, h0 = sample_watch_positions(M, q, duration, 1, spec.master_seed, spec.replicas)
        vals = h0 / t
        rows.append({
            "q": q, "t": t, "M": M, "replicas": spec.replicas, "censored": 0,
            "mean_h0_over_t": float(vals.mean()),
            "se": float(vals.std(ddof=1) / math.sqrt(spec.replicas)),
            "sd": float(vals.std(ddof=1)),
        })
    cols = ["q", "t", "M", "replicas", "censored", "mean_h0_over_t", "se", "sd"]
    return ExperimentResult(spec, cols, rows, time.perf_counter() - t0)


def run_ld_tail(spec: ExperimentSpec) -> ExperimentResult:
    """Lower-tail decay: estimates of P(x_m(t/gamma) < 0) at m = floor(t(1-eps)/4)
    per t, with a log-slope fit compared against -phi_plus(eps)."""
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    q = float(p["q"])
    params = RateParams.from_q(q)
    rows = []
    eps_list = [float(e) for e in p["eps_grid"]]
    t_list = [float(t) for t in p["t_grid"]]
    for eps in eps_list:
        pts = []
        for i, t in enumerate(t_list):
            m = max(1, int(math.floor(t * (1.0 - eps) / 4.0)))
            duration = t / params.gamma
            M = truncation_size(m, duration)
            pos, _ = sample_watch_positions(M, q, duration, m, spec.master_seed + i, spec.replicas)
            est = wilson_interval(int(np.sum(pos < 0)), spec.replicas)
            pts.append((t, est.estimate))
            row = {"kind": "cell", "q": q, "eps": eps, "t": t, "m": m, "M": M, "censored": 0,
                   "slope": "", "slope_target": ""}
            row.update(_est_row(est))
            rows.append(row)
        fit = fit_log_slope_censored(pts)
        rows.append({
            "kind": "fit", "q": q, "eps": eps, "t": "", "m": "", "M": "",
            "successes": "", "replicas": fit.n_points, "estimate": "", "lo": "", "hi": "",
            "censored": fit.n_censored,
            "slope": fit.slope, "slope_target": -phi_plus(eps, params),
        })
    cols = ["kind", "q", "eps", "t", "m", "M"] + _est_cols() + ["censored", "slope", "slope_target"]
    return ExperimentResult(spec, cols, rows, time.perf_counter() - t0)


def run_erosion_scaling(spec: ExperimentSpec) -> ExperimentResult:
    """Median and tail erosion times along an L ladder, plus doubling ratios."""
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    q = float(p["q"])
    d = int(p.get("d", 2))
    t_max = float(p["t_max"])
    grid = [int(L) for L in p["L_grid"]]
    medians = {}
    rows = []
    for L in grid:
        out_t = np.empty(spec.replicas, np.float64)
        out_c = np.empty(spec.replicas, np.bool_)
        K.erosion_many(L, d, q, np.uint64(spec.master_seed + L), spec.replicas, t_max, out_t, out_c)
        n_cens = int(out_c.sum())
        if n_cens == spec.replicas:
            raise ValueError(f"all replicas censored at L={L}; raise t_max")
        med = float(np.median(out_t)) if n_cens < spec.replicas / 2 else math.nan
        medians[L] = med
        rows.append({
            "kind": "cell", "q": q, "d": d, "L": L, "replicas": spec.replicas,
            "censored": n_cens, "median_T": med,
            "p95_T": float(np.quantile(out_t, 0.95)) if n_cens < spec.replicas / 20 else math.nan,
            "mean_T": float(out_t.mean()), "ratio": "",
        })
    for L in grid:
        if 2 * L in medians:
            rows.append({
                "kind": "ratio", "q": q, "d": d, "L": L, "replicas": "", "censored": "",
                "median_T": "", "p95_T": "", "mean_T": "",
                "ratio": medians[2 * L] / medians[L],
            })
    cols = ["kind", "q", "d", "L", "replicas", "censored", "median_T", "p95_T", "mean_T", "ratio"]
    return ExperimentResult(spec, cols, rows, time.perf_counter() - t0)


def run_q1_box_fixation(spec: ExperimentSpec) -> ExperimentResult:
    """P(box all +1 by the horizon) per box side, q = 1, all -1 outside."""
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    p_plus = float(p["p"])
    if not 0.0 < p_plus <= 1.0:
        raise ValueError("need p > 0")
    d = int(p.get("d", 2))
    horizon_factor = float(p.get("horizon_factor", 10.0))
    rows = []
    pts = []
    for n in [int(x) for x in p["n_grid"]]:
        horizon = horizon_factor * n
        out_fixed = np.empty(spec.replicas, np.bool_)
        out_time = np.empty(spec.replicas, np.float64)
        K.box_fixation_many(n, d, p_plus, 1.0, horizon, -1, np.uint64(spec.master_seed + n),
                            spec.replicas, out_fixed, out_time)
        est = wilson_interval(int(out_fixed.sum()), spec.replicas)
        row = {"kind": "cell", "p": p_plus, "d": d, "n": n, "horizon": horizon,
               "censored": spec.replicas - est.successes,
               "mean_fix_time": float(out_time[out_fixed].mean()) if est.successes else math.nan,
               "complement_slope": ""}
        row.update(_est_row(est))
        rows.append(row)
        pts.append((n, 1.0 - est.estimate))
    try:
        fit = fit_log_slope_censored(pts)
        slope, n_cens = fit.slope, fit.n_censored
    except ValueError:
        slope, n_cens = math.nan, len(pts)
    rows.append({"kind": "fit", "p": p_plus, "d": d, "n": "", "horizon": "",
                 "successes": "", "replicas": len(pts), "estimate": "", "lo": "", "hi": "",
                 "censored": n_cens, "mean_fix_time": "", "complement_slope": slope})
    cols = ["kind", "p", "d", "n", "horizon"] + _est_cols() + ["censored", "mean_fix_time", "complement_slope"]
    return ExperimentResult(spec, cols, rows, time.perf_counter() - t0)


def run_fixation_probe(spec: ExperimentSpec) -> ExperimentResult:
    """P(center spin is -1 at some s >= t) per t on one product-initial box.

    Non-model defaults: AllPlus outer boundary and a finite horizon; the
    estimates are trend probes, not constants.
    """
    t0 = time.perf_counter()
    _set_threads(spec)
    p = spec.params
    p_plus = 1.0 - float(p["p_minus"]) if "p_minus" in p else float(p["p"])
    q = float(p["q"])
    L = int(p["L"])
    t_grid = [float(t) for t in p["t_grid"]]
    horizon = float(p.get("horizon", 1.2 * max(t_grid)))
    if horizon <= max(t_grid):
        raise ValueError("horizon must exceed the largest t")
    out_slast = np.empty(spec.replicas, np.float64)
    K.fixation_probe_many(L, p_plus, q, horizon, np.uint64(spec.master_seed), spec.replicas, out_slast)
    rows = []
    pts = []
    for t in t_grid:
        est = wilson_interval(int(np.sum(out_slast >= t)), spec.replicas)
        row = {"kind": "cell", "p_plus": p_plus, "q": q, "L": L, "horizon": horizon, "t": t,
               "censored": 0, "slope_vs_t_logsq": ""}
        row.update(_est_row(est))
        rows.append(row)
        if t > 1.0:
            pts.append((t / math.log(t) ** 2, est.estimate))
    try:
        fit = fit_log_slope_censored(pts)
        slope, n_cens = fit.slope, fit.n_censored
    except ValueError:
        slope, n_cens = math.nan, len(pts)
    rows.append({"kind": "fit", "p_plus": p_plus, "q": q, "L": L, "horizon": horizon, "t": "",
                 "successes": "", "replicas": len(pts), "estimate": "", "lo": "", "hi": "",
                 "censored": n_cens, "slope_vs_t_logsq": slope})
    cols = ["kind", "p_plus", "q", "L", "horizon", "t"] + _est_cols() + ["censored", "slope_vs_t_logsq"]
    return ExperimentResult(spec, cols, rows, time.perf_counter() - t0)


RUNNERS = {
    "coupling-check": run_coupling_check,
    "current-lln": run_current_lln,
    "ld-tail": run_ld_tail,
    "erosion-scaling": run_erosion_scaling,
    "q1-box-fixation": run_q1_box_fixation,
    "fixation-probe": run_fixation_probe,
}

DEFAULTS: dict[str, dict] = {
    "coupling-check": {
        "params": {"q": 0.7, "t": 4.0, "m": 2, "l": 1, "side": 0, "check_staircase": True,
                    "_note": "side 0 means auto window; pilot-calibrated margin"},
        "replicas": 100_000,
    },
    "current-lln": {
        "params": {"q": 0.75, "t_grid": [50.0, 100.0, 200.0, 400.0],
                    "_note": DEFAULT_HORIZON_NOTE},
        "replicas": 1000,
    },
    "ld-tail": {
        "params": {"q": 0.95, "eps_grid": [0.3], "t_grid": [8.0, 14.0, 20.0],
                    "_note": "t grid pinned by pilots so every cell stays measurable at 1e6 replicas"},
        "replicas": 1_000_000,
    },
    "erosion-scaling": {
        "params": {"q": 0.75, "d": 2, "L_grid": [8, 16, 32, 64], "t_max": 3000.0,
                    "_note": "control run uses q=0.5 with t_max 60000 (pilot values)"},
        "replicas": 400,
    },
    "q1-box-fixation": {
        "params": {"p": 0.4, "d": 2, "n_grid": [8, 16, 32], "horizon_factor": 10.0,
                    "_note": DEFAULT_HORIZON_NOTE},
        "replicas": 400,
    },
    "fixation-probe": {
        "params": {"p": 0.9, "q": 0.99, "L": 128, "t_grid": [5.0, 10.0, 20.0, 40.0],
                    "horizon": 48.0,
                    "_note": "p is the +1 density (0.9 plus = 0.1 minus); AllPlus outer boundary is a non-model choice"},
        "replicas": 1000,
    },
}


def default_spec(name: str, **overrides) -> ExperimentSpec:
    if name not in DEFAULTS:
        raise ValueError(f"unknown experiment {name!r}; choices: {sorted(DEFAULTS)}")
    d = DEFAULTS[name]
    params = {k: v for k, v in d["params"].items() if not k.startswith("_")}
    spec = ExperimentSpec(name=name, params=params, replicas=d["replicas"], master_seed=0)
    for k, v in overrides.items():
        setattr(spec, k, v)
    return spec


def run(spec: ExperimentSpec) -> ExperimentResult:
    if spec.name not in RUNNERS:
        raise ValueError(f"unknown experiment {spec.name!r}; choices: {sorted(RUNNERS)}")
    if spec.replicas < 1:
        raise ValueError("replicas must be >= 1")
    result = RUNNERS[spec.name](spec)
    if spec.out:
        result.write(spec.out)
    return result
