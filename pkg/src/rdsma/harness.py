"""Reproducible simulation-study runner.

A study is a grid of network specs crossed with sampling designs; each
cell runs independent replications of generate-network, draw-one-RDS-
sample, estimate (and optionally bootstrap).  Replication seeds are
pure functions of (master seed, cell index, replication index), so
results are byte-identical across reruns and worker counts.
"""
from __future__ import annotations

import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapConfig, parametric_bootstrap
from .estimate import MaConfig, child_rng, ma_estimate, naive_mean, vh_estimate
from .netgen import InfeasibleSpecError, MixingSpec, gen_bernoulli_mixing, solve_mixing_cells
from .rdssim import SamplingDesign, run_rds, select_seeds

ESTIMATORS = ("mean", "vh", "ma")


@dataclass
class StudySpec:
    networks: list
    designs: list
    estimators: tuple = ESTIMATORS
    replications: int = 200
    ma: MaConfig = None
    bootstrap: BootstrapConfig = None
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not self.networks or not self.designs:
            raise ValueError("network and design grids must be nonempty")
        for est in self.estimators:
            if est not in ESTIMATORS:
                raise ValueError(f"unknown estimator {est!r}")
        if self.ma is None:
            self.ma = MaConfig(pop_size=0)


@dataclass
class StudyResult:
    columns: list
    rows: list

    def write_csv(self, path_or_file):
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as f:
                self._write(f)

    def _write(self, f):
        f.write(",".join(self.columns) + "\n")
        for row in self.rows:
            f.write(",".join(_fmt(row.get(c)) for c in self.columns) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _cell_columns():
    return ["N", "prevalence", "mean_degree", "homophily_R", "activity_w",
            "n", "n_seeds", "seed_bias", "coupons", "referral_weight"]


def _cell_values(net_spec: MixingSpec, design: SamplingDesign):
    return {
        "N": net_spec.n,
        "prevalence": net_spec.prevalence,
        "mean_degree": net_spec.mean_degree,
        "homophily_R": net_spec.homophily_R,
        "activity_w": net_spec.activity_w,
        "n": design.n,
        "n_seeds": design.n_seeds,
        "seed_bias": "infected" if design.seed_mode == "pps_infected" else "none",
        "coupons": design.coupons,
        "referral_weight": design.referral_weight_infected,
    }


def _believed(design: SamplingDesign) -> SamplingDesign:
    """What the estimator assumes about the design: the stated rules
    without any referral bias."""
    return dataclasses.replace(design, referral_weight_infected=1.0)


def _resolve_ma(ma: MaConfig, net_spec: MixingSpec) -> MaConfig:
    pop = ma.pop_size if ma.pop_size > 0 else net_spec.n
    return dataclasses.replace(ma, pop_size=pop)


def run_replicate(net_spec, design, estimators, ma_cfg, boot_cfg, master, cell, rep):
    """One replication: fresh network, one RDS sample, all estimators.

    Every generator it touches is derived from (master, cell, rep), so
    the result does not depend on scheduling.
    """
    net = gen_bernoulli_mixing(net_spec, child_rng(master, cell, rep, 0))
    rng_s = child_rng(master, cell, rep, 1)
    seeds = select_seeds(net, design, rng_s)
    sample = run_rds(net, design, seeds, rng_s)
    out = {"true_mu": net.prevalence(), "sample_size": sample.size}
    for est in estimators:
        if est == "mean":
            out["mean"] = naive_mean(sample)
        elif est == "vh":
            out["vh"] = vh_estimate(sample)
        elif est == "ma":
            cfg = _resolve_ma(ma_cfg, net_spec)
            believed = _believed(design)
            res = ma_estimate(sample, believed, cfg, child_rng(master, cell, rep, 2))
            out["ma"] = res.mu_hat
            if boot_cfg is not None:
                boot = parametric_bootstrap(res, believed, boot_cfg, cfg,
                                            child_rng(master, cell, rep, 3))
                out["ma_boot_se"] = boot.se
                out["ma_cover"] = {lv: iv[0] <= out["true_mu"] <= iv[1]
                                   for lv, iv in boot.intervals.items()}
    return out


def _replicate_task(args):
    return run_replicate(*args)


def _run_cells(spec: StudySpec, cells):
    """Fan replications over a worker pool; collect by (cell, rep) index."""
    tasks = []
    for ci, (net_spec, design) in enumerate(cells):
        for rep in range(spec.replications):
            tasks.append((net_spec, design, tuple(spec.estimators), spec.ma,
                          spec.bootstrap, spec.master_seed, ci, rep))
    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            flat = list(pool.map(_replicate_task, tasks, chunksize=4))
    else:
        flat = [run_replicate(*t) for t in tasks]
    per_cell = {}
    i = 0
    for ci in range(len(cells)):
        per_cell[ci] = flat[i:i + spec.replications]
        i += spec.replications
    return per_cell


def run_study(spec: StudySpec) -> StudyResult:
    """One row per (grid cell, estimator) with bias, spread and coverage."""
    levels = spec.bootstrap.ci_levels if spec.bootstrap else ()
    columns = _cell_columns() + ["estimator", "mean_estimate", "bias",
                                 "observed_se", "mean_boot_se"]
    columns += [f"coverage_{int(round(lv * 100))}" for lv in levels]
    columns += ["replications"]

    cells = []
    skipped = []
    for net_spec in spec.networks:
        for design in spec.designs:
            try:
                solve_mixing_cells(net_spec)
                cells.append((net_spec, design))
            except InfeasibleSpecError as exc:
                skipped.append((net_spec, design, str(exc)))
    for net_spec, design, why in skipped:
        print(f"skipping infeasible cell {net_spec}: {why}", file=sys.stderr)

    per_cell = _run_cells(spec, cells)
    rows = []
    for ci, (net_spec, design) in enumerate(cells):
        reps = per_cell[ci]
        true_mu = reps[0]["true_mu"]
        for est in spec.estimators:
            vals = np.array([r[est] for r in reps])
            row = _cell_values(net_spec, design)
            row["estimator"] = est
            row["mean_estimate"] = float(vals.mean())
            row["bias"] = float(vals.mean() - true_mu)
            row["observed_se"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            if est == "ma" and spec.bootstrap is not None:
                row["mean_boot_se"] = float(np.mean([r["ma_boot_se"] for r in reps]))
                for lv in levels:
                    row[f"coverage_{int(round(lv * 100))}"] = float(
                        np.mean([r["ma_cover"][lv] for r in reps]))
            row["replications"] = len(reps)
            rows.append(row)
    for net_spec, design, why in skipped:
        row = _cell_values(net_spec, design)
        row["estimator"] = "skipped"
        row["replications"] = 0
        rows.append(row)
    return StudyResult(columns, rows)


def run_sensitivity_N(spec: StudySpec, n_values) -> StudyResult:
    """Rerun the model-assisted estimator across assumed population sizes.

    Populations and samples are generated once per replication (same
    derived seeds as run_study) and shared across the whole assumed-N
    grid; only the assumed size changes between estimator runs.
    """
    columns = _cell_columns() + ["assumed_N", "estimator", "mean_estimate",
                                 "bias", "observed_se", "replications"]
    cells = [(ns, d) for ns in spec.networks for d in spec.designs]
    rows = []
    for ci, (net_spec, design) in enumerate(cells):
        estimates = {nv: [] for nv in n_values}
        ref = {"mean": [], "vh": []}
        true_mu = None
        for rep in range(spec.replications):
            net = gen_bernoulli_mixing(net_spec, child_rng(spec.master_seed, ci, rep, 0))
            rng_s = child_rng(spec.master_seed, ci, rep, 1)
            seeds = select_seeds(net, design, rng_s)
            sample = run_rds(net, design, seeds, rng_s)
            true_mu = net.prevalence()
            ref["mean"].append(naive_mean(sample))
            ref["vh"].append(vh_estimate(sample))
            for nv in n_values:
                if nv < sample.size:
                    raise ValueError(f"assumed N={nv} below sample size {sample.size}")
                cfg = dataclasses.replace(spec.ma, pop_size=int(nv))
                res = ma_estimate(sample, _believed(design), cfg,
                                  child_rng(spec.master_seed, ci, rep, 2))
                estimates[nv].append(res.mu_hat)
        for est in ("mean", "vh"):
            vals = np.array(ref[est])
            row = _cell_values(net_spec, design)
            row.update(assumed_N=None, estimator=est,
                       mean_estimate=float(vals.mean()),
                       bias=float(vals.mean() - true_mu),
                       observed_se=float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                       replications=len(vals))
            rows.append(row)
        for nv in n_values:
            vals = np.array(estimates[nv])
            row = _cell_values(net_spec, design)
            row.update(assumed_N=int(nv), estimator="ma",
                       mean_estimate=float(vals.mean()),
                       bias=float(vals.mean() - true_mu),
                       observed_se=float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                       replications=len(vals))
            rows.append(row)
    return StudyResult(columns, rows)


# -- study config files ----------------------------------------------------

_INT_KEYS = {"network.N", "design.n", "design.n_seeds", "design.coupons",
             "replications", "seed", "threads", "ma.iterations", "ma.m1",
             "ma.m2", "ma.tetrad_n", "ma.pop_size", "bootstrap.B"}
_FLOAT_KEYS = {"network.prevalence", "network.mean_degree", "network.homophily_R",
               "network.activity_w", "design.referral_weight", "bootstrap.levels"}
_STR_KEYS = {"design.seed_bias", "estimators", "ma.offspring", "bootstrap.mode"}
_GRID_KEYS = {"network.N", "network.prevalence", "network.mean_degree",
              "network.homophily_R", "network.activity_w", "design.n",
              "design.n_seeds", "design.seed_bias", "design.coupons",
              "design.referral_weight"}


def parse_study_config(text) -> StudySpec:
    """Parse the flat dotted-key study format.

    One `key = value` per line, lists comma-separated, # starts a
    comment; unknown keys are errors.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _INT_KEYS | _FLOAT_KEYS | _STR_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        items = [v.strip() for v in val.split(",") if v.strip() != ""]
        if not items:
            raise ValueError(f"line {lineno}: empty value for {key!r}")
        if key in _INT_KEYS:
            parsed = [int(v) for v in items]
        elif key in _FLOAT_KEYS:
            parsed = [float(v) for v in items]
        else:
            parsed = items
        if key not in _GRID_KEYS and key not in ("estimators", "bootstrap.levels") \
                and len(parsed) > 1:
            raise ValueError(f"line {lineno}: {key!r} takes a single value")
        raw[key] = parsed

    def get(key, default):
        return raw[key][0] if key in raw else default

    def grid(key, default):
        return raw.get(key, [default])

    networks = [MixingSpec(n=n, prevalence=p, mean_degree=dd, homophily_R=r, activity_w=w)
                for n in grid("network.N", 1000)
                for p in grid("network.prevalence", 0.20)
                for dd in grid("network.mean_degree", 7.0)
                for r in grid("network.homophily_R", 1.0)
                for w in grid("network.activity_w", 1.0)]
    designs = []
    for n in grid("design.n", 500):
        for seeds in grid("design.n_seeds", 10):
            for bias in grid("design.seed_bias", "none"):
                if bias not in ("none", "infected"):
                    raise ValueError(f"design.seed_bias must be none or infected, got {bias!r}")
                for cup in grid("design.coupons", 2):
                    for rw in grid("design.referral_weight", 1.0):
                        designs.append(SamplingDesign(
                            n=n, n_seeds=seeds,
                            seed_mode="pps_infected" if bias == "infected" else "pps_all",
                            coupons=cup, referral_weight_infected=rw))
    ma = MaConfig(
        pop_size=get("ma.pop_size", 0),
        iterations=get("ma.iterations", 3),
        m1=get("ma.m1", 25),
        m2=get("ma.m2", 20),
        tetrad_n=get("ma.tetrad_n", 100_000),
        offspring_mode=get("ma.offspring", "design"),
    )
    boot = None
    if get("bootstrap.B", 0) > 0:
        boot = BootstrapConfig(
            B=get("bootstrap.B", 0),
            mode=get("bootstrap.mode", "fast"),
            ci_levels=tuple(raw.get("bootstrap.levels", [0.95, 0.90])),
        )
    return StudySpec(
        networks=networks,
        designs=designs,
        estimators=tuple(raw.get("estimators", list(ESTIMATORS))),
        replications=get("replications", 200),
        ma=ma,
        bootstrap=boot,
        master_seed=get("seed", 0),
        threads=get("threads", 1),
    )
