"""Command-line entry points: gen-net, sample, estimate, bootstrap, study."""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .bootstrap import BootstrapConfig, parametric_bootstrap
from .estimate import MaConfig, child_rng, ma_estimate, naive_mean, vh_estimate
from .harness import parse_study_config, run_study
from .netcore import load_network, save_network
from .netgen import MixingSpec, gen_bernoulli_mixing
from .rdssim import (SamplingDesign, estimate_x_from_referrals, load_rds_csv,
                     run_rds, save_rds_csv, select_seeds)


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output path")


def build_parser():
    ap = argparse.ArgumentParser(prog="rdsma")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-net", help="generate a network file pair from mixing targets")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--prevalence", type=float, default=0.20)
    g.add_argument("--mean-degree", type=float, default=7.0)
    g.add_argument("--homophily", type=float, default=1.0)
    g.add_argument("--activity", type=float, default=1.0)
    _add_common(g)

    s = sub.add_parser("sample", help="draw one RDS sample from a stored network")
    s.add_argument("--net", required=True, help="directory holding nodes.csv/edges.csv")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--n-seeds", type=int, default=10)
    s.add_argument("--seed-bias", choices=["none", "infected"], default="none")
    s.add_argument("--coupons", type=int, default=2)
    s.add_argument("--referral-weight", type=float, default=1.0)
    s.add_argument("--no-reseed", action="store_true")
    _add_common(s)

    def est_args(p):
        p.add_argument("--sample", required=True, help="RDS sample CSV")
        p.add_argument("--estimator", choices=["mean", "vh", "ma"], default="ma")
        p.add_argument("--pop-size", type=int, default=0, help="assumed population size (ma)")
        p.add_argument("--ma-iters", type=int, default=3)
        p.add_argument("--m1", type=int, default=25)
        p.add_argument("--m2", type=int, default=20)
        p.add_argument("--tetrad-n", type=int, default=100_000)
        p.add_argument("--offspring", choices=["design", "empirical"], default="design")
        p.add_argument("--coupons", type=int, default=2)

    e = sub.add_parser("estimate", help="estimate prevalence from an RDS sample CSV")
    est_args(e)
    _add_common(e)

    b = sub.add_parser("bootstrap", help="estimate plus parametric-bootstrap uncertainty")
    est_args(b)
    b.add_argument("--B", type=int, default=1000)
    b.add_argument("--mode", choices=["full", "fast"], default="fast")
    b.add_argument("--levels", default="0.95,0.90")
    _add_common(b)

    st = sub.add_parser("study", help="run a simulation study from a config file")
    st.add_argument("--config", required=True)
    _add_common(st)
    return ap


def _design_from_args(args, n_obs):
    return SamplingDesign(n=n_obs, n_seeds=1, seed_mode="pps_all",
                          coupons=args.coupons)


def _run_ma(args, sample, rng):
    if args.pop_size < sample.size:
        raise SystemExit("--pop-size must be at least the sample size")
    if not sample.has_cross_alters():
        sample.cross_alters = estimate_x_from_referrals(sample)
    cfg = MaConfig(pop_size=args.pop_size, iterations=args.ma_iters,
                   m1=args.m1, m2=args.m2, tetrad_n=args.tetrad_n,
                   offspring_mode=args.offspring)
    template = _design_from_args(args, sample.size)
    return ma_estimate(sample, template, cfg, rng), cfg, template


def _write_estimates(path, mu_hat, weights=None):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["quantity", "degree", "infected", "value"])
        w.writerow(["mu_hat", "", "", format(mu_hat, ".12g")])
        if weights is not None:
            for (k, l) in sorted(weights.pi):
                w.writerow(["weight", k, l, format(weights.pi[(k, l)], ".12g")])


def _write_diagnostics(path, res):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "eta_hat", "g_tilde", "anneal_residual",
                    "dieout_rate", "fit_converged"])
        d = res.diagnostics
        for i in range(len(res.eta_path)):
            w.writerow([i + 1, format(res.eta_path[i], ".12g"),
                        format(res.g_tilde_path[i], ".12g"),
                        format(d["anneal_residual"][i], ".12g"),
                        format(d["dieout_rate"][i], ".12g"),
                        int(d["fit_converged"][i])])


def _stem(path):
    base, ext = os.path.splitext(path)
    return base


def main(argv=None):
    args = build_parser().parse_args(argv)
    rng = child_rng(args.seed, 0)

    if args.command == "gen-net":
        spec = MixingSpec(n=args.n, prevalence=args.prevalence,
                          mean_degree=args.mean_degree,
                          homophily_R=args.homophily, activity_w=args.activity)
        net = gen_bernoulli_mixing(spec, rng)
        save_network(net, args.out)
        print(f"wrote {args.out}/nodes.csv and edges.csv "
              f"(N={net.n}, E={net.edge_count})")

    elif args.command == "sample":
        net = load_network(args.net)
        design = SamplingDesign(
            n=args.n, n_seeds=args.n_seeds,
            seed_mode="pps_infected" if args.seed_bias == "infected" else "pps_all",
            coupons=args.coupons, referral_weight_infected=args.referral_weight,
            reseed_on_dieout=not args.no_reseed)
        seeds = select_seeds(net, design, rng)
        sample = run_rds(net, design, seeds, rng)
        save_rds_csv(sample, args.out)
        print(f"wrote {args.out} ({sample.size} respondents, "
              f"max wave {int(sample.waves.max())}, died_out={sample.died_out})")

    elif args.command == "estimate":
        sample = load_rds_csv(args.sample)
        if args.estimator == "mean":
            _write_estimates(args.out, naive_mean(sample))
        elif args.estimator == "vh":
            _write_estimates(args.out, vh_estimate(sample))
        else:
            res, _, _ = _run_ma(args, sample, rng)
            _write_estimates(args.out, res.mu_hat, res.weights)
            _write_diagnostics(_stem(args.out) + "_diagnostics.csv", res)
        print(f"wrote {args.out}")

    elif args.command == "bootstrap":
        sample = load_rds_csv(args.sample)
        res, cfg, template = _run_ma(args, sample, rng)
        levels = tuple(float(x) for x in args.levels.split(","))
        bcfg = BootstrapConfig(B=args.B, mode=args.mode, ci_levels=levels)
        boot = parametric_bootstrap(res, template, bcfg, cfg,
                                    child_rng(args.seed, 1))
        draws_path = _stem(args.out) + "_draws.csv"
        with open(draws_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["replicate", "estimate"])
            for i, v in enumerate(boot.draws):
                w.writerow([i + 1, format(v, ".12g")])
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            header = ["mu_hat", "se", "failures"]
            row = [format(res.mu_hat, ".12g"), format(boot.se, ".12g"), boot.n_failed]
            for lv in levels:
                lo, hi = boot.intervals[lv]
                header += [f"lo_{int(round(lv * 100))}", f"hi_{int(round(lv * 100))}"]
                row += [format(lo, ".12g"), format(hi, ".12g")]
            w.writerow(header)
            w.writerow(row)
        print(f"wrote {args.out} and {draws_path}")

    elif args.command == "study":
        with open(args.config) as f:
            spec = parse_study_config(f.read())
        if args.seed:
            spec.master_seed = args.seed
        if args.threads != 1:
            spec.threads = args.threads
        result = run_study(spec)
        result.write_csv(args.out)
        print(f"wrote {args.out} ({len(result.rows)} rows)")

    return 0


if __name__ == "__main__":
    sys.exit(main())
