"""Prevalence estimators: naive mean, degree-weighted, and the full
model-assisted iterative estimator.

The model-assisted loop alternates between design-based estimates of
the population class table and cross-tie total, a working-model fit of
the cross-tie parameter conditional on those, and Monte Carlo
re-estimation of per-class inclusion probabilities by simulating the
observed design (seed classes matched, recruitment rules replicated)
over networks drawn from the fitted model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .netcore import ClassTable, Network
from .netgen import AnnealSchedule, ErgmSpec, ergm_mcmc_sample
from .ergmfit import ETA_CAP, mean_value_to_natural
from .rdssim import ClassCounts, RdsSample, SamplingDesign, simulate_class_counts


def child_rng(master, *key):
    """Generator that is a pure function of (master, key)."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class WeightTable:
    """Estimated inclusion probabilities keyed by (degree, infection)."""

    pi: dict
    iteration: int = 0

    def lookup(self, k, l, nearest=False):
        key = (int(k), int(l))
        if key in self.pi:
            return self.pi[key]
        if nearest:
            same = [kk for (kk, ll) in self.pi if ll == key[1]]
            if same:
                best = min(same, key=lambda kk: (abs(kk - key[0]), kk))
                return self.pi[(best, key[1])]
        raise KeyError(f"no weight for class {key}")

    def lookup_sample(self, sample: RdsSample, nearest=False):
        return np.array([self.lookup(k, l, nearest=nearest)
                         for k, l in zip(sample.degrees, sample.infected)])


def hajek(sample: RdsSample, weights: WeightTable) -> float:
    """Ratio-form weighted prevalence: sum(z/pi) / sum(1/pi).

    Invariant to rescaling all weights by a positive constant; equals
    the sample mean under constant weights.
    """
    pi = weights.lookup_sample(sample)
    if np.any(pi <= 0):
        raise ValueError("inclusion probabilities must be positive")
    w = 1.0 / pi
    return float(np.dot(w, sample.infected) / w.sum())


def naive_mean(sample: RdsSample) -> float:
    """Unweighted fraction infected."""
    if sample.size == 0:
        raise ValueError("empty sample")
    return float(sample.infected.mean())


def vh_estimate(sample: RdsSample) -> float:
    """Prevalence weighted inversely to self-reported degree."""
    if sample.size == 0:
        raise ValueError("empty sample")
    if np.any(sample.degrees < 1):
        raise ValueError("degree-weighted estimator requires positive degrees")
    w = 1.0 / sample.degrees
    return float(np.dot(w, sample.infected) / w.sum())


def initial_weights(sample: RdsSample, pop_size) -> WeightTable:
    """Degree-proportional starting weights with a finite-population scale.

    Class (k, l) gets (k / N) * sum over sampled j of 1/d_j, clamped
    into (0, 1].  Proportionality to degree makes the first pass of the
    weighted estimator match the degree-weighted one.
    """
    if np.any(sample.degrees < 1):
        raise ValueError("initial weights require positive degrees")
    scale = float((1.0 / sample.degrees).sum()) / float(pop_size)
    pi = {}
    for k, l in set(zip(sample.degrees.tolist(), sample.infected.tolist())):
        pi[(int(k), int(l))] = min(1.0, k * scale)
    return WeightTable(pi, iteration=0)


def design_estimates(sample: RdsSample, weights: WeightTable, pop_size,
                     hajek_denominator=False):
    """Estimated population class proportions and cross-tie total.

    Each sampled node contributes 1/pi to its class cell (scaled by
    1/N, or by the weight total when hajek_denominator is set) and
    (x*(1-z) + (d-x)*z) / (2*pi) to the cross-tie total, x being its
    count of infected alters.
    """
    if not sample.has_cross_alters():
        raise ValueError("cross_alters required; estimate them from referrals first")
    pi = weights.lookup_sample(sample)
    w = 1.0 / pi
    denom = w.sum() if hajek_denominator else float(pop_size)
    entries = {}
    for k, l, wi in zip(sample.degrees.tolist(), sample.infected.tolist(), w):
        key = (int(k), int(l))
        entries[key] = entries.get(key, 0.0) + wi / denom
    x = sample.cross_alters
    z = sample.infected
    d = sample.degrees
    g_tilde = float(np.sum((x * (1 - z) + (d - x) * z) * w) / 2.0)
    return ClassTable(entries, scale="estimated"), g_tilde


def realize_population(table: ClassTable, pop_size, sample: RdsSample, rng=None) -> ClassTable:
    """Integer class table of size N consistent with the observed sample.

    Estimated tables are rescaled to total N and rounded by largest
    remainder; every sampled class is then clamped up to its observed
    count, compensating from the largest surplus classes; finally an
    odd total degree is repaired by promoting one node (chosen from the
    surplus, weighted by slot count) to the next degree.
    """
    n_pop = int(pop_size)
    floors = {}
    for key in sample.record_classes():
        floors[key] = floors.get(key, 0) + 1
    if sum(floors.values()) > n_pop:
        raise ValueError("observed sample classes alone exceed the population size")

    vals = {k: float(v) for k, v in table.entries.items() if v > 0}
    for key in floors:
        vals.setdefault(key, 0.0)
    total = sum(vals.values())
    if total <= 0:
        raise ValueError("class table has no mass")
    scale = n_pop / total
    keys = sorted(vals.keys())
    scaled = {k: vals[k] * scale for k in keys}
    counts = {k: int(math.floor(scaled[k])) for k in keys}
    leftover = n_pop - sum(counts.values())
    by_rem = sorted(keys, key=lambda k: (-(scaled[k] - counts[k]), k))
    for i in range(leftover):
        counts[by_rem[i % len(keys)]] += 1

    # sample realizability: never fewer nodes in a class than observed
    for key, fl in sorted(floors.items()):
        while counts[key] < fl:
            donors = [k for k in keys if counts[k] - floors.get(k, 0) > 0]
            if not donors:
                raise ValueError("cannot satisfy sample class floors within N")
            donor = max(donors, key=lambda k: (counts[k] - floors.get(k, 0), k))
            counts[donor] -= 1
            counts[key] += 1

    counts = {k: c for k, c in counts.items() if c > 0}
    if sum(k * c for (k, _), c in counts.items()) % 2 != 0:
        pool = [(k, max(c - floors.get(k, 0), 0)) for k, c in counts.items()]
        pool = [(k, wgt) for k, wgt in pool if wgt > 0]
        if not pool:
            raise ValueError("cannot repair degree parity without breaking sample floors")
        pool.sort()
        wgts = np.array([wgt for _, wgt in pool], dtype=np.float64)
        if rng is None:
            idx = int(np.argmax(wgts))
        else:
            idx = int(rng.choice(len(pool), p=wgts / wgts.sum()))
        (k, l), _ = pool[idx]
        counts[(k, l)] -= 1
        if counts[(k, l)] == 0:
            del counts[(k, l)]
        counts[(k + 1, l)] = counts.get((k + 1, l), 0) + 1

    return ClassTable(counts, scale="count")


def update_weights(counts: ClassCounts, realized: ClassTable, iteration=0) -> WeightTable:
    """Smoothed per-class inclusion probabilities from simulation counts.

    pi(k, l) = (U + 1) / (M * count + 1), where U is the number of
    times the class was selected over the M simulated samples and count
    its realized population size.  Classes never selected get the
    smoothing floor automatically; values stay in (0, 1].
    """
    pi = {}
    for key, cnt in realized.entries.items():
        cnt = int(cnt)
        if cnt < 1:
            continue
        u = counts.U.get(key, 0)
        val = (u + 1) / (counts.M * cnt + 1)
        if val > 1.0:
            raise AssertionError(f"inclusion probability {val} > 1 for class {key}")
        pi[key] = val
    return WeightTable(pi, iteration=iteration)


def empirical_offspring_table(sample: RdsSample, max_count=3):
    """Flat offspring table replicating the sample's recruit-count mix."""
    p = sample.empirical_offspring(max_count)
    return {(0, 0): p, (0, 1): p}


@dataclass
class MaConfig:
    """Knobs for the model-assisted estimator.

    pop_size is the assumed population size N.  offspring_mode selects
    how internal simulations recruit: "design" replicates the design
    template's coupon rule, "empirical" draws offspring counts from the
    observed sample's recruit-count distribution.
    """

    pop_size: int
    iterations: int = 3
    m1: int = 25
    m2: int = 20
    tetrad_n: int = 100_000
    offspring_mode: str = "design"
    burn_per_edge: int = 20
    spacing_per_edge: int = 2
    anneal: AnnealSchedule = field(default_factory=AnnealSchedule)
    eta_cap: float = ETA_CAP
    hajek_table_denominator: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.m1 < 1 or self.m2 < 1:
            raise ValueError("m1 and m2 must be positive")
        if self.offspring_mode not in ("design", "empirical"):
            raise ValueError(f"unknown offspring_mode {self.offspring_mode!r}")


@dataclass
class MaResult:
    mu_hat: float
    weights: WeightTable
    eta_path: list
    g_tilde_path: list
    realized_table: ClassTable
    ref_net: Network
    sim_design: SamplingDesign
    diagnostics: dict


def internal_design(sample: RdsSample, design_template: SamplingDesign,
                    cfg: MaConfig) -> SamplingDesign:
    """The design simulated inside the estimator: observed seed classes,
    the template's recruitment rule (or the sample's empirical offspring
    mix), no reseeding so that short chains still count."""
    offspring = design_template.offspring
    if offspring is None and cfg.offspring_mode == "empirical":
        offspring = empirical_offspring_table(sample)
    return SamplingDesign(
        n=sample.size,
        n_seeds=len(sample.seed_classes()),
        seed_mode="match",
        seed_classes=sample.seed_classes(),
        coupons=design_template.coupons,
        offspring=offspring,
        referral_weight_infected=design_template.referral_weight_infected,
        reseed_on_dieout=False,
    )


def ma_estimate(sample: RdsSample, design_template: SamplingDesign,
                cfg: MaConfig, rng) -> MaResult:
    """Model-assisted prevalence estimate with seed-bias correction.

    Iterates: design-based class table and cross-tie estimates under
    the current weights; realize an integer population; fit the
    cross-tie parameter; draw m1 networks from the fitted model; run m2
    simulated recruitments per network with seeds matched to the
    observed seed classes; refresh the per-class weights from the
    selection counts.  The final weights feed the ratio estimator.
    """
    n = sample.size
    if cfg.pop_size < n:
        raise ValueError("assumed population size below sample size")
    if not sample.has_cross_alters():
        raise ValueError("cross_alters required; estimate them from referrals first")

    sim_design = internal_design(sample, design_template, cfg)
    master = int(rng.integers(2 ** 63))
    weights = initial_weights(sample, cfg.pop_size)
    eta_path, g_path = [], []
    diagnostics = {
        "anneal_residual": [], "short_samples": [], "dieout_rate": [],
        "fit_converged": [], "tetrad_count": [], "parity_adjusted": [],
    }
    realized = None
    ref_net = None
    for it in range(1, cfg.iterations + 1):
        rng_it = child_rng(master, it)
        try:
            table, g_tilde = design_estimates(
                sample, weights, cfg.pop_size,
                hajek_denominator=cfg.hajek_table_denominator)
            realized = realize_population(table, cfg.pop_size, sample, rng_it)
            nat = mean_value_to_natural(
                realized, g_tilde, rng_it, tetrad_n=cfg.tetrad_n,
                schedule=cfg.anneal, eta_cap=cfg.eta_cap)
            ref_net = nat.network
            e = max(ref_net.edge_count, 1)
            spec = ErgmSpec(ref_net.degrees, ref_net.infection, nat.eta_hat)
            nets = ergm_mcmc_sample(
                spec, ref_net, cfg.m1, rng_it,
                burn_in=cfg.burn_per_edge * e, spacing=cfg.spacing_per_edge * e)
            counts = simulate_class_counts(
                nets, sim_design, sim_design.seed_classes, cfg.m2, rng_it)
            weights = update_weights(counts, realized, iteration=it)
        except Exception as exc:
            raise RuntimeError(f"model-assisted iteration {it} failed: {exc}") from exc
        eta_path.append(nat.eta_hat)
        g_path.append(g_tilde)
        diagnostics["anneal_residual"].append(nat.anneal.residual)
        diagnostics["short_samples"].append(counts.short_samples)
        diagnostics["dieout_rate"].append(counts.short_samples / counts.M)
        diagnostics["fit_converged"].append(nat.fit.converged)
        diagnostics["tetrad_count"].append(nat.tetrad_count)
        diagnostics["parity_adjusted"].append(nat.parity_node is not None)

    mu = hajek(sample, weights)
    return MaResult(mu, weights, eta_path, g_path, realized, ref_net,
                    sim_design, diagnostics)
