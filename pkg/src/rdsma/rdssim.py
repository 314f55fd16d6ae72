"""Simulation of respondent-driven sampling over a known network.

Recruitment runs through a single FIFO queue of respondents (seeds
first), which makes the stop-at-n rule well defined mid-wave.  Coupon
counts are either a fixed maximum per respondent or drawn from an
offspring distribution indexed by (wave, infection status); recruits
are chosen without replacement from the respondent's not-yet-sampled
alters, optionally with a referral weight on infected alters.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .netcore import Network, cross_alters_all


@dataclass
class SamplingDesign:
    """Seed, coupon and referral rules for one RDS design.

    seed_mode is one of "pps_all" (sequential probability-proportional-
    to-degree from the whole population), "pps_infected" (same, from
    infected nodes only) or "match" (one seed per entry of
    seed_classes, drawn uniformly from that (degree, infection) class
    with nearest-degree fallback inside the same infection group).

    offspring, when given, maps (wave, infection) to a probability
    vector over 0..3 recruits and overrides the fixed coupon count;
    missing waves fall back to the nearest specified wave for that
    infection status.
    """

    n: int
    n_seeds: int
    seed_mode: str = "pps_all"
    seed_classes: tuple = None
    coupons: int = 2
    offspring: dict = None
    referral_weight_infected: float = 1.0
    reseed_on_dieout: bool = True

    def __post_init__(self):
        if self.n_seeds > self.n:
            raise ValueError("n_seeds must not exceed n")
        if self.n_seeds < 1:
            raise ValueError("need at least one seed")
        if self.referral_weight_infected <= 0:
            raise ValueError("referral weight must be positive")
        if self.seed_mode not in ("pps_all", "pps_infected", "match"):
            raise ValueError(f"unknown seed_mode {self.seed_mode!r}")
        if self.seed_mode == "match" and not self.seed_classes:
            raise ValueError("match mode requires seed_classes")
        if self.seed_classes is not None:
            self.seed_classes = tuple((int(k), int(l)) for k, l in self.seed_classes)
            if len(self.seed_classes) != self.n_seeds:
                raise ValueError("seed_classes length must equal n_seeds")
        if self.offspring is not None:
            clean = {}
            statuses = set()
            for (w, l), p in self.offspring.items():
                p = np.asarray(p, dtype=np.float64)
                if p.ndim != 1 or p.shape[0] > 4:
                    raise ValueError("offspring distributions live on 0..3")
                p = np.pad(p, (0, 4 - p.shape[0]))
                if abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
                    raise ValueError(f"offspring distribution for {(w, l)} is not a distribution")
                clean[(int(w), int(l))] = p
                statuses.add(int(l))
            if statuses != {0, 1}:
                raise ValueError("offspring table needs entries for both statuses")
            self.offspring = clean


@dataclass
class RdsSample:
    """One realized recruitment forest with per-respondent observations.

    Arrays are aligned in enrollment order.  recruiters holds -1 for
    seeds; cross_alters may be NaN when alter statuses were not
    observed.  died_out marks runs that exhausted the queue before
    reaching the target size without reseeding.
    """

    nodes: np.ndarray
    degrees: np.ndarray
    infected: np.ndarray
    cross_alters: np.ndarray
    waves: np.ndarray
    recruiters: np.ndarray
    died_out: bool = False

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def seed_ids(self):
        return self.nodes[self.recruiters < 0]

    def seed_classes(self):
        mask = self.recruiters < 0
        return tuple(zip(self.degrees[mask].tolist(), self.infected[mask].tolist()))

    def record_classes(self):
        return list(zip(self.degrees.tolist(), self.infected.tolist()))

    def offspring_counts(self):
        """Number of recruits produced by each respondent, aligned to records."""
        counts = {int(v): 0 for v in self.nodes}
        for r in self.recruiters:
            if r >= 0:
                counts[int(r)] += 1
        return np.array([counts[int(v)] for v in self.nodes], dtype=np.int64)

    def empirical_offspring(self, max_count=3):
        """Proportion of respondents with 0..max_count recruits."""
        c = np.bincount(self.offspring_counts(), minlength=max_count + 1)
        return c[:max_count + 1] / self.size

    def has_cross_alters(self):
        return not np.any(np.isnan(self.cross_alters))


@dataclass
class ClassCounts:
    """Selection counts by (degree, infection) class over M simulated samples."""

    U: dict
    M: int
    short_samples: int = 0


def select_seeds(net: Network, design: SamplingDesign, rng, seed_classes=None):
    """Seed ids under the design's seed rule (see SamplingDesign)."""
    z = net.infection
    deg = net.degrees
    classes = seed_classes if seed_classes is not None else design.seed_classes
    if design.seed_mode == "match" or seed_classes is not None:
        chosen = []
        used = np.zeros(net.n, dtype=bool)
        for (k, l) in classes:
            group = np.flatnonzero((z == l) & ~used)
            if group.size == 0:
                raise ValueError(f"no unused nodes with infection status {l}")
            exact = group[deg[group] == k]
            if exact.size:
                pick = int(exact[int(rng.integers(0, exact.size))])
            else:
                gaps = np.abs(deg[group] - k)
                nearest = group[gaps == gaps.min()]
                pick = int(nearest[int(rng.integers(0, nearest.size))])
            chosen.append(pick)
            used[pick] = True
        return np.array(chosen, dtype=np.int64)

    if design.seed_mode == "pps_all":
        pool = np.arange(net.n)
    else:
        pool = np.flatnonzero(z == 1)
    pool = pool[deg[pool] > 0]
    if pool.size < design.n_seeds:
        raise ValueError(f"eligible seed pool has {pool.size} nodes, need {design.n_seeds}")
    weights = deg[pool].astype(np.float64)
    chosen = []
    for _ in range(design.n_seeds):
        p = weights / weights.sum()
        idx = int(rng.choice(pool.size, p=p))
        chosen.append(int(pool[idx]))
        weights[idx] = 0.0
    return np.array(chosen, dtype=np.int64)


def _offspring_cum(design: SamplingDesign):
    """Dense cumulative offspring table (W, 2, 4) with wave fallback resolved."""
    if design.offspring is None:
        return False, np.ones((1, 2, 4), dtype=np.float64)
    table = design.offspring
    w_max = max(w for (w, _) in table) + 1
    probs = np.zeros((w_max, 2, 4), dtype=np.float64)
    for l in (0, 1):
        waves_l = sorted(w for (w, ll) in table if ll == l)
        for w in range(w_max):
            if (w, l) in table:
                probs[w, l] = table[(w, l)]
            else:
                below = [x for x in waves_l if x < w]
                src = max(below) if below else min(x for x in waves_l if x > w)
                probs[w, l] = table[(src, l)]
    return True, np.cumsum(probs, axis=2)


def run_rds(net: Network, design: SamplingDesign, seeds, rng,
            compute_x=True, validate=True) -> RdsSample:
    """Simulate one RDS chain from the given seeds.

    Stops the moment design.n respondents are enrolled; on die-out
    either draws a replacement seed proportional to degree from the
    unsampled nodes (reseed_on_dieout) or returns the short sample
    flagged.  Every run is checked against the recruitment invariants
    unless validate is disabled.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size < 1:
        raise ValueError("need at least one seed")
    if len(set(seeds.tolist())) != seeds.size:
        raise ValueError("seeds must be distinct")
    if seeds.min() < 0 or seeds.max() >= net.n:
        raise ValueError("seed id out of range")

    mode_table, off_cum = _offspring_cum(design)
    n_target = int(design.n)
    cmax = max(int(design.coupons), 3)
    randbuf = rng.random(n_target * (cmax + 2) + 128)
    out_nodes = np.empty(n_target, dtype=np.int64)
    out_wave = np.empty(n_target, dtype=np.int64)
    out_recruiter = np.empty(n_target, dtype=np.int64)

    cnt, died, _ = _kernels.rds_run(
        net.nbr_flat, net.nbr_off, net.infection, net.degrees, seeds,
        n_target, mode_table, int(design.coupons), off_cum,
        float(design.referral_weight_infected), bool(design.reseed_on_dieout),
        randbuf, out_nodes, out_wave, out_recruiter)

    nodes = out_nodes[:cnt].copy()
    if compute_x:
        x = cross_alters_all(net)[nodes].astype(np.float64)
    else:
        x = np.full(cnt, np.nan)
    sample = RdsSample(
        nodes=nodes,
        degrees=net.degrees[nodes].copy(),
        infected=net.infection[nodes].astype(np.int64),
        cross_alters=x,
        waves=out_wave[:cnt].copy(),
        recruiters=out_recruiter[:cnt].copy(),
        died_out=bool(died),
    )
    if validate:
        validate_rds_sample(sample, net)
    return sample


def validate_rds_sample(sample: RdsSample, net: Network | None = None):
    """Assert the recruitment-forest invariants; optionally check the
    sample against its source network."""
    n = sample.size
    if n == 0:
        raise AssertionError("empty sample")
    seen = {}
    for i in range(n):
        node = int(sample.nodes[i])
        if node in seen:
            raise AssertionError(f"node {node} sampled twice")
        seen[node] = i
        r = int(sample.recruiters[i])
        w = int(sample.waves[i])
        if r < 0:
            if w != 0:
                raise AssertionError("seed with nonzero wave")
        else:
            if r not in seen or seen[r] >= i:
                raise AssertionError("recruiter not enrolled before recruit")
            if w != int(sample.waves[seen[r]]) + 1:
                raise AssertionError("wave must be recruiter wave + 1")
            if net is not None and not net.has_edge(r, node):
                raise AssertionError(f"recruitment pair ({r},{node}) is not a network edge")
    if net is not None:
        if not np.array_equal(sample.degrees, net.degrees[sample.nodes]):
            raise AssertionError("sample degrees disagree with network")
        if not np.array_equal(sample.infected, net.infection[sample.nodes].astype(np.int64)):
            raise AssertionError("sample infection disagrees with network")


def simulate_class_counts(nets, design: SamplingDesign, seed_classes, M2, rng) -> ClassCounts:
    """Aggregate selection counts by class over M2 samples from each network.

    seed_classes, when given, overrides the design's own seed rule with
    class matching (the conditioning used inside the estimator).  Short
    samples still contribute their counts and are tallied separately.
    """
    U = {}
    short = 0
    mode_table, off_cum = _offspring_cum(design)
    n_target = int(design.n)
    cmax = max(int(design.coupons), 3)
    out_nodes = np.empty(n_target, dtype=np.int64)
    out_wave = np.empty(n_target, dtype=np.int64)
    out_recruiter = np.empty(n_target, dtype=np.int64)
    for net in nets:
        for _ in range(int(M2)):
            seeds = select_seeds(net, design, rng, seed_classes=seed_classes)
            randbuf = rng.random(n_target * (cmax + 2) + 128)
            cnt, died, _ = _kernels.rds_run(
                net.nbr_flat, net.nbr_off, net.infection, net.degrees, seeds,
                n_target, mode_table, int(design.coupons), off_cum,
                float(design.referral_weight_infected),
                bool(design.reseed_on_dieout), randbuf,
                out_nodes, out_wave, out_recruiter)
            short += int(died)
            nodes = out_nodes[:cnt]
            ks = net.degrees[nodes]
            ls = net.infection[nodes]
            for k, l in zip(ks.tolist(), ls.tolist()):
                key = (int(k), int(l))
                U[key] = U.get(key, 0) + 1
    return ClassCounts(U, M=len(nets) * int(M2), short_samples=short)


def estimate_x_from_referrals(sample: RdsSample) -> np.ndarray:
    """Estimate infected-alter counts from observed referral patterns.

    For each status, the fraction of recruitment edges incident to that
    status which cross statuses estimates the per-tie crossing rate;
    a node's infected-alter count is then its degree times the implied
    rate of ties to infected alters.
    """
    mask = sample.recruiters >= 0
    if not np.any(mask):
        raise ValueError("sample has no recruitment edges")
    status_of = {int(v): int(l) for v, l in zip(sample.nodes, sample.infected)}
    zr = np.array([status_of[int(r)] for r in sample.recruiters[mask]])
    zc = sample.infected[mask]
    cross = zr != zc
    pooled = float(cross.mean())
    p = np.empty(2)
    for l in (0, 1):
        incident = (zr == l) | (zc == l)
        p[l] = float(cross[incident].mean()) if incident.any() else pooled
    rate_to_infected = np.where(sample.infected == 1, 1.0 - p[1], p[0])
    return sample.degrees * rate_to_infected


# -- file format ----------------------------------------------------------

def save_rds_csv(sample: RdsSample, path):
    """Write the sample as id,recruiter_id,degree,infected,wave,cross_alters
    (empty recruiter_id for seeds, empty cross_alters when unobserved)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "recruiter_id", "degree", "infected", "wave", "cross_alters"])
        for i in range(sample.size):
            r = int(sample.recruiters[i])
            x = sample.cross_alters[i]
            w.writerow([
                int(sample.nodes[i]),
                "" if r < 0 else r,
                int(sample.degrees[i]),
                int(sample.infected[i]),
                int(sample.waves[i]),
                "" if math.isnan(x) else (int(x) if float(x).is_integer() else float(x)),
            ])


def load_rds_csv(path) -> RdsSample:
    """Read a sample CSV; missing cross_alters come back as NaN."""
    nodes, degrees, infected, x, waves, recruiters = [], [], [], [], [], []
    with open(path, newline="") as f:
        r = csv.DictReader(f)
        expect = ["id", "recruiter_id", "degree", "infected", "wave", "cross_alters"]
        if r.fieldnames != expect:
            raise ValueError(f"bad sample header: {r.fieldnames}")
        for row in r:
            nodes.append(int(row["id"]))
            recruiters.append(int(row["recruiter_id"]) if row["recruiter_id"] != "" else -1)
            degrees.append(int(row["degree"]))
            val = int(row["infected"])
            if val not in (0, 1):
                raise ValueError("infected must be 0 or 1")
            infected.append(val)
            waves.append(int(row["wave"]))
            x.append(float(row["cross_alters"]) if row["cross_alters"] != "" else np.nan)
    sample = RdsSample(
        nodes=np.array(nodes, dtype=np.int64),
        degrees=np.array(degrees, dtype=np.int64),
        infected=np.array(infected, dtype=np.int64),
        cross_alters=np.array(x, dtype=np.float64),
        waves=np.array(waves, dtype=np.int64),
        recruiters=np.array(recruiters, dtype=np.int64),
    )
    validate_rds_sample(sample)
    return sample
