"""Network generators.

Two families: a dyadic-independence mixing model parameterized by mean
degree, homophily ratio and activity ratio (used to create study
populations), and a cross-tie ERGM conditional on fixed degrees and
infection labels (used as the working model: configuration-model
construction, annealing to a target cross-tie count, and tetrad-swap
MCMC sampling).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .netcore import Network, ClassTable, cross_group_ties


class InfeasibleSpecError(ValueError):
    """Requested mixing parameters imply a dyad density outside [0, 1]."""


@dataclass
class MixingSpec:
    """Population-level targets for the dyadic mixing generator."""

    n: int
    prevalence: float
    mean_degree: float
    homophily_R: float = 1.0
    activity_w: float = 1.0

    def n_infected(self):
        return int(math.floor(self.n * self.prevalence + 0.5))


@dataclass
class ErgmSpec:
    """Fixed degree/infection sequences plus the cross-tie natural parameter."""

    degree_seq: np.ndarray
    infection: np.ndarray
    eta: float

    def __post_init__(self):
        self.degree_seq = np.asarray(self.degree_seq, dtype=np.int64)
        self.infection = np.asarray(self.infection, dtype=np.int8)
        n = self.degree_seq.shape[0]
        if self.infection.shape[0] != n:
            raise ValueError("degree_seq and infection length mismatch")
        if int(self.degree_seq.sum()) % 2 != 0:
            raise ValueError("degree sum must be even")
        if n and int(self.degree_seq.max()) >= n:
            raise ValueError("degree must be < number of nodes")


@dataclass(frozen=True)
class Tetrad:
    """Ordered node quad (i, j, k, l), all distinct.

    Read against a network it denotes the configuration with edges
    (i,j), (k,l) present and (i,l), (j,k) absent; swapping those two
    pairs preserves every nodal degree.
    """

    i: int
    j: int
    k: int
    l: int


def solve_mixing_cells(spec: MixingSpec):
    """Dyad probabilities (p11, p00, p10) reproducing the spec in expectation.

    Group mean degrees follow from the activity ratio and total mean
    degree; the homophily ratio then fixes p11 = R * p10 and the group
    degree identities pin the rest.  Raises InfeasibleSpecError when any
    implied density falls outside [0, 1].
    """
    n = int(spec.n)
    n1 = spec.n_infected()
    n0 = n - n1
    if n1 < 1 or n0 < 1:
        raise InfeasibleSpecError(f"degenerate group sizes n1={n1}, n0={n0}")
    if spec.homophily_R <= 0 or spec.activity_w <= 0 or spec.mean_degree < 0:
        raise InfeasibleSpecError("mean_degree must be >= 0 and R, w > 0")
    d0 = n * spec.mean_degree / (spec.activity_w * n1 + n0)
    d1 = spec.activity_w * d0
    p10 = d1 / ((n1 - 1) * spec.homophily_R + n0)
    p11 = spec.homophily_R * p10
    p00 = (d0 - n1 * p10) / (n0 - 1) if n0 > 1 else 0.0
    cells = [("p10", p10)]
    if n1 > 1:
        cells.append(("p11", p11))
    if n0 > 1:
        cells.append(("p00", p00))
    for name, val in cells:
        if not (0.0 <= val <= 1.0):
            raise InfeasibleSpecError(f"implied density {name}={val:.4f} outside [0, 1]")
    return p11, p00, p10


def gen_bernoulli_mixing(spec: MixingSpec, rng) -> Network:
    """Draw a network with independent dyads at the solved cell densities.

    The first n_infected node ids are labeled infected, so the realized
    prevalence is deterministic.
    """
    p11, p00, p10 = solve_mixing_cells(spec)
    n = int(spec.n)
    n1 = spec.n_infected()
    n0 = n - n1
    infection = np.zeros(n, dtype=np.int8)
    infection[:n1] = 1

    parts = []
    if n1 > 1:
        iu, ju = np.triu_indices(n1, k=1)
        keep = rng.random(iu.shape[0]) < p11
        parts.append(np.column_stack([iu[keep], ju[keep]]))
    if n0 > 1:
        iu, ju = np.triu_indices(n0, k=1)
        keep = rng.random(iu.shape[0]) < p00
        parts.append(np.column_stack([iu[keep] + n1, ju[keep] + n1]))
    if n1 > 0 and n0 > 0:
        keep = rng.random((n1, n0)) < p10
        ii, jj = np.nonzero(keep)
        parts.append(np.column_stack([ii, jj + n1]))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return Network(n, edges, infection, _trusted=True)


def repair_odd_degree_sum(degree_seq, rng):
    """If the degree sum is odd, add 1 to one uniformly chosen node's degree.

    Returns (possibly new) sequence and the adjusted node id (or None).
    """
    d = np.asarray(degree_seq, dtype=np.int64)
    if int(d.sum()) % 2 == 0:
        return d, None
    idx = int(rng.integers(0, d.shape[0]))
    d = d.copy()
    d[idx] += 1
    return d, idx


def sequence_from_table(table: ClassTable):
    """Expand an integer class table into per-node (degree, infection) arrays.

    Node order is uninfected before infected, ascending degree within
    each group; ids are assigned in that order.
    """
    degs, infs = [], []
    for (k, l) in sorted(table.entries.keys(), key=lambda kl: (kl[1], kl[0])):
        c = table.entries[(k, l)]
        c_int = int(round(c))
        if abs(c - c_int) > 1e-9:
            raise ValueError("class table must be integer-valued")
        degs.extend([k] * c_int)
        infs.extend([l] * c_int)
    return np.array(degs, dtype=np.int64), np.array(infs, dtype=np.int8)


def reed_molloy(degree_seq, infection, rng, repair_budget_per_edge=100) -> Network:
    """Configuration-model construction of a simple graph with the given
    degree sequence.

    Stubs are matched uniformly; self-loops and duplicate pairs are then
    repaired by degree-preserving swaps against randomly chosen existing
    edges (reshuffling the conflicted stubs when no usable edge exists).
    Raises ValueError when the repair budget is exhausted, which in
    practice means the sequence is not realizable as a simple graph.
    """
    d = np.asarray(degree_seq, dtype=np.int64)
    n = d.shape[0]
    if int(d.sum()) % 2 != 0:
        raise ValueError("degree sum must be even")
    if n and d.max() >= n:
        raise ValueError("degree must be < number of nodes")
    if d.min() < 0:
        raise ValueError("degrees must be nonnegative")

    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    rng.shuffle(stubs)
    eset = set()
    good = []
    bad = []
    for u, v in stubs.reshape(-1, 2):
        u, v = int(u), int(v)
        key = (u, v) if u < v else (v, u)
        if u == v or key in eset:
            bad.append((u, v))
        else:
            eset.add(key)
            good.append(key)

    n_edges = max(len(good) + len(bad), 1)
    budget = repair_budget_per_edge * n_edges
    attempts = 0
    while bad and attempts < budget:
        attempts += 1
        bi = int(rng.integers(0, len(bad)))
        u, v = bad[bi]
        key = (u, v) if u < v else (v, u)
        if u != v and key not in eset:
            eset.add(key)
            good.append(key)
            bad[bi] = bad[-1]
            bad.pop()
            continue
        if good:
            gi = int(rng.integers(0, len(good)))
            x, y = good[gi]
            if rng.integers(0, 2):
                x, y = y, x
            k1 = (u, x) if u < x else (x, u)
            k2 = (v, y) if v < y else (y, v)
            if u != x and v != y and k1 not in eset and k2 not in eset and k1 != k2:
                eset.discard((x, y) if x < y else (y, x))
                good[gi] = good[-1]
                good.pop()
                eset.add(k1)
                eset.add(k2)
                good.append(k1)
                good.append(k2)
                bad[bi] = bad[-1]
                bad.pop()
        else:
            # no intact edge to swap against: re-pair the conflicted stubs
            pool = np.array([s for pair in bad for s in pair], dtype=np.int64)
            rng.shuffle(pool)
            bad = []
            for u2, v2 in pool.reshape(-1, 2):
                u2, v2 = int(u2), int(v2)
                key2 = (u2, v2) if u2 < v2 else (v2, u2)
                if u2 == v2 or key2 in eset:
                    bad.append((u2, v2))
                else:
                    eset.add(key2)
                    good.append(key2)
    if bad:
        raise ValueError(
            f"could not realize degree sequence as a simple graph after {attempts} repair attempts"
        )
    edges = np.array(good, dtype=np.int64).reshape(-1, 2)
    return Network(n, edges, infection, _trusted=True)


@dataclass
class AnnealSchedule:
    """Geometric cooling schedule for the cross-tie matcher."""

    t_start: float = 1.0
    t_ratio: float = 0.999
    t_floor: float = 1e-4
    proposals_per_edge: int = 500


@dataclass
class AnnealOutcome:
    network: Network
    achieved: int
    target: float
    proposals: int

    @property
    def residual(self):
        return abs(self.achieved - self.target)


class _ChainState:
    """Mutable adjacency + edge list driven by the swap kernel.

    Owns its copies; the source network is never modified.  Snapshots
    freeze the current state into immutable Networks.
    """

    def __init__(self, net: Network):
        self.n = net.n
        self.adj = net.adj.copy()
        self.edges = net.edges.astype(np.int64).copy()
        self.z = net.infection
        self.g = cross_group_ties(net)
        self.temp = None

    def _buffers(self, k, rng):
        e = self.edges.shape[0]
        return (
            rng.integers(0, e, size=k, dtype=np.int64),
            rng.integers(0, e, size=k, dtype=np.int64),
            rng.integers(0, 2, size=k, dtype=np.int64),
            rng.random(k),
        )

    def run_mh(self, eta, n_proposals, rng, chunk=1 << 17):
        done = 0
        while done < n_proposals:
            k = min(chunk, n_proposals - done)
            re1, re2, ro, ra = self._buffers(k, rng)
            self.g, used, _ = _kernels.swap_chain(
                self.adj, self.edges, self.z, _kernels.MODE_MH,
                float(eta), 0.0, 1.0, 1.0, 1.0, 1.0, int(self.g), re1, re2, ro, ra)
            done += k
        return self.g

    def run_polish(self, target, n_proposals, rng, chunk=1 << 17):
        """Mix by swaps that never move g away from target (g stays pinned
        once the anneal has converged)."""
        done = 0
        while done < n_proposals:
            k = min(chunk, n_proposals - done)
            re1, re2, ro, ra = self._buffers(k, rng)
            self.g, used, _ = _kernels.swap_chain(
                self.adj, self.edges, self.z, _kernels.MODE_POLISH,
                0.0, float(target), 1.0, 1.0, 1.0, 1.0, int(self.g), re1, re2, ro, ra)
            done += k
        return self.g

    def _stop_threshold(self, target):
        """Smallest achievable |g - target| given that swaps change the
        cross-tie count by even steps, so its parity is invariant."""
        parity = int(np.dot(self.z.astype(np.int64),
                            np.asarray(self.adj.sum(axis=1), dtype=np.int64))) % 2
        lo = math.floor(target) - 2
        best = min(abs(k - target)
                   for k in range(lo, lo + 6) if k % 2 == parity)
        return max(1.0, best + 1e-9)

    def run_anneal(self, target, schedule: AnnealSchedule, rng, chunk=1 << 17):
        e = max(self.edges.shape[0], 1)
        budget = schedule.proposals_per_edge * e
        temp = schedule.t_start
        stop_at = self._stop_threshold(target)
        done = 0
        while done < budget:
            k = min(chunk, budget - done)
            re1, re2, ro, ra = self._buffers(k, rng)
            self.g, used, temp = _kernels.swap_chain(
                self.adj, self.edges, self.z, _kernels.MODE_ANNEAL,
                0.0, float(target), stop_at, temp, schedule.t_ratio,
                schedule.t_floor, int(self.g), re1, re2, ro, ra)
            done += used
            if used < k:  # early stop: residual below threshold
                break
        self.temp = temp
        return self.g, done

    def snapshot(self) -> Network:
        return Network(self.n, self.edges.copy(), self.z, _trusted=True)


def anneal_to_crossties(net: Network, target_g, rng,
                        schedule: AnnealSchedule | None = None) -> AnnealOutcome:
    """Move the cross-tie count toward target_g by degree-preserving swaps.

    Improving swaps are always accepted, worsening ones with probability
    exp(-increase / T) under geometric cooling.  Best effort: stops at
    residual < 1 (or at the parity-locked minimum, since swaps move the
    count in even steps) or when the proposal budget runs out, and
    reports the achieved count either way.
    """
    schedule = schedule or AnnealSchedule()
    state = _ChainState(net)
    if abs(state.g - target_g) < 1.0 or net.edge_count < 2:
        return AnnealOutcome(net, state.g, float(target_g), 0)
    g, used = state.run_anneal(float(target_g), schedule, rng)
    return AnnealOutcome(state.snapshot(), int(g), float(target_g), used)


def sample_valid_tetrad(net: Network, rng, max_attempts=10_000):
    """One uniformly chosen tetrad whose swap stays degree-preserving.

    Picks two distinct edges and an orientation uniformly; rejects node
    collisions and configurations whose swapped-in pairs already exist.
    Returns None when no valid tetrad turns up within the attempt bound.
    """
    e = net.edge_count
    if e < 2:
        return None
    edges = net.edges
    adj = net.adj
    for _ in range(max_attempts):
        e1, e2 = rng.integers(0, e, size=2)
        if e1 == e2:
            continue
        a, b = int(edges[e1, 0]), int(edges[e1, 1])
        c, d = int(edges[e2, 0]), int(edges[e2, 1])
        if rng.integers(0, 2):
            c, d = d, c
        if a == c or a == d or b == c or b == d:
            continue
        if adj[a, d] or adj[c, b]:
            continue
        return Tetrad(a, b, c, d)
    return None


def ergm_mcmc_sample(spec: ErgmSpec, start: Network, n_draws, rng,
                     burn_in=None, spacing=None):
    """Metropolis-Hastings over tetrad swaps targeting exp(eta * crossties).

    The proposal (two uniform edges plus orientation) is symmetric, so
    draws converge to the cross-tie exponential family over the
    swap-reachable component of the fixed-degree space.  burn_in and
    spacing default to 20 and 2 proposals per edge.
    """
    if not np.array_equal(start.degrees, spec.degree_seq):
        raise ValueError("start network degrees do not match spec")
    if not np.array_equal(start.infection, spec.infection):
        raise ValueError("start network infection does not match spec")
    e = max(start.edge_count, 1)
    if burn_in is None:
        burn_in = 20 * e
    if spacing is None:
        spacing = 2 * e
    state = _ChainState(start)
    state.run_mh(spec.eta, int(burn_in), rng)
    draws = []
    for _ in range(int(n_draws)):
        state.run_mh(spec.eta, int(spacing), rng)
        draws.append(state.snapshot())
    return draws


def swap_randomize(net: Network, n_proposals, rng) -> Network:
    """Apply a run of unbiased tetrad swaps (every valid proposal accepted)."""
    state = _ChainState(net)
    state.run_mh(0.0, int(n_proposals), rng)
    return state.snapshot()
