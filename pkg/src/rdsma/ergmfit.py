"""Pseudo-likelihood estimation of the cross-tie natural parameter.

The working model fixes every nodal degree, so the usual per-dyad
pseudo-likelihood degenerates: conditional on the rest of the network,
each single dyad is forced to its observed value (toggling it would
change two degrees), making the per-dyad conditional probabilities 0 or
1 and the per-dyad logistic fit meaningless.  The smallest perturbation
that stays inside the fixed-degree space is the two-edge tetrad swap,
so inference is built on the conditional law of tetrads instead: each
admissible tetrad contributes a logistic term in eta with covariate
equal to the cross-tie change of its swap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .netcore import Network, ClassTable
from .netgen import (AnnealOutcome, AnnealSchedule, _ChainState,
                     anneal_to_crossties, reed_molloy, repair_odd_degree_sum,
                     sequence_from_table)

ETA_CAP = 10.0  # exp(+-cap * delta) already saturates the logistic


@dataclass
class TetradSample:
    """Change statistics and observed-side labels for sampled tetrads."""

    deltas: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.deltas.shape != self.labels.shape:
            raise ValueError("deltas and labels must have equal length")

    @property
    def size(self):
        return self.deltas.shape[0]


@dataclass
class MtpleFit:
    eta_hat: float
    loglik: float
    gradient_at_opt: float
    n_informative: int
    converged: bool


def _tetrads_from_arrays(adj, edges, z, n, rng, max_batches=60):
    e = edges.shape[0]
    if e < 2 or n <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    out_delta = np.empty(n, dtype=np.int64)
    out_label = np.empty(n, dtype=np.int64)
    got = 0
    for _ in range(max_batches):
        k = max(2 * (n - got), 4096)
        re1 = rng.integers(0, e, size=k, dtype=np.int64)
        re2 = rng.integers(0, e, size=k, dtype=np.int64)
        ro = rng.integers(0, 2, size=k, dtype=np.int64)
        rf = rng.integers(0, 2, size=k, dtype=np.int64)
        cnt = _kernels.tetrad_batch(adj, edges, z, re1, re2, ro, rf,
                                    out_delta[got:], out_label[got:])
        got += int(cnt)
        if got >= n:
            break
    return out_delta[:got].copy(), out_label[:got].copy()


def sample_tetrads(net: Network, n, rng, max_batches=60) -> TetradSample:
    """Draw up to n tetrads uniformly (both swap sides represented).

    May return fewer than n when the network admits few or no valid
    tetrads within the attempt budget.
    """
    deltas, labels = _tetrads_from_arrays(net.adj, net.edges.astype(np.int64),
                                          net.infection, int(n), rng, max_batches)
    return TetradSample(deltas, labels)


def tetradic_loglik(eta, sample: TetradSample) -> float:
    """Per-tetrad mean log pseudo-likelihood at eta (concave in eta)."""
    if sample.size == 0:
        raise ValueError("empty tetrad sample")
    ed = float(eta) * sample.deltas
    return float(np.mean(ed * sample.labels - np.logaddexp(0.0, ed)))


def tetradic_gradient(eta, sample: TetradSample) -> float:
    """Analytic derivative of :func:`tetradic_loglik` in eta."""
    if sample.size == 0:
        raise ValueError("empty tetrad sample")
    d = sample.deltas
    p = 1.0 / (1.0 + np.exp(-float(eta) * d))
    return float(np.mean(d * (sample.labels - p)))


def _hessian(eta, sample):
    d = sample.deltas
    p = 1.0 / (1.0 + np.exp(-float(eta) * d))
    return float(-np.mean(d * d * p * (1.0 - p)))


def fit_mtple(sample: TetradSample, eta_cap=ETA_CAP, tol=1e-8, max_iter=50) -> MtpleFit:
    """Maximize the tetradic pseudo-likelihood over eta.

    One-dimensional concave problem: Newton steps with a bisection
    safeguard on [-eta_cap, eta_cap].  Degenerate samples are signaled
    rather than raised: no informative tetrads gives eta=0, and
    separation (every informative tetrad pointing the same way) pins
    eta at the corresponding cap, both with converged=False.
    """
    if sample.size == 0:
        return MtpleFit(0.0, float("nan"), float("nan"), 0, False)
    informative = sample.deltas != 0
    n_inf = int(np.count_nonzero(informative))
    if n_inf == 0:
        return MtpleFit(0.0, tetradic_loglik(0.0, sample), 0.0, 0, False)

    side = sample.deltas[informative] * (2 * sample.labels[informative] - 1)
    if np.all(side > 0):
        eta = eta_cap
        return MtpleFit(eta, tetradic_loglik(eta, sample),
                        tetradic_gradient(eta, sample), n_inf, False)
    if np.all(side < 0):
        eta = -eta_cap
        return MtpleFit(eta, tetradic_loglik(eta, sample),
                        tetradic_gradient(eta, sample), n_inf, False)

    lo, hi = -float(eta_cap), float(eta_cap)
    glo = tetradic_gradient(lo, sample)
    ghi = tetradic_gradient(hi, sample)
    # gradient is decreasing; no interior root means the cap binds
    if glo <= 0:
        return MtpleFit(lo, tetradic_loglik(lo, sample), glo, n_inf, False)
    if ghi >= 0:
        return MtpleFit(hi, tetradic_loglik(hi, sample), ghi, n_inf, False)

    eta = 0.0
    grad = tetradic_gradient(eta, sample)
    converged = abs(grad) < tol
    for _ in range(max_iter):
        if converged:
            break
        if grad > 0:
            lo = eta
        else:
            hi = eta
        hess = _hessian(eta, sample)
        step_ok = np.isfinite(hess) and hess < 0
        nxt = eta - grad / hess if step_ok else 0.5 * (lo + hi)
        if not (lo < nxt < hi) or not np.isfinite(nxt):
            nxt = 0.5 * (lo + hi)
        eta = nxt
        grad = tetradic_gradient(eta, sample)
        converged = abs(grad) < tol
    return MtpleFit(float(eta), tetradic_loglik(eta, sample), grad, n_inf, converged)


@dataclass
class NaturalParamResult:
    """Output of the mean-value to natural-parameter pipeline."""

    eta_hat: float
    network: Network
    fit: MtpleFit
    anneal: AnnealOutcome
    parity_node: int | None
    tetrad_count: int


def mean_value_to_natural(table: ClassTable, target_g, rng, tetrad_n=100_000,
                          schedule: AnnealSchedule | None = None,
                          eta_cap=ETA_CAP, mix_batches=20) -> NaturalParamResult:
    """Natural parameter whose expected cross-tie count matches target_g,
    conditional on the degree/infection sequence induced by the table.

    Pipeline: expand the table into per-node degrees and labels (parity
    repaired if needed), build a configuration-model graph, anneal its
    cross-tie count to the target, then fit the tetradic
    pseudo-likelihood.  Tetrads are collected in batches interleaved
    with swap mixing at pinned cross-tie count, so the fit sees the
    achieved count's ensemble rather than one frozen annealing endpoint
    (which matters on small graphs).
    """
    degs, infs = sequence_from_table(table)
    degs, parity_node = repair_odd_degree_sum(degs, rng)
    net = reed_molloy(degs, infs, rng)
    outcome = anneal_to_crossties(net, float(target_g), rng, schedule)
    state = _ChainState(outcome.network)
    e = max(outcome.network.edge_count, 1)
    mix_batches = max(int(mix_batches), 1)
    per_batch = max(tetrad_n // mix_batches, 1)
    deltas, labels = [], []
    for _ in range(mix_batches):
        state.run_polish(float(outcome.achieved), 2 * e, rng)
        dd, ll = _tetrads_from_arrays(state.adj, state.edges, state.z,
                                      per_batch, rng, max_batches=8)
        deltas.append(dd)
        labels.append(ll)
    ts = TetradSample(np.concatenate(deltas), np.concatenate(labels))
    fit = fit_mtple(ts, eta_cap=eta_cap)
    ref = state.snapshot()
    outcome = AnnealOutcome(ref, state.g, outcome.target, outcome.proposals)
    return NaturalParamResult(fit.eta_hat, ref, fit, outcome,
                              parity_node, ts.size)
